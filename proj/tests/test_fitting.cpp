#include <fqmag/fitting.hpp>
#include <fqmag/io/synthetic.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace fqmag;

namespace {

SpectrumPoints sample(const FluxQubit& q, double lo = -10.0, double hi = 10.0, int n = 21, double noise = 0.0,
                      std::uint64_t seed = 1) {
    return io::synthetic_spectrum(q, lo, hi, n, noise, seed);
}

}  // namespace

TEST(LeastSquares, LinearModelExactInOneIteration) {
    std::vector<DataPoint> data;
    for (int i = 0; i < 8; ++i)
        data.push_back({0.5 * i, 1.5 - 2.25 * 0.5 * i});
    FitOptions one;
    one.max_iterations = 1;
    const auto fit = least_squares([](const Eigen::VectorXd& p, double x) { return p(0) + p(1) * x; },
                                   Eigen::Vector2d(10.0, 10.0), data, one);
    EXPECT_EQ(fit.iterations, 1);
    EXPECT_NEAR(fit.parameters[0], 1.5, 1e-9);
    EXPECT_NEAR(fit.parameters[1], -2.25, 1e-9);
}

TEST(LeastSquares, HyperbolaRecovery) {
    std::vector<DataPoint> data;
    for (int i = 0; i <= 30; ++i) {
        const double x = -6.0 + 0.4 * i;
        data.push_back({x, std::hypot(3.0, 1.7 * (x - 0.8))});
    }
    const auto fit = least_squares(
        [](const Eigen::VectorXd& p, double x) { return std::hypot(p(0), p(1) * (x - p(2))); },
        Eigen::Vector3d(2.5, 1.5, 0.5), data);
    ASSERT_TRUE(fit.converged);
    EXPECT_NEAR(fit.parameters[0], 3.0, 1e-8 * 3.0);
    EXPECT_NEAR(fit.parameters[1], 1.7, 1e-8 * 1.7);
    EXPECT_NEAR(fit.parameters[2], 0.8, 1e-8 * 0.8);
}

TEST(LeastSquares, RankDeficientAtOneAbscissa) {
    std::vector<DataPoint> data(6, DataPoint{2.0, 1.0});
    EXPECT_THROW(least_squares([](const Eigen::VectorXd& p, double x) { return p(0) + p(1) * x; },
                               Eigen::Vector2d(0.0, 0.0), data),
                 RankDeficientError);
}

TEST(LeastSquares, InputChecks) {
    const auto model = [](const Eigen::VectorXd& p, double x) { return p(0) * x; };
    EXPECT_THROW(least_squares(model, Eigen::VectorXd::Constant(1, NAN), {{1.0, 1.0}}), DomainError);
    EXPECT_THROW(least_squares(model, Eigen::VectorXd::Constant(1, 1.0), {}), DomainError);
    EXPECT_THROW(least_squares([](const Eigen::VectorXd&, double) { return NAN; }, Eigen::VectorXd::Constant(1, 1.0),
                               {{1.0, 1.0}}),
                 DomainError);
}

TEST(LeastSquares, ResidualHistoryNonincreasing) {
    std::vector<DataPoint> data;
    for (int i = 0; i < 20; ++i) {
        const double x = 0.25 * i;
        data.push_back({x, 2.0 * std::exp(-0.7 * x) + 0.01 * std::sin(7.0 * x)});
    }
    const auto fit = least_squares([](const Eigen::VectorXd& p, double x) { return p(0) * std::exp(p(1) * x); },
                                   Eigen::Vector2d(1.0, 0.5), data);
    ASSERT_GE(fit.residual_history.size(), 2u);
    for (std::size_t i = 1; i < fit.residual_history.size(); ++i)
        EXPECT_LE(fit.residual_history[i], fit.residual_history[i - 1]);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.residual_norm, fit.residual_history.back(), 1e-15);
}

TEST(Jacobian, ForwardAgreesWithCentral) {
    const auto pts = sample(FluxQubit(5.0, 300.0, 0.3));
    const ResidualFunction f = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(pts.size()));
        for (std::size_t i = 0; i < pts.size(); ++i)
            r(static_cast<Eigen::Index>(i)) =
                std::hypot(p(0), asymptotic_slope(p(1)) * (pts.points()[i].flux - p(2))) - pts.points()[i].frequency;
        return r;
    };
    const Eigen::Vector3d p(4.7, 280.0, 0.1);
    const auto fwd = forward_jacobian(f, p, f(p));
    const auto ctr = central_jacobian(f, p);
    for (Eigen::Index c = 0; c < fwd.cols(); ++c)
        EXPECT_LE((fwd.col(c) - ctr.col(c)).norm(), 1e-4 * ctr.col(c).norm()) << "column " << c;
}

TEST(SpectrumPoints, Preconditions) {
    EXPECT_THROW(SpectrumPoints({{0, 5}, {1, 6}, {2, 7}}), PreconditionError);
    EXPECT_THROW(SpectrumPoints({{1, 5}, {1, 6}, {1, 7}, {1, 8}}), PreconditionError);
    EXPECT_THROW(SpectrumPoints({{0, 5}, {1, 6}, {2, NAN}, {3, 8}}), DomainError);
}

TEST(FitQubitSpectrum, NoiselessRecovery) {
    const auto fit = fit_qubit_spectrum(sample(FluxQubit(5.0, 300.0, 0.0)));
    ASSERT_TRUE(fit.converged);
    EXPECT_NEAR(fit.parameters[0], 5.0, 1e-6 * 5.0);
    EXPECT_NEAR(fit.parameters[1], 300.0, 1e-6 * 300.0);
    EXPECT_NEAR(fit.parameters[2], 0.0, 1e-6 * 20.0);
    const auto q = qubit_from_fit(fit);
    EXPECT_NEAR(q.delta(), 5.0, 1e-5);
}

TEST(FitQubitSpectrum, NoisySweetSpotMostlyWithinHalfPercentOfWindow) {
    int pass = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto fit = fit_qubit_spectrum(sample(FluxQubit(5.0, 300.0, 0.0), -10.0, 10.0, 20, 0.01, seed));
        if (std::abs(fit.parameters[2]) <= 0.005 * 20.0)
            ++pass;
    }
    EXPECT_GE(pass, 95);
}

TEST(FitQubitSpectrum, InitialGuessFromData) {
    const auto guess = initial_qubit_guess(sample(FluxQubit(5.0, 300.0, 1.0), -9.0, 11.0, 21));
    EXPECT_NEAR(guess.delta(), 5.0, 1e-12);
    EXPECT_NEAR(guess.sweet_spot(), 1.0, 1e-12);
    EXPECT_GT(guess.persistent_current(), 0.0);
}

TEST(SpectralShift, IdenticalDatasetsGiveZero) {
    const auto a = sample(FluxQubit(5.0, 300.0, 0.0));
    const auto s = extract_spectral_shift(a, a);
    EXPECT_NEAR(s.shift, 0.0, 1e-6);
}

TEST(SpectralShift, RecoversGeneratedShift) {
    const auto s = extract_spectral_shift(sample(FluxQubit(5.0, 300.0, 0.0)), sample(FluxQubit(5.0, 300.0, -0.05)));
    EXPECT_NEAR(s.shift, -50.0, 1.0);
    EXPECT_NEAR(s.joint.parameters[0], 5.0, 1e-6);
}

TEST(SpectralShift, Antisymmetric) {
    const auto a = sample(FluxQubit(5.0, 300.0, 0.0), -10.0, 10.0, 21, 0.005, 3);
    const auto b = sample(FluxQubit(5.0, 300.0, 0.08), -10.0, 10.0, 21, 0.005, 4);
    const auto ab = extract_spectral_shift(a, b);
    const auto ba = extract_spectral_shift(b, a);
    EXPECT_GT(ab.uncertainty, 0.0);
    EXPECT_LE(std::abs(ab.shift + ba.shift), ab.uncertainty);
}

TEST(SpectralShift, TranslationEquivariant) {
    const auto a = sample(FluxQubit(5.0, 300.0, 0.0), -10.0, 10.0, 21, 0.003, 8);
    const auto b = sample(FluxQubit(5.0, 300.0, -0.03), -10.0, 10.0, 21, 0.003, 9);
    std::vector<SpectrumPoint> moved = b.points();
    for (auto& p : moved)
        p.flux += 0.02;
    const double base = extract_spectral_shift(a, b).shift;
    const double translated = extract_spectral_shift(a, SpectrumPoints(moved)).shift;
    EXPECT_NEAR(translated - base, 20.0, 1e-4);
}

TEST(SpectralShift, DifferentDeltaIsMismatch) {
    EXPECT_THROW(extract_spectral_shift(sample(FluxQubit(5.0, 300.0, 0.0)), sample(FluxQubit(6.0, 300.0, 0.0))),
                 ModelMismatchError);
}
