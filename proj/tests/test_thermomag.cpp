#include <fqmag/thermomag.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace fqmag;

namespace {

const SpinSystem fe3 = SpinSystem::isotropic(2.5, 2.0, 35.0, 35.0 / 3.0);
const SpinSystem half = SpinSystem::isotropic(0.5, 2.0);
const OrientationGrid powder = make_orientation_grid(32, 64);

// mu_B / k_B in mK per mT, from SI values.
constexpr double mu_b_over_k_b = 9.2740100783e-24 / 1.380649e-23;

double tanh_oracle(double b_mt, double t_mk) { return std::tanh(mu_b_over_k_b * b_mt / t_mk); }

std::vector<double> log_space(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
        v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return v;
}

}  // namespace

TEST(ThermalEnsemble, RejectsTooCold) {
    EXPECT_THROW(ThermalEnsemble(0.05), DomainError);
    EXPECT_THROW(ThermalEnsemble(-1.0), DomainError);
    EXPECT_NO_THROW(ThermalEnsemble(0.1));
}

TEST(PartitionFunction, DegenerateLevelsCountStates) {
    RVector lv = RVector::Constant(6, 3.0);
    EXPECT_DOUBLE_EQ(partition_function(lv, ThermalEnsemble(50.0)), 6.0);
}

TEST(PartitionFunction, FrozenTwoLevelSystem) {
    RVector lv(2);
    lv << 0.0, 100.0;
    EXPECT_NEAR(partition_function(lv, ThermalEnsemble(10.0)), 1.0, 1e-12);
}

TEST(PartitionFunction, DirectSummation) {
    const auto spec = diagonalize(build_hamiltonian(fe3, FieldVector(10.0, Vec3::UnitX())));
    const ThermalEnsemble t(100.0);
    const long double kt = 0.0208366191L * 100.0L;
    long double z = 0.0L;
    for (int i = 0; i < spec.size(); ++i)
        z += std::exp(-static_cast<long double>(spec.levels(i)) / kt);
    z *= std::exp(static_cast<long double>(spec.levels(0)) / kt);
    EXPECT_NEAR(partition_function(spec, t), static_cast<double>(z), 1e-12 * static_cast<double>(z));
}

TEST(MomentSingle, SpinHalfMatchesTanh) {
    const double m = moment_single(half, FieldVector(10.0, Vec3::UnitZ()), ThermalEnsemble(100.0));
    // Saturated spin-1/2, g = 2 carries 1 mu_B, so the moment is the polarization.
    EXPECT_NEAR(m, 0.06707, 1e-5);
    EXPECT_NEAR(m, tanh_oracle(10.0, 100.0), 1e-9);
    EXPECT_NEAR(tanh_oracle(10.0, 100.0), std::tanh(0.06717), 1e-5);
}

TEST(MomentSingle, HotEnsembleFollowsHighTemperatureCurieLaw) {
    // k_B T >> D: m = g^2 s (s + 1) mu_B B / (3 k_B T).
    const FieldVector f(10.0, Vec3::UnitY());
    const ThermalEnsemble t(1e7);
    const double curie = 4.0 * 2.5 * 3.5 * constants::mu_b_over_h * 10.0 / (3.0 * t.thermal_energy());
    EXPECT_NEAR(moment_hellmann_feynman(fe3, f, t), curie, 1e-3 * curie);
    EXPECT_LT(std::abs(moment_single(fe3, f, t)), 1e-4);
}

TEST(MomentSingle, AxialFieldAlongZMatchesPopulationSum) {
    // e = 0 and B along z: H is diagonal with E_m = d m^2 + mu_B g B m.
    const auto sys = SpinSystem::isotropic(2.5, 2.0, 35.0, 0.0);
    for (double b : {0.5, 5.0, 50.0})
        for (double t : {10.0, 100.0, 1000.0}) {
            const double kt = constants::k_b_over_h * t;
            double z = 0.0, sum = 0.0;
            for (double m = -2.5; m <= 2.5; m += 1.0) {
                const double e = 35.0 * m * m + constants::mu_b_over_h * 2.0 * b * m;
                const double w = std::exp(-(e - 35.0 * 0.25) / kt);
                z += w;
                sum += w * 2.0 * m;
            }
            const double oracle = -sum / z;
            EXPECT_NEAR(moment_single(sys, FieldVector(b, Vec3::UnitZ()), ThermalEnsemble(t)), oracle,
                        1e-8 * std::max(1.0, std::abs(oracle)))
                << b << " mT, " << t << " mK";
        }
}

TEST(MomentSingle, FreeEnergyDerivativeAgreesWithHellmannFeynman) {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const Vec3 dir = Vec3(n(rng), n(rng), n(rng)).normalized();
        const FieldVector f(1.0 + 10.0 * trial, dir);
        const ThermalEnsemble t(20.0 + 30.0 * trial);
        const double fd = moment_single(fe3, f, t);
        const double hf = moment_hellmann_feynman(fe3, f, t);
        EXPECT_NEAR(fd, hf, 1e-6 * std::abs(hf));
    }
}

TEST(MomentSingle, StencilNeedsRoom) {
    EXPECT_THROW(moment_single(fe3, FieldVector(0.02, Vec3::UnitZ()), ThermalEnsemble(10.0)), DomainError);
    EXPECT_NO_THROW(moment_single(fe3, FieldVector(0.021, Vec3::UnitZ()), ThermalEnsemble(10.0)));
}

TEST(PolarizationPowder, IsotropicPowderEqualsSingleOrientation) {
    const auto sys = SpinSystem::isotropic(1.5, 2.0);
    const ThermalEnsemble t(30.0);
    const auto grid = make_orientation_grid(8, 16);
    EXPECT_NEAR(polarization_powder(sys, 7.0, t, grid).polarization,
                polarization_powder(sys, 7.0, t, OrientationGrid::single()).polarization, 1e-10);
}

TEST(PolarizationPowder, SaturatesMonotonicallyAtLargeBOverT) {
    const PowderLevels levels(fe3, 50.0, powder);
    double previous = 0.0;
    for (double t : {100.0, 30.0, 10.0, 3.0, 1.0}) {
        const double p = levels.polarization(ThermalEnsemble(t));
        EXPECT_GT(p, previous);
        previous = p;
    }
    EXPECT_GT(previous, 0.999);
    EXPECT_LE(previous, 1.0 + 1e-12);
}

TEST(PolarizationPowder, HighFieldLowTemperatureBeatsLowFieldHighTemperature) {
    EXPECT_GT(polarization_powder(fe3, 12.5, ThermalEnsemble(12.5), powder).polarization,
              polarization_powder(fe3, 2.5, ThermalEnsemble(200.0), powder).polarization);
}

TEST(PolarizationPowder, QuadratureConvergence) {
    const auto doubled = make_orientation_grid(64, 128);
    for (const auto& [b, t] : std::vector<std::pair<double, double>>{{2.5, 12.5}, {10.0, 100.0}, {12.5, 200.0}}) {
        const double p1 = polarization_powder(fe3, b, ThermalEnsemble(t), powder).polarization;
        const double p2 = polarization_powder(fe3, b, ThermalEnsemble(t), doubled).polarization;
        EXPECT_LT(std::abs(p1 - p2), 1e-6) << b << " mT, " << t << " mK";
    }
}

TEST(PolarizationPowder, MonotoneAndBoundedOnLattice) {
    const auto grid = make_orientation_grid(16, 32);
    const auto fields = log_space(0.1, 50.0, 20);
    const auto temps = log_space(1.0, 10000.0, 20);
    std::vector<std::vector<double>> p;
    for (double b : fields) {
        const PowderLevels levels(fe3, b, grid);
        std::vector<double> row;
        for (double t : temps)
            row.push_back(levels.polarization(ThermalEnsemble(t)));
        p.push_back(row);
    }
    for (std::size_t i = 0; i < fields.size(); ++i)
        for (std::size_t j = 0; j < temps.size(); ++j) {
            EXPECT_GE(p[i][j], 0.0);
            EXPECT_LE(p[i][j], 1.0 + 1e-12);
            if (i + 1 < fields.size()) {
                EXPECT_GE(p[i + 1][j], p[i][j]) << fields[i] << " mT, " << temps[j] << " mK";
            }
            if (j + 1 < temps.size()) {
                EXPECT_LE(p[i][j + 1], p[i][j]) << fields[i] << " mT, " << temps[j] << " mK";
            }
        }
}

// Curie regime: Zeeman energy far below k_B T and low enough temperature that the
// temperature-independent second-order moment is negligible.
TEST(PolarizationPowder, CurieLimit) {
    const PowderLevels levels(fe3, 0.05, powder);
    const double lo = levels.polarization(ThermalEnsemble(2.0)) * 2.0 / 0.05;
    const double hi = levels.polarization(ThermalEnsemble(20.0)) * 20.0 / 0.05;
    EXPECT_NEAR(hi / lo, 1.0, 0.01);
}

TEST(MagnetizationCurve, IdenticalConditionsMerge) {
    const auto curve = magnetization_curve(fe3, {{5.0, 50.0}, {5.0, 50.0}, {5.0, 50.0}}, make_orientation_grid(4, 8));
    ASSERT_EQ(curve.size(), 1u);
    EXPECT_DOUBLE_EQ(curve.points()[0].b_over_t, 0.1);
}

TEST(MagnetizationCurve, SpinHalfCurveIsTanh) {
    std::vector<Condition> conds;
    for (double b : log_space(1.0, 50.0, 8))
        for (double t : log_space(10.0, 1000.0, 8))
            conds.push_back({b, t});
    const auto curve = magnetization_curve(half, conds, OrientationGrid::single());
    for (const auto& p : curve.points())
        EXPECT_NEAR(p.polarization, tanh_oracle(p.field, p.temperature), 1e-8);
}

TEST(MagnetizationCurve, SortedAndMonotoneOnExperimentalLattice) {
    std::vector<Condition> conds;
    for (double b : {2.5, 5.0, 7.5, 10.0, 12.5})
        for (double t : {12.5, 25.0, 50.0, 100.0, 200.0})
            conds.push_back({b, t});
    const auto curve = magnetization_curve(fe3, conds, powder);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        EXPECT_LT(curve.points()[i - 1].b_over_t, curve.points()[i].b_over_t);
        EXPECT_LE(curve.points()[i - 1].polarization, curve.points()[i].polarization);
    }
}

TEST(MagnetizationCurve, OutOfRangeConditionIsNamed) {
    try {
        magnetization_curve(fe3, {{5.0, 50.0}, {80.0, 50.0}}, powder);
        FAIL() << "expected a domain error";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("80"), std::string::npos);
    }
    EXPECT_THROW(magnetization_curve(fe3, {{5.0, 0.5}}, powder), DomainError);
}

TEST(TwoLevelTruncation, ValidForDefaultIronAt10mT200mK) {
    const auto spec = diagonalize(build_hamiltonian(fe3, FieldVector(10.0, Vec3::UnitX())));
    const auto two = two_level_truncation(spec, ThermalEnsemble(200.0), 10.0);
    EXPECT_EQ(two.size(), 2);
    EXPECT_DOUBLE_EQ(two.levels(1), spec.levels(1));
}

TEST(TwoLevelTruncation, RejectedForTinyZeroFieldSplitting) {
    const auto weak = SpinSystem::isotropic(2.5, 2.0, 0.1, 0.0);
    const auto spec = diagonalize(build_hamiltonian(weak, FieldVector(10.0, Vec3::UnitX())));
    try {
        two_level_truncation(spec, ThermalEnsemble(200.0), 10.0);
        FAIL() << "expected truncation to be rejected";
    } catch (const TruncationInvalid& e) {
        EXPECT_NEAR(e.thermal_energy(), constants::k_b_over_h * 200.0, 1e-12);
        EXPECT_LT(e.gap(), 10.0 * e.thermal_energy());
    }
}

TEST(TwoLevelTruncation, AgreesWithFullPowder) {
    const ThermalEnsemble t(100.0);
    const double full = polarization_powder(fe3, 10.0, t, powder).polarization;
    const double trunc = polarization_powder_truncated(fe3, 10.0, t, powder).polarization;
    EXPECT_NEAR(trunc, full, 1e-3 * full);
}
