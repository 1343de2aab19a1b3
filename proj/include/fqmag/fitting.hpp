#ifndef FQMAG_FITTING_HPP
#define FQMAG_FITTING_HPP

// Small dense nonlinear least squares (Gauss-Newton with a forward-difference Jacobian
// and step halving) and the qubit-spectrum fits built on it.

#include <fqmag/errors.hpp>
#include <fqmag/qubit.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace fqmag {

struct FitResult {
    std::vector<double> parameters;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> parameter_uncertainties;
    /// Residual norm after the initial guess and after every accepted step.
    std::vector<double> residual_history;
    /// Parameter covariance estimated from the final Jacobian.
    Eigen::MatrixXd covariance;
};

struct FitOptions {
    double tolerance = 1e-10;  // relative step
    int max_iterations = 100;
    int max_halvings = 20;
};

using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

namespace detail {

inline Eigen::VectorXd checked_residuals(const ResidualFunction& f, const Eigen::VectorXd& p) {
    Eigen::VectorXd r = f(p);
    if (!r.allFinite())
        throw DomainError("non-finite residual during least-squares fit");
    return r;
}

}  // namespace detail

/// Forward-difference Jacobian of the residual vector.
inline Eigen::MatrixXd forward_jacobian(const ResidualFunction& f, const Eigen::VectorXd& p,
                                        const Eigen::VectorXd& r0) {
    Eigen::MatrixXd jac(r0.size(), p.size());
    const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        Eigen::VectorXd q = p;
        const double h = root_eps * std::max(std::abs(p(k)), 1.0);
        q(k) += h;
        jac.col(k) = (detail::checked_residuals(f, q) - r0) / (q(k) - p(k));
    }
    return jac;
}

inline Eigen::MatrixXd central_jacobian(const ResidualFunction& f, const Eigen::VectorXd& p) {
    Eigen::MatrixXd jac;
    const double step_scale = std::cbrt(std::numeric_limits<double>::epsilon());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        Eigen::VectorXd up = p, down = p;
        const double h = step_scale * std::max(std::abs(p(k)), 1.0);
        up(k) += h;
        down(k) -= h;
        const Eigen::VectorXd col = (f(up) - f(down)) / (up(k) - down(k));
        if (jac.size() == 0)
            jac.resize(col.size(), p.size());
        jac.col(k) = col;
    }
    return jac;
}

inline FitResult least_squares(const ResidualFunction& residuals, const Eigen::VectorXd& init,
                               const FitOptions& opt = {}) {
    if (!init.allFinite())
        throw DomainError("initial parameters must be finite");
    Eigen::VectorXd p = init;
    Eigen::VectorXd r = detail::checked_residuals(residuals, p);
    if (r.size() == 0)
        throw DomainError("least squares needs at least one data point");

    FitResult out;
    out.residual_history.push_back(r.norm());
    Eigen::MatrixXd jac;
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        jac = forward_jacobian(residuals, p, r);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        if (sv.size() < p.size() || !(sv(sv.size() - 1) > 1e-12 * sv(0)))
            throw RankDeficientError("normal equations are singular (rank-deficient Jacobian, " +
                                     std::to_string(jac.rows()) + " residuals, " + std::to_string(p.size()) +
                                     " parameters)");
        Eigen::VectorXd step = -svd.solve(r);
        out.iterations = iter + 1;

        const double scale = std::max(p.norm(), std::numeric_limits<double>::min());
        bool accepted = false;
        for (int halving = 0; halving <= opt.max_halvings; ++halving) {
            const Eigen::VectorXd trial = p + step;
            const Eigen::VectorXd r_trial = detail::checked_residuals(residuals, trial);
            if (r_trial.squaredNorm() <= r.squaredNorm()) {
                p = trial;
                r = r_trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        const double relative_step = step.norm() / scale;
        if (accepted)
            out.residual_history.push_back(r.norm());
        if (relative_step < opt.tolerance) {
            out.converged = true;
            break;
        }
        if (!accepted)
            break;
    }

    jac = forward_jacobian(residuals, p, r);
    out.parameters.assign(p.data(), p.data() + p.size());
    out.residual_norm = r.norm();
    const Eigen::Index dof = r.size() - p.size();
    const double s2 = dof > 0 ? r.squaredNorm() / static_cast<double>(dof) : 0.0;
    out.covariance = s2 * (jac.transpose() * jac).completeOrthogonalDecomposition().pseudoInverse();
    for (Eigen::Index k = 0; k < p.size(); ++k)
        out.parameter_uncertainties.push_back(std::sqrt(std::max(0.0, out.covariance(k, k))));
    return out;
}

struct DataPoint {
    double x;
    double y;
};

using ScalarModel = std::function<double(const Eigen::VectorXd&, double)>;

/// Fits y ~ model(params, x) in the least-squares sense.
inline FitResult least_squares(const ScalarModel& model, const Eigen::VectorXd& init,
                               const std::vector<DataPoint>& data, const FitOptions& opt = {}) {
    if (data.empty())
        throw DomainError("least squares needs at least one data point");
    return least_squares(
        [&](const Eigen::VectorXd& p) {
            Eigen::VectorXd r(static_cast<Eigen::Index>(data.size()));
            for (std::size_t i = 0; i < data.size(); ++i)
                r(static_cast<Eigen::Index>(i)) = model(p, data[i].x) - data[i].y;
            return r;
        },
        init, opt);
}

struct SpectrumPoint {
    double flux;       // mPhi0
    double frequency;  // GHz
};

/// Qubit peak positions; at least four points spread over more than one flux value.
class SpectrumPoints {
public:
    explicit SpectrumPoints(std::vector<SpectrumPoint> points) : points_(std::move(points)) {
        if (points_.size() < 4)
            throw PreconditionError("hyperbola fit needs at least 4 spectrum points, got " +
                                    std::to_string(points_.size()));
        const auto [lo, hi] = std::minmax_element(points_.begin(), points_.end(),
                                                  [](const auto& a, const auto& b) { return a.flux < b.flux; });
        if (lo->flux == hi->flux)
            throw PreconditionError("spectrum points all share one flux value");
        for (const auto& p : points_)
            if (!std::isfinite(p.flux) || !std::isfinite(p.frequency))
                throw DomainError("spectrum points must be finite");
    }

    const std::vector<SpectrumPoint>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }

    double flux_span() const {
        const auto [lo, hi] = std::minmax_element(points_.begin(), points_.end(),
                                                  [](const auto& a, const auto& b) { return a.flux < b.flux; });
        return hi->flux - lo->flux;
    }

private:
    std::vector<SpectrumPoint> points_;
};

/// Deterministic starting point: delta from the lowest frequency, sweet spot at its flux,
/// slope from the secant to the farther extreme-flux point.
inline FluxQubit initial_qubit_guess(const SpectrumPoints& data) {
    const auto& pts = data.points();
    const auto min_it = std::min_element(pts.begin(), pts.end(),
                                         [](const auto& a, const auto& b) { return a.frequency < b.frequency; });
    const auto [lo, hi] =
        std::minmax_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.flux < b.flux; });
    double slope = 0.0;
    for (const auto* ext : {&*lo, &*hi}) {
        const double dx = std::abs(ext->flux - min_it->flux);
        if (dx > 0.0)
            slope = std::max(slope, std::abs(ext->frequency - min_it->frequency) / dx);
    }
    if (!(slope > 0.0))
        slope = 1.0;
    return FluxQubit(std::max(min_it->frequency, 1e-6), persistent_current_from_slope(slope), min_it->flux);
}

namespace detail {

inline double hyperbola(double delta, double slope, double sweet, double flux) {
    return std::hypot(delta, slope * (flux - sweet));
}

}  // namespace detail

/// Parameters of the result: delta (GHz), persistent current (nA), sweet spot (mPhi0).
inline FitResult fit_qubit_spectrum(const SpectrumPoints& data, const FluxQubit& init, const FitOptions& opt = {}) {
    const auto& pts = data.points();
    // Persistent current enters through the slope; fit in nA so all three parameters are O(1..100).
    auto residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(pts.size()));
        const double k = asymptotic_slope(p(1));
        for (std::size_t i = 0; i < pts.size(); ++i)
            r(static_cast<Eigen::Index>(i)) = detail::hyperbola(p(0), k, p(2), pts[i].flux) - pts[i].frequency;
        return r;
    };
    FitResult fit = least_squares(residuals, Eigen::Vector3d(init.delta(), init.persistent_current(), init.sweet_spot()),
                                  opt);
    fit.parameters[0] = std::abs(fit.parameters[0]);
    fit.parameters[1] = std::abs(fit.parameters[1]);
    return fit;
}

inline FitResult fit_qubit_spectrum(const SpectrumPoints& data, const FitOptions& opt = {}) {
    return fit_qubit_spectrum(data, initial_qubit_guess(data), opt);
}

inline FluxQubit qubit_from_fit(const FitResult& fit) {
    return FluxQubit(fit.parameters.at(0), fit.parameters.at(1), fit.parameters.at(2));
}

struct SpectralShift {
    double shift;        // uPhi0, positive when dataset b sits at higher flux
    double uncertainty;  // uPhi0
    FitResult joint;     // delta, Ip, sweet_a, sweet_b
    FitResult fit_a;
    FitResult fit_b;
};

/// Floor on the individual-fit residual when judging joint-fit mismatch, GHz per point.
inline constexpr double mismatch_floor_ghz = 1e-6;

inline SpectralShift extract_spectral_shift(const SpectrumPoints& a, const SpectrumPoints& b,
                                            const FitOptions& opt = {}) {
    SpectralShift out;
    out.fit_a = fit_qubit_spectrum(a, opt);
    out.fit_b = fit_qubit_spectrum(b, opt);

    const auto& pa = a.points();
    const auto& pb = b.points();
    auto residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(pa.size() + pb.size()));
        const double k = asymptotic_slope(p(1));
        Eigen::Index row = 0;
        for (const auto& pt : pa)
            r(row++) = detail::hyperbola(p(0), k, p(2), pt.flux) - pt.frequency;
        for (const auto& pt : pb)
            r(row++) = detail::hyperbola(p(0), k, p(3), pt.flux) - pt.frequency;
        return r;
    };
    Eigen::Vector4d init(0.5 * (out.fit_a.parameters[0] + out.fit_b.parameters[0]),
                         0.5 * (out.fit_a.parameters[1] + out.fit_b.parameters[1]), out.fit_a.parameters[2],
                         out.fit_b.parameters[2]);
    out.joint = least_squares(residuals, init, opt);

    const double separate = std::hypot(out.fit_a.residual_norm, out.fit_b.residual_norm);
    const double floor = mismatch_floor_ghz * std::sqrt(static_cast<double>(pa.size() + pb.size()));
    if (out.joint.residual_norm > 10.0 * std::max(separate, floor))
        throw ModelMismatchError("joint fit residual " + std::to_string(out.joint.residual_norm) +
                                 " GHz exceeds 10x the separate fits (" + std::to_string(separate) +
                                 " GHz): datasets do not share delta and persistent current");

    const auto& cov = out.joint.covariance;
    out.shift = (out.joint.parameters[3] - out.joint.parameters[2]) * 1e3;
    out.uncertainty = std::sqrt(std::max(0.0, cov(2, 2) + cov(3, 3) - 2.0 * cov(2, 3))) * 1e3;
    return out;
}

}  // namespace fqmag

#endif  // FQMAG_FITTING_HPP
