#ifndef FQMAG_SPIN_HPP
#define FQMAG_SPIN_HPP

// Spin operators, the second-order spin Hamiltonian
//
//   H = mu_B B.g.S + D Sz^2 + E (Sx^2 - Sy^2)
//
// and its dense diagonalization. All energies are E/h in GHz.

#include <fqmag/constants.hpp>
#include <fqmag/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>

namespace fqmag {

inline constexpr int max_spin_dimension = 8;

using Complex = std::complex<double>;
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                              max_spin_dimension, max_spin_dimension>;
using RVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, max_spin_dimension, 1>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Proper rotation from z-y-z Euler angles (rad).
inline Mat3 rotation_zyz(double alpha, double beta, double gamma) {
    using Eigen::AngleAxisd;
    return (AngleAxisd(alpha, Vec3::UnitZ()) * AngleAxisd(beta, Vec3::UnitY()) *
            AngleAxisd(gamma, Vec3::UnitZ()))
        .toRotationMatrix();
}

/// Inverse of rotation_zyz; beta in [0, pi].
inline std::array<double, 3> euler_zyz(const Mat3& r) {
    const double beta = std::acos(std::clamp(r(2, 2), -1.0, 1.0));
    if (std::abs(std::sin(beta)) < 1e-12) {
        // Gimbal lock: only alpha +/- gamma is defined.
        const double alpha = std::atan2(r(1, 0), r(0, 0));
        return {r(2, 2) > 0 ? alpha : -alpha, beta, 0.0};
    }
    return {std::atan2(r(1, 2), r(0, 2)), beta, std::atan2(r(2, 1), -r(2, 0))};
}

/// Unit vector from polar angle and azimuth (rad).
inline Vec3 unit_vector(double polar, double azimuth) {
    return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)};
}

/// Spin quantum number, g tensor and zero-field splitting of one paramagnetic species.
class SpinSystem {
public:
    SpinSystem(double s, std::array<double, 3> g_principal, std::array<double, 3> g_orientation, double d,
               double e)
        : g_principal_(g_principal), g_orientation_(g_orientation), d_(d), e_(e) {
        const double twice = 2.0 * s;
        if (!std::isfinite(s) || std::abs(twice - std::round(twice)) > 1e-12 || std::round(twice) < 1.0)
            throw DomainError("spin quantum number must be a positive multiple of 1/2, got " + std::to_string(s));
        two_s_ = static_cast<int>(std::round(twice));
        if (two_s_ + 1 > max_spin_dimension)
            throw DomainError("spin " + std::to_string(s) + " exceeds the supported dimension " +
                              std::to_string(max_spin_dimension));
        for (double g : g_principal_)
            if (!(g > 0.0) || !std::isfinite(g))
                throw DomainError("g principal values must be positive");
        if (!std::isfinite(d) || !std::isfinite(e))
            throw DomainError("zero-field splitting parameters must be finite");
        g_tensor_ = rotation_zyz(g_orientation_[0], g_orientation_[1], g_orientation_[2]) *
                    Vec3(g_principal_[0], g_principal_[1], g_principal_[2]).asDiagonal() *
                    rotation_zyz(g_orientation_[0], g_orientation_[1], g_orientation_[2]).transpose();
    }

    /// Isotropic g, no g-frame rotation.
    static SpinSystem isotropic(double s, double g, double d = 0.0, double e = 0.0) {
        return SpinSystem(s, {g, g, g}, {0.0, 0.0, 0.0}, d, e);
    }

    double s() const noexcept { return 0.5 * two_s_; }
    int two_s() const noexcept { return two_s_; }
    int dimension() const noexcept { return two_s_ + 1; }
    bool half_integer() const noexcept { return two_s_ % 2 == 1; }
    const std::array<double, 3>& g_principal() const noexcept { return g_principal_; }
    const std::array<double, 3>& g_orientation() const noexcept { return g_orientation_; }
    double d() const noexcept { return d_; }
    double e() const noexcept { return e_; }

    /// g tensor expressed in the zero-field-splitting frame.
    const Mat3& g_tensor() const noexcept { return g_tensor_; }

    /// Set when |E| > |D|/3, i.e. outside the conventional parameter domain.
    std::optional<std::string> diagnostic() const {
        if (std::abs(e_) > std::abs(d_) / 3.0 * (1.0 + 1e-12))
            return "|E| = " + std::to_string(std::abs(e_)) + " GHz exceeds |D|/3 = " +
                   std::to_string(std::abs(d_) / 3.0) + " GHz (non-conventional frame)";
        return std::nullopt;
    }

private:
    int two_s_ = 1;
    std::array<double, 3> g_principal_;
    std::array<double, 3> g_orientation_;
    double d_;
    double e_;
    Mat3 g_tensor_;
};

struct SpinOperators {
    CMatrix sx;
    CMatrix sy;
    CMatrix sz;
};

/// Magnetic field: magnitude (mT) and unit direction in the zero-field-splitting frame.
class FieldVector {
public:
    FieldVector(double magnitude_mt, const Vec3& direction) : magnitude_(magnitude_mt), direction_(direction) {
        if (!(magnitude_mt >= 0.0) || !std::isfinite(magnitude_mt))
            throw DomainError("field magnitude must be finite and >= 0 mT");
        if (std::abs(direction.norm() - 1.0) > 1e-12)
            throw DomainError("field direction must be a unit vector");
    }

    static FieldVector along(double magnitude_mt, double polar, double azimuth) {
        return {magnitude_mt, unit_vector(polar, azimuth)};
    }

    double magnitude() const noexcept { return magnitude_; }
    const Vec3& direction() const noexcept { return direction_; }
    Vec3 components() const { return magnitude_ * direction_; }

private:
    double magnitude_;
    Vec3 direction_;
};

/// Eigenvalues (GHz, ascending) and eigenvectors (columns) of a spin Hamiltonian.
struct EnergySpectrum {
    RVector levels;
    CMatrix states;

    int size() const noexcept { return static_cast<int>(levels.size()); }
};

/// Standard ladder-operator construction in the |s, m> basis, m = s, s-1, ..., -s.
inline SpinOperators make_spin_operators(double s) {
    const double twice = 2.0 * s;
    if (!std::isfinite(s) || std::abs(twice - std::round(twice)) > 1e-12 || std::round(twice) < 1.0)
        throw DomainError("spin quantum number must be a positive multiple of 1/2, got " + std::to_string(s));
    const int dim = static_cast<int>(std::round(twice)) + 1;
    if (dim > max_spin_dimension)
        throw DomainError("spin dimension " + std::to_string(dim) + " not supported");
    s = 0.5 * (dim - 1);

    SpinOperators ops{CMatrix::Zero(dim, dim), CMatrix::Zero(dim, dim), CMatrix::Zero(dim, dim)};
    for (int k = 0; k < dim; ++k) {
        const double m = s - k;
        ops.sz(k, k) = m;
        if (k + 1 < dim) {
            // <m|S+|m-1> = sqrt(s(s+1) - m(m-1))
            const double ladder = std::sqrt(s * (s + 1.0) - m * (m - 1.0));
            ops.sx(k, k + 1) = 0.5 * ladder;
            ops.sx(k + 1, k) = 0.5 * ladder;
            ops.sy(k, k + 1) = Complex(0.0, -0.5 * ladder);
            ops.sy(k + 1, k) = Complex(0.0, 0.5 * ladder);
        }
    }
    return ops;
}

/// Zero-field part D Sz^2 + E (Sx^2 - Sy^2).
inline CMatrix zero_field_hamiltonian(const SpinSystem& sys, const SpinOperators& ops) {
    return sys.d() * (ops.sz * ops.sz) + sys.e() * (ops.sx * ops.sx - ops.sy * ops.sy);
}

/// Operator n.g.S for a unit vector n; mu_B times this is dH/d|B| along n.
inline CMatrix moment_operator(const SpinSystem& sys, const SpinOperators& ops, const Vec3& n) {
    const Vec3 w = sys.g_tensor().transpose() * n;
    return w.x() * ops.sx + w.y() * ops.sy + w.z() * ops.sz;
}

inline CMatrix build_hamiltonian(const SpinSystem& sys, const SpinOperators& ops, const FieldVector& field) {
    return zero_field_hamiltonian(sys, ops) +
           (constants::mu_b_over_h * field.magnitude()) * moment_operator(sys, ops, field.direction());
}

inline CMatrix build_hamiltonian(const SpinSystem& sys, const FieldVector& field) {
    return build_hamiltonian(sys, make_spin_operators(sys.s()), field);
}

inline double hermiticity_defect(const CMatrix& h) { return (h - h.adjoint()).cwiseAbs().maxCoeff(); }

inline EnergySpectrum diagonalize(const CMatrix& h, double hermitian_tol = 1e-10) {
    if (h.rows() != h.cols() || h.rows() == 0)
        throw DomainError("Hamiltonian must be a non-empty square matrix");
    if (const double defect = hermiticity_defect(h); !(defect <= hermitian_tol))
        throw DomainError("matrix is not Hermitian (max |H - H^dagger| = " + std::to_string(defect) + ")");
    // Only the lower triangle is read; symmetrize so both halves contribute equally.
    const CMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("Hermitian eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Eigenvalues only; the hot path of powder sums.
inline RVector eigenvalues(const CMatrix& h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("Hermitian eigensolver did not converge");
    return solver.eigenvalues();
}

/// Largest ||H v - E v|| over all eigenpairs.
inline double max_residual(const CMatrix& h, const EnergySpectrum& spec) {
    double worst = 0.0;
    for (int k = 0; k < spec.size(); ++k)
        worst = std::max(worst, (h * spec.states.col(k) - spec.levels(k) * spec.states.col(k)).norm());
    return worst;
}

/// Effective g' of Kramers doublet `doublet_index` (0 = lowest) for a small field along `direction`.
inline double effective_g(const SpinSystem& sys, int doublet_index, const Vec3& direction) {
    if (!sys.half_integer())
        throw DomainError("effective g' requires a half-integer spin");
    if (doublet_index < 0 || 2 * doublet_index + 1 >= sys.dimension())
        throw DomainError("doublet index " + std::to_string(doublet_index) + " out of range");
    const SpinOperators ops = make_spin_operators(sys.s());
    auto splitting = [&](double b) {
        const RVector lv = eigenvalues(build_hamiltonian(sys, ops, FieldVector(b, direction)));
        return lv(2 * doublet_index + 1) - lv(2 * doublet_index);
    };
    const double half = splitting(0.5);
    const double full = splitting(1.0);
    // g' = 0 along nodal directions; both splittings vanish there.
    if (full < 1e-12 && half < 1e-12)
        return 0.0;
    const double ratio = half / full;
    if (std::abs(ratio - 0.5) > 0.005)
        throw PreconditionError("doublet splitting not linear in field: " + std::to_string(half) +
                                " GHz at 0.5 mT vs " + std::to_string(full) + " GHz at 1 mT");
    return full / constants::mu_b_over_h;
}

}  // namespace fqmag

#endif  // FQMAG_SPIN_HPP
