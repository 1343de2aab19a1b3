#ifndef FQMAG_THERMOMAG_HPP
#define FQMAG_THERMOMAG_HPP

// Thermal-equilibrium magnetization of a spin system and its powder average.
//
// The moment along the field is -dF/d|B| with F = -kT ln Z, taken by a five-point
// central stencil with step 0.01 mT. Polarization divides the powder-averaged moment
// by the powder-averaged T -> 0 moment (slope of the ground level) at the same field.

#include <fqmag/constants.hpp>
#include <fqmag/errors.hpp>
#include <fqmag/parallel.hpp>
#include <fqmag/quadrature.hpp>
#include <fqmag/spin.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace fqmag {

class ThermalEnsemble {
public:
    static constexpr double min_temperature_mk = 0.1;

    explicit ThermalEnsemble(double temperature_mk) : temperature_(temperature_mk) {
        if (!(temperature_mk >= min_temperature_mk) || !std::isfinite(temperature_mk))
            throw DomainError("temperature must be >= " + std::to_string(min_temperature_mk) + " mK, got " +
                              std::to_string(temperature_mk));
    }

    double temperature() const noexcept { return temperature_; }
    /// k_B T / h in GHz.
    double thermal_energy() const noexcept { return constants::k_b_over_h * temperature_; }

private:
    double temperature_;
};

/// Z with energies rebased to the ground level; lies in [1, number of levels].
inline double partition_function(const RVector& levels, const ThermalEnsemble& t) {
    const double e0 = levels.minCoeff();
    const double kt = t.thermal_energy();
    double z = 0.0;
    for (int i = 0; i < levels.size(); ++i)
        z += std::exp(-(levels(i) - e0) / kt);
    return z;
}

inline double partition_function(const EnergySpectrum& spec, const ThermalEnsemble& t) {
    return partition_function(spec.levels, t);
}

/// Helmholtz free energy F = -kT ln Z (GHz), using the first `count` levels (all when count <= 0).
inline double free_energy(const RVector& levels, double kt, int count = 0) {
    const int n = count > 0 ? std::min<int>(count, static_cast<int>(levels.size())) : static_cast<int>(levels.size());
    const double e0 = levels.head(n).minCoeff();
    double z = 0.0;
    for (int i = 0; i < n; ++i)
        z += std::exp(-(levels(i) - e0) / kt);
    return e0 - kt * std::log(z);
}

inline RVector populations(const RVector& levels, const ThermalEnsemble& t) {
    const double z = partition_function(levels, t);
    const double e0 = levels.minCoeff();
    RVector p(levels.size());
    for (int i = 0; i < levels.size(); ++i)
        p(i) = std::exp(-(levels(i) - e0) / t.thermal_energy()) / z;
    return p;
}

inline constexpr double moment_step_mt = 0.01;

namespace detail {

/// Field offsets of the five-point stencil, centre excluded: -2h, -h, +h, +2h.
inline constexpr std::array<double, 4> stencil_offsets{-2.0 * moment_step_mt, -moment_step_mt, moment_step_mt,
                                                       2.0 * moment_step_mt};

/// -d/dB of a function sampled at the stencil offsets, in mu_B units.
inline double stencil_moment(const std::array<double, 4>& f) {
    const double derivative = (8.0 * (f[2] - f[1]) - (f[3] - f[0])) / (12.0 * moment_step_mt);
    return -derivative / constants::mu_b_over_h;
}

inline void check_stencil_field(double b) {
    if (!(b > 2.0 * moment_step_mt))
        throw DomainError("field " + std::to_string(b) + " mT too small for the difference stencil (needs > " +
                          std::to_string(2.0 * moment_step_mt) + " mT)");
}

/// Eigenvalues at the four stencil fields around b along direction n.
inline std::array<RVector, 4> stencil_levels(const SpinSystem& sys, const SpinOperators& ops, double b,
                                             const Vec3& n) {
    const CMatrix h0 = zero_field_hamiltonian(sys, ops);
    const CMatrix zeeman = constants::mu_b_over_h * moment_operator(sys, ops, n);
    std::array<RVector, 4> out;
    for (std::size_t k = 0; k < 4; ++k)
        out[k] = eigenvalues(h0 + (b + stencil_offsets[k]) * zeeman);
    return out;
}

}  // namespace detail

/// Thermal moment along the field, in mu_B.
inline double moment_single(const SpinSystem& sys, const FieldVector& field, const ThermalEnsemble& t) {
    detail::check_stencil_field(field.magnitude());
    const auto lv = detail::stencil_levels(sys, make_spin_operators(sys.s()), field.magnitude(), field.direction());
    std::array<double, 4> f{};
    for (std::size_t k = 0; k < 4; ++k)
        f[k] = free_energy(lv[k], t.thermal_energy());
    return detail::stencil_moment(f);
}

/// Population-weighted level slopes, -sum_i p_i <i|n.g.S|i>; valid for nondegenerate spectra.
inline double moment_hellmann_feynman(const SpinSystem& sys, const FieldVector& field, const ThermalEnsemble& t) {
    const SpinOperators ops = make_spin_operators(sys.s());
    const EnergySpectrum spec = diagonalize(build_hamiltonian(sys, ops, field));
    const CMatrix m = moment_operator(sys, ops, field.direction());
    const RVector p = populations(spec.levels, t);
    double sum = 0.0;
    for (int i = 0; i < spec.size(); ++i)
        sum += p(i) * (spec.states.col(i).adjoint() * m * spec.states.col(i))(0, 0).real();
    return -sum;
}

struct MagnetizationPoint {
    double b_over_t;      // mT/mK
    double field;         // mT
    double temperature;   // mK
    double polarization;  // [0, 1]
    double moment;        // mu_B, powder averaged
};

/// Temperature-independent part of a powder sum: stencil eigenvalues for every grid node.
/// Evaluating the moment at many temperatures reuses the diagonalizations.
class PowderLevels {
public:
    /// `level_count` > 0 keeps only that many lowest levels (two for the doublet truncation).
    PowderLevels(const SpinSystem& sys, double b, const OrientationGrid& grid, int level_count = 0)
        : field_(b), weights_(grid.weights()), level_count_(level_count) {
        detail::check_stencil_field(b);
        const SpinOperators ops = make_spin_operators(sys.s());
        nodes_ = detail::ordered_map(grid.size(), [&](std::size_t i) {
            return detail::stencil_levels(sys, ops, b, grid.direction(i));
        });
        double sat = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            std::array<double, 4> e0{};
            for (std::size_t k = 0; k < 4; ++k)
                e0[k] = nodes_[i][k](0);
            sat += weights_[i] * detail::stencil_moment(e0);
        }
        saturation_ = sat;
    }

    double field() const noexcept { return field_; }
    /// Powder-averaged T -> 0 moment, mu_B.
    double saturation_moment() const noexcept { return saturation_; }

    double moment(const ThermalEnsemble& t) const {
        const double kt = t.thermal_energy();
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            std::array<double, 4> f{};
            for (std::size_t k = 0; k < 4; ++k)
                f[k] = free_energy(nodes_[i][k], kt, level_count_);
            sum += weights_[i] * detail::stencil_moment(f);
        }
        return sum;
    }

    double polarization(const ThermalEnsemble& t) const { return moment(t) / saturation_; }

    MagnetizationPoint point(const ThermalEnsemble& t) const {
        const double m = moment(t);
        return {field_ / t.temperature(), field_, t.temperature(), m / saturation_, m};
    }

private:
    double field_;
    std::vector<double> weights_;
    int level_count_;
    std::vector<std::array<RVector, 4>> nodes_;
    double saturation_ = 0.0;
};

inline MagnetizationPoint polarization_powder(const SpinSystem& sys, double b, const ThermalEnsemble& t,
                                              const OrientationGrid& grid) {
    return PowderLevels(sys, b, grid).point(t);
}

struct Condition {
    double field;        // mT
    double temperature;  // mK
};

class MagnetizationCurve {
public:
    MagnetizationCurve() = default;
    explicit MagnetizationCurve(std::vector<MagnetizationPoint> points) : points_(std::move(points)) {
        std::stable_sort(points_.begin(), points_.end(),
                         [](const auto& a, const auto& b) { return a.b_over_t < b.b_over_t; });
        std::vector<MagnetizationPoint> merged;
        std::size_t i = 0;
        while (i < points_.size()) {
            std::size_t j = i + 1;
            while (j < points_.size() &&
                   std::abs(points_[j].b_over_t - points_[i].b_over_t) <= 1e-12 * points_[i].b_over_t)
                ++j;
            MagnetizationPoint avg{points_[i].b_over_t, 0, 0, 0, 0};
            const double n = static_cast<double>(j - i);
            for (std::size_t k = i; k < j; ++k) {
                avg.field += points_[k].field / n;
                avg.temperature += points_[k].temperature / n;
                avg.polarization += points_[k].polarization / n;
                avg.moment += points_[k].moment / n;
            }
            merged.push_back(avg);
            i = j;
        }
        points_ = std::move(merged);
    }

    const std::vector<MagnetizationPoint>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }

private:
    std::vector<MagnetizationPoint> points_;
};

inline constexpr double curve_min_field_mt = 0.05;
inline constexpr double curve_max_field_mt = 50.0;
inline constexpr double curve_min_temperature_mk = 1.0;
inline constexpr double curve_max_temperature_mk = 10000.0;

inline MagnetizationCurve magnetization_curve(const SpinSystem& sys, const std::vector<Condition>& conditions,
                                              const OrientationGrid& grid) {
    for (const auto& c : conditions) {
        if (!(c.field >= curve_min_field_mt && c.field <= curve_max_field_mt) ||
            !(c.temperature >= curve_min_temperature_mk && c.temperature <= curve_max_temperature_mk))
            throw DomainError("condition (" + std::to_string(c.field) + " mT, " + std::to_string(c.temperature) +
                              " mK) outside [0.05, 50] mT x [1, 10000] mK");
    }
    // One set of diagonalizations per distinct field.
    std::vector<double> fields;
    for (const auto& c : conditions)
        fields.push_back(c.field);
    std::sort(fields.begin(), fields.end());
    fields.erase(std::unique(fields.begin(), fields.end()), fields.end());
    std::vector<PowderLevels> cache;
    cache.reserve(fields.size());
    for (double b : fields)
        cache.emplace_back(sys, b, grid);

    std::vector<MagnetizationPoint> points;
    points.reserve(conditions.size());
    for (const auto& c : conditions) {
        const auto it = std::lower_bound(fields.begin(), fields.end(), c.field);
        points.push_back(cache[static_cast<std::size_t>(it - fields.begin())].point(ThermalEnsemble(c.temperature)));
    }
    return MagnetizationCurve(std::move(points));
}

/// Keeps only the lowest Kramers doublet when the next level is far above both the
/// thermal energy and the doublet's own Zeeman span.
inline EnergySpectrum two_level_truncation(const EnergySpectrum& spec, const ThermalEnsemble& t, double b) {
    if (!(b >= 0.0))
        throw DomainError("field must be >= 0 mT");
    if (spec.size() < 3)
        throw DomainError("two-level truncation needs at least three levels");
    const double gap = spec.levels(2) - spec.levels(1);
    const double span = spec.levels(1) - spec.levels(0);
    const double kt = t.thermal_energy();
    if (!(gap >= 10.0 * std::max(kt, span)))
        throw TruncationInvalid(gap, kt, span);
    return {spec.levels.head(2), spec.states.leftCols(2)};
}

/// Powder polarization from the lowest doublet only; every node is checked for validity.
inline MagnetizationPoint polarization_powder_truncated(const SpinSystem& sys, double b, const ThermalEnsemble& t,
                                                        const OrientationGrid& grid) {
    const SpinOperators ops = make_spin_operators(sys.s());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const EnergySpectrum spec = diagonalize(build_hamiltonian(sys, ops, FieldVector(b, grid.direction(i))));
        two_level_truncation(spec, t, b);
    }
    return PowderLevels(sys, b, grid, 2).point(t);
}

}  // namespace fqmag

#endif  // FQMAG_THERMOMAG_HPP
