#ifndef FQMAG_ESR_HPP
#define FQMAG_ESR_HPP

// Field-swept powder ESR: resonance search by grid scan plus bisection, magnetic-dipole
// intensities with Boltzmann population differences, Gaussian broadening, and the
// field-modulated (first-derivative) display.

#include <fqmag/constants.hpp>
#include <fqmag/errors.hpp>
#include <fqmag/parallel.hpp>
#include <fqmag/quadrature.hpp>
#include <fqmag/spin.hpp>
#include <fqmag/thermomag.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace fqmag {

struct EsrConfig {
    double mw_frequency = 9.4;     // GHz
    double field_start = 0.0;      // mT
    double field_stop = 500.0;     // mT
    double field_step = 0.5;       // mT
    double scan_step = 1.0;        // mT, bracket scan for resonance search
    double linewidth_fwhm = 5.0;   // mT
    double temperature = 10.0;     // K
    OrientationGrid grid = make_orientation_grid(32, 64);

    void validate() const {
        if (!(mw_frequency > 0.0))
            throw DomainError("microwave frequency must be > 0 GHz");
        if (!(field_step > 0.0))
            throw DomainError("field step must be > 0 mT");
        if (!(scan_step > 0.0))
            throw DomainError("scan step must be > 0 mT");
        if (!(field_start >= 0.0) || !(field_start < field_stop))
            throw DomainError("field window must satisfy 0 <= start < stop");
        if ((field_stop - field_start) / field_step < 50.0)
            throw DomainError("field window must span at least 50 steps");
        if (!(linewidth_fwhm > 0.0))
            throw DomainError("linewidth must be > 0 mT");
        if (!(temperature > 0.0))
            throw DomainError("temperature must be > 0 K");
    }

    std::vector<double> field_grid() const { return uniform_grid(field_step); }

    /// Bracketing grid for the resonance search; always ends exactly at field_stop.
    std::vector<double> scan_grid() const {
        std::vector<double> grid = uniform_grid(std::min(scan_step, field_stop - field_start));
        if (grid.back() < field_stop)
            grid.push_back(field_stop);
        return grid;
    }

private:
    std::vector<double> uniform_grid(double step) const {
        const auto n = static_cast<std::size_t>(std::floor((field_stop - field_start) / step + 1e-9)) + 1;
        std::vector<double> grid(n);
        for (std::size_t k = 0; k < n; ++k)
            grid[k] = field_start + static_cast<double>(k) * step;
        return grid;
    }
};

struct Species {
    SpinSystem system;
    double weight;
};

using SpeciesMix = std::vector<Species>;

struct Transition {
    std::size_t orientation_index;
    int lower;
    int upper;
    double resonance_field;  // mT
    double intensity;        // arbitrary units
};

struct EsrSpectrum {
    std::vector<double> field;
    std::vector<double> absorption;
    std::vector<double> derivative;
};

inline double g_prime_of_field(double field_mt, double mw_frequency_ghz) {
    if (!(field_mt > 0.0))
        throw DomainError("field must be > 0 mT to define g'");
    return mw_frequency_ghz / (field_mt * constants::mu_b_over_h);
}

inline double field_of_g_prime(double g_prime, double mw_frequency_ghz) {
    if (!(g_prime > 0.0))
        throw DomainError("g' must be > 0");
    return mw_frequency_ghz / (g_prime * constants::mu_b_over_h);
}

inline constexpr double resonance_bracket_mt = 1e-3;
inline constexpr double resonance_residual_ghz = 1e-10;

namespace detail {

/// Two orthonormal vectors perpendicular to n.
inline std::pair<Vec3, Vec3> perpendicular_pair(const Vec3& n) {
    const Vec3 seed = std::abs(n.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    const Vec3 u = n.cross(seed).normalized();
    return {u, n.cross(u)};
}

}  // namespace detail

/// Microwave transition probability between eigenstates i < j for a field along
/// `field_direction`, averaged over two orthogonal microwave polarizations.
inline double transition_intensity(const SpinSystem& sys, const SpinOperators& ops, const EnergySpectrum& spec,
                                   int i, int j, const Vec3& field_direction, double temperature_k) {
    if (!(i < j) || i < 0 || j >= spec.size())
        throw DomainError("transition needs level indices 0 <= i < j < dimension");
    const RVector p = populations(spec.levels, ThermalEnsemble(temperature_k * constants::mk_per_k));
    const auto [u, v] = detail::perpendicular_pair(field_direction);
    double sum = 0.0;
    for (const Vec3& probe : {u, v}) {
        const Complex amp = (spec.states.col(j).adjoint() * moment_operator(sys, ops, probe) * spec.states.col(i))(0, 0);
        sum += std::norm(amp);
    }
    return std::max(0.0, 0.5 * sum * (p(i) - p(j)));
}

inline double transition_intensity(const SpinSystem& sys, const EnergySpectrum& spec, int i, int j,
                                   const Vec3& field_direction, double temperature_k) {
    return transition_intensity(sys, make_spin_operators(sys.s()), spec, i, j, field_direction, temperature_k);
}

/// Every resonance of every level pair inside the configured field window for one orientation.
inline std::vector<Transition> find_resonances(const SpinSystem& sys, const Orientation& orientation,
                                               const EsrConfig& cfg, std::size_t orientation_index = 0) {
    cfg.validate();
    const SpinOperators ops = make_spin_operators(sys.s());
    const Vec3 n = unit_vector(orientation.polar, orientation.azimuth);
    const CMatrix h0 = zero_field_hamiltonian(sys, ops);
    const CMatrix zeeman = constants::mu_b_over_h * moment_operator(sys, ops, n);
    const double nu = cfg.mw_frequency;
    const int dim = sys.dimension();

    const std::vector<double> fields = cfg.scan_grid();
    std::vector<RVector> levels(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k)
        levels[k] = eigenvalues(h0 + fields[k] * zeeman);

    std::vector<Transition> found;
    for (int i = 0; i < dim; ++i) {
        for (int j = i + 1; j < dim; ++j) {
            auto mismatch = [&](double b) {
                const RVector lv = eigenvalues(h0 + b * zeeman);
                return lv(j) - lv(i) - nu;
            };
            for (std::size_t k = 0; k + 1 < fields.size(); ++k) {
                double lo = fields[k], hi = fields[k + 1];
                double m_lo = levels[k](j) - levels[k](i) - nu;
                double m_hi = levels[k + 1](j) - levels[k + 1](i) - nu;
                if ((m_lo < 0.0) == (m_hi < 0.0))
                    continue;
                // Bisect to 1e-3 mT, then polish by regula falsi inside the bracket
                // so that the energy mismatch itself is negligible.
                while (hi - lo > resonance_bracket_mt) {
                    const double mid = 0.5 * (lo + hi);
                    const double m = mismatch(mid);
                    if ((m < 0.0) == (m_lo < 0.0)) {
                        lo = mid;
                        m_lo = m;
                    } else {
                        hi = mid;
                        m_hi = m;
                    }
                }
                double root = 0.5 * (lo + hi);
                for (int iter = 0; iter < 60; ++iter) {
                    root = m_hi != m_lo ? lo - m_lo * (hi - lo) / (m_hi - m_lo) : 0.5 * (lo + hi);
                    if (!(root > lo && root < hi))
                        root = 0.5 * (lo + hi);
                    const double m = mismatch(root);
                    if (std::abs(m) <= resonance_residual_ghz || hi - lo <= 1e-12)
                        break;
                    if ((m < 0.0) == (m_lo < 0.0)) {
                        lo = root;
                        m_lo = m;
                    } else {
                        hi = root;
                        m_hi = m;
                    }
                }
                const EnergySpectrum spec = diagonalize(h0 + root * zeeman);
                found.push_back({orientation_index, i, j, root,
                                 transition_intensity(sys, ops, spec, i, j, n, cfg.temperature)});
            }
        }
    }
    double strongest = 0.0;
    for (const auto& t : found)
        strongest = std::max(strongest, t.intensity);
    std::erase_if(found, [&](const Transition& t) { return t.intensity < 1e-9 * strongest || t.intensity <= 0.0; });
    return found;
}

/// Centered first difference on the field grid, one-sided at the ends.
inline std::vector<double> field_derivative(const std::vector<double>& field, const std::vector<double>& y) {
    const std::size_t n = y.size();
    std::vector<double> d(n, 0.0);
    if (n < 2)
        return d;
    d[0] = (y[1] - y[0]) / (field[1] - field[0]);
    d[n - 1] = (y[n - 1] - y[n - 2]) / (field[n - 1] - field[n - 2]);
    for (std::size_t k = 1; k + 1 < n; ++k)
        d[k] = (y[k + 1] - y[k - 1]) / (field[k + 1] - field[k - 1]);
    return d;
}

inline EsrSpectrum powder_spectrum(const SpeciesMix& mix, const EsrConfig& cfg) {
    cfg.validate();
    bool any = false;
    for (const auto& sp : mix) {
        if (!(sp.weight >= 0.0))
            throw DomainError("species weights must be >= 0");
        any = any || sp.weight > 0.0;
    }
    if (!any)
        throw DomainError("species mix needs at least one species with positive weight");

    EsrSpectrum out;
    out.field = cfg.field_grid();
    out.absorption.assign(out.field.size(), 0.0);
    const double sigma = cfg.linewidth_fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
    const double reach = 8.0 * sigma;

    for (const auto& sp : mix) {
        if (sp.weight == 0.0)
            continue;
        const auto per_node = detail::ordered_map(cfg.grid.size(), [&](std::size_t i) {
            return find_resonances(sp.system, cfg.grid.nodes()[i], cfg, i);
        });
        for (std::size_t i = 0; i < per_node.size(); ++i) {
            const double w = sp.weight * cfg.grid.weights()[i];
            for (const auto& t : per_node[i]) {
                const double amp = w * t.intensity * norm;
                for (std::size_t k = 0; k < out.field.size(); ++k) {
                    const double x = out.field[k] - t.resonance_field;
                    if (std::abs(x) > reach)
                        continue;
                    out.absorption[k] += amp * std::exp(-0.5 * x * x / (sigma * sigma));
                }
            }
        }
    }
    out.derivative = field_derivative(out.field, out.absorption);
    return out;
}

/// Indices of local extrema of a sampled curve (strict sign change of the slope).
inline std::vector<std::size_t> local_extrema(const std::vector<double>& y) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 1; k + 1 < y.size(); ++k) {
        const double left = y[k] - y[k - 1];
        const double right = y[k + 1] - y[k];
        if ((left > 0.0 && right <= 0.0) || (left < 0.0 && right >= 0.0))
            idx.push_back(k);
    }
    return idx;
}

}  // namespace fqmag

#endif  // FQMAG_ESR_HPP
