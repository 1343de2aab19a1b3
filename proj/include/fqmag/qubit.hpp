#ifndef FQMAG_QUBIT_HPP
#define FQMAG_QUBIT_HPP

// Flux qubit as a magnetometer: the hyperbolic dispersion f = sqrt(delta^2 + (k x)^2)
// with x the flux offset from the sweet spot, and the chain from a flux signal to
// spin count, spin density and iron mass fraction.

#include <fqmag/constants.hpp>
#include <fqmag/errors.hpp>

#include <cmath>
#include <string>

namespace fqmag {

/// Slope of the dispersion asymptotes, 2 Ip Phi0 / h, in GHz per mPhi0.
inline double asymptotic_slope(double persistent_current_na) {
    // nA * Wb / (J s) = Hz per Phi0; 1e-9 A/nA, 1e-3 Phi0/mPhi0, 1e-9 GHz/Hz.
    return 2.0 * persistent_current_na * 1e-9 * constants::flux_quantum / constants::planck * 1e-12;
}

/// Inverse of asymptotic_slope.
inline double persistent_current_from_slope(double slope_ghz_per_mphi0) {
    return slope_ghz_per_mphi0 / (2.0 * 1e-9 * constants::flux_quantum / constants::planck * 1e-12);
}

class FluxQubit {
public:
    FluxQubit(double delta_ghz, double persistent_current_na, double sweet_spot_mphi0)
        : delta_(delta_ghz), current_(persistent_current_na), sweet_spot_(sweet_spot_mphi0) {
        if (!(delta_ghz > 0.0) || !std::isfinite(delta_ghz))
            throw DomainError("tunnel splitting must be > 0 GHz");
        if (!(persistent_current_na > 0.0) || !std::isfinite(persistent_current_na))
            throw DomainError("persistent current must be > 0 nA");
        if (!std::isfinite(sweet_spot_mphi0))
            throw DomainError("sweet spot must be finite");
        slope_ = asymptotic_slope(current_);
    }

    double delta() const noexcept { return delta_; }
    double persistent_current() const noexcept { return current_; }
    double sweet_spot() const noexcept { return sweet_spot_; }
    /// k in GHz/mPhi0.
    double slope() const noexcept { return slope_; }

private:
    double delta_;
    double current_;
    double sweet_spot_;
    double slope_;
};

enum class Branch { lower = -1, upper = +1 };

inline double qubit_frequency(const FluxQubit& q, double flux_mphi0) {
    const double eps = q.slope() * (flux_mphi0 - q.sweet_spot());
    return std::hypot(q.delta(), eps);
}

/// df/dflux in GHz/mPhi0.
inline double qubit_slope(const FluxQubit& q, double flux_mphi0) {
    const double x = flux_mphi0 - q.sweet_spot();
    return q.slope() * q.slope() * x / qubit_frequency(q, flux_mphi0);
}

/// d2f/dflux2 in GHz/mPhi0^2.
inline double qubit_curvature(const FluxQubit& q, double flux_mphi0) {
    const double f = qubit_frequency(q, flux_mphi0);
    return q.slope() * q.slope() * q.delta() * q.delta() / (f * f * f);
}

inline double flux_from_frequency(const FluxQubit& q, double f_ghz, Branch branch) {
    if (!(f_ghz >= q.delta()))
        throw DomainError("frequency " + std::to_string(f_ghz) + " GHz below the tunnel splitting " +
                          std::to_string(q.delta()) + " GHz");
    // (f - delta)(f + delta) avoids cancellation near the vertex.
    const double offset = std::sqrt((f_ghz - q.delta()) * (f_ghz + q.delta())) / q.slope();
    return q.sweet_spot() + static_cast<int>(branch) * offset;
}

/// Flux change (uPhi0) producing a frequency change df (GHz) at a fixed operating flux,
/// to first order. Rejects operating points where the quadratic term exceeds 1 %.
inline double frequency_shift_to_flux_shift(const FluxQubit& q, double operating_flux_mphi0, double df_ghz) {
    const double slope = qubit_slope(q, operating_flux_mphi0);
    if (std::abs(slope) < 1e-12 * q.slope())
        throw DomainError("operating flux at the sweet spot: zero slope, flux shift undefined");
    const double dphi = df_ghz / slope;
    const double second_order = 0.5 * qubit_curvature(q, operating_flux_mphi0) * dphi * dphi;
    if (df_ghz != 0.0 && std::abs(second_order) > 0.01 * std::abs(df_ghz))
        throw PreconditionError("frequency shift too large for linear conversion: second-order term " +
                                std::to_string(std::abs(second_order / df_ghz) * 100.0) + " % of df");
    return dphi * 1e3;
}

class SensingGeometry {
public:
    SensingGeometry(double volume_um3, double coupling_per_spin_uphi0, double loop_length_um = 24.0,
                    double loop_width_um = 6.0)
        : volume_(volume_um3), coupling_(coupling_per_spin_uphi0), length_(loop_length_um), width_(loop_width_um) {
        if (!(volume_um3 > 0.0))
            throw DomainError("sensing volume must be > 0 um^3");
        if (!(coupling_per_spin_uphi0 > 0.0))
            throw DomainError("coupling per spin must be > 0 uPhi0");
        if (!(loop_length_um > 0.0) || !(loop_width_um > 0.0))
            throw DomainError("qubit loop dimensions must be > 0 um");
    }

    double volume() const noexcept { return volume_; }
    double coupling_per_spin() const noexcept { return coupling_; }
    double loop_length() const noexcept { return length_; }
    double loop_width() const noexcept { return width_; }

private:
    double volume_;    // um^3
    double coupling_;  // uPhi0 per fully polarized spin
    double length_;    // um
    double width_;     // um
};

struct SpinCountResult {
    double n_spins;
    double density;             // spins / mm^3
    double iron_mass_fraction;  // ug / g
};

inline constexpr double min_count_polarization = 0.01;

inline double flux_shift_to_spin_count(double signal_uphi0, double polarization, const SensingGeometry& geom) {
    if (!(polarization > min_count_polarization) || polarization > 1.0)
        throw PreconditionError("polarization " + std::to_string(polarization) +
                                " outside (0.01, 1]; spin count would be unreliable");
    return std::max(0.0, signal_uphi0 / (geom.coupling_per_spin() * polarization));
}

inline SpinCountResult density_and_mass(double n_spins, const SensingGeometry& geom, double cell_mass_density_g_cm3) {
    if (!(n_spins >= 0.0))
        throw DomainError("spin count must be >= 0");
    if (!(cell_mass_density_g_cm3 > 0.0))
        throw DomainError("cell mass density must be > 0 g/cm^3");
    // n / (V[um^3] / 1e9) rearranged so that exact decimal inputs stay exact.
    const double density = n_spins * constants::um3_per_mm3 / geom.volume();
    const double cell_g_per_mm3 = cell_mass_density_g_cm3 / constants::mm3_per_cm3;
    const double iron_g_per_g = density * constants::iron_atom_mass / cell_g_per_mm3;
    return {n_spins, density, iron_g_per_g * 1e6};
}

}  // namespace fqmag

#endif  // FQMAG_QUBIT_HPP
