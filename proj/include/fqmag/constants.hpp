#ifndef FQMAG_CONSTANTS_HPP
#define FQMAG_CONSTANTS_HPP

namespace fqmag::constants {

// Energies are frequencies (E/h), fields in mT, temperatures in mK.

/// Bohr magneton over Planck constant, GHz per mT.
inline constexpr double mu_b_over_h = 0.0139962449;
/// Boltzmann constant over Planck constant, GHz per mK.
inline constexpr double k_b_over_h = 0.0208366191;
/// Magnetic flux quantum h/2e, Wb.
inline constexpr double flux_quantum = 2.067833848e-15;
/// Planck constant, J s (exact SI).
inline constexpr double planck = 6.62607015e-34;
/// Mass of one iron atom (55.845 u), g.
inline constexpr double iron_atom_mass = 9.2733e-23;

inline constexpr double um3_per_mm3 = 1e9;
inline constexpr double mm3_per_cm3 = 1e3;
inline constexpr double mk_per_k = 1e3;

}  // namespace fqmag::constants

#endif  // FQMAG_CONSTANTS_HPP
