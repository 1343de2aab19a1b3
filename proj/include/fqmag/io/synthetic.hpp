#ifndef FQMAG_IO_SYNTHETIC_HPP
#define FQMAG_IO_SYNTHETIC_HPP

// Model-generated datasets for demonstrations and end-to-end checks.

#include <fqmag/errors.hpp>
#include <fqmag/fitting.hpp>
#include <fqmag/qubit.hpp>
#include <fqmag/thermometry.hpp>

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace fqmag::io {

struct SaturationPlan {
    std::vector<double> fields;                   // mT
    std::vector<double> plate_temperatures;       // mK
    std::vector<double> saturation_temperatures;  // mK, one per field
    double scale = 9.0;                           // uPhi0 per unit polarization, after control subtraction
    double control_fraction = 0.05;               // control signal as a fraction of the raw sample signal
};

inline SaturationPlan default_saturation_plan() {
    return {{2.5, 5.0, 7.5, 10.0, 12.5}, {200.0, 100.0, 50.0, 25.0, 12.5}, {40.0, 52.5, 65.0, 77.5, 90.0}};
}

/// Sample and control records for spins that cool with the plate down to a
/// field-dependent floor. Sample minus control equals scale * P(B, T_spin).
inline std::vector<MeasurementRecord> synthetic_measurements(const PowderModel& model, const SaturationPlan& plan) {
    if (plan.fields.size() != plan.saturation_temperatures.size())
        throw DomainError("one saturation temperature per field is required");
    if (!(plan.control_fraction >= 0.0 && plan.control_fraction < 1.0))
        throw DomainError("control fraction must lie in [0, 1)");
    std::vector<MeasurementRecord> out;
    for (std::size_t k = 0; k < plan.fields.size(); ++k) {
        const double b = plan.fields[k];
        for (double t : plan.plate_temperatures) {
            const double spin_t = std::max(t, plan.saturation_temperatures[k]);
            const double corrected = plan.scale * model.polarization(b, spin_t);
            const double sample = corrected / (1.0 - plan.control_fraction);
            out.push_back({t, b, sample, Channel::sample});
            out.push_back({t, b, sample - corrected, Channel::control});
        }
    }
    return out;
}

/// Qubit peak positions on a uniform flux grid with optional relative Gaussian noise.
inline SpectrumPoints synthetic_spectrum(const FluxQubit& q, double flux_min, double flux_max, int points,
                                         double relative_noise, std::uint64_t seed) {
    if (points < 4)
        throw DomainError("synthetic spectrum needs at least 4 points");
    if (!(flux_max > flux_min))
        throw DomainError("flux window must satisfy min < max");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<SpectrumPoint> pts;
    for (int i = 0; i < points; ++i) {
        const double x = flux_min + (flux_max - flux_min) * i / (points - 1);
        double f = qubit_frequency(q, x);
        if (relative_noise > 0.0)
            f *= 1.0 + relative_noise * noise(rng);
        pts.push_back({x, f});
    }
    return SpectrumPoints(std::move(pts));
}

}  // namespace fqmag::io

#endif  // FQMAG_IO_SYNTHETIC_HPP
