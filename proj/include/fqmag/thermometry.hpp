#ifndef FQMAG_THERMOMETRY_HPP
#define FQMAG_THERMOMETRY_HPP

// Effective spin temperature from magnetization signals. The signal scale is fixed by
// assuming spin and plate temperatures agree at a reference temperature; every other
// record is then inverted through the powder polarization model.

#include <fqmag/errors.hpp>
#include <fqmag/quadrature.hpp>
#include <fqmag/spin.hpp>
#include <fqmag/thermomag.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fqmag {

enum class Channel { sample, control };

struct MeasurementRecord {
    double plate_temperature;  // mK
    double field;              // mT, in-plane
    double flux_shift;         // uPhi0
    Channel channel = Channel::sample;
};

struct SpinTemperatureResult {
    double plate_temperature;  // mK
    double spin_temperature;   // mK
    double field;              // mT
    double scale_factor_used;  // uPhi0 per unit polarization
};

inline constexpr double inversion_min_mk = 1.0;
inline constexpr double inversion_max_mk = 10000.0;
inline constexpr double inversion_tolerance_mk = 0.01;
inline constexpr double anchor_tolerance = 0.01;

/// Powder polarization at arbitrary (field, temperature), diagonalizing once per field.
/// Not shared between threads.
class PowderModel {
public:
    PowderModel(SpinSystem sys, OrientationGrid grid) : sys_(std::move(sys)), grid_(std::move(grid)) {}

    const PowderLevels& at(double field) const {
        auto it = cache_.find(field);
        if (it == cache_.end())
            it = cache_.emplace(field, PowderLevels(sys_, field, grid_)).first;
        return it->second;
    }

    double polarization(double field, double temperature_mk) const {
        return at(field).polarization(ThermalEnsemble(temperature_mk));
    }

    const SpinSystem& system() const noexcept { return sys_; }
    const OrientationGrid& grid() const noexcept { return grid_; }

private:
    SpinSystem sys_;
    OrientationGrid grid_;
    mutable std::map<double, PowderLevels> cache_;
};

inline double calibrate_scale(const std::vector<MeasurementRecord>& records, const PowderModel& model,
                              double t_ref_mk) {
    double sum = 0.0;
    int count = 0;
    for (const auto& r : records) {
        if (std::abs(r.plate_temperature - t_ref_mk) > anchor_tolerance * t_ref_mk)
            continue;
        sum += r.flux_shift / model.polarization(r.field, t_ref_mk);
        ++count;
    }
    if (count == 0)
        throw CalibrationError("no record within 1% of the reference temperature " + std::to_string(t_ref_mk) +
                               " mK");
    return sum / count;
}

inline double calibrate_scale(const std::vector<MeasurementRecord>& records, const SpinSystem& sys,
                              const OrientationGrid& grid, double t_ref_mk) {
    return calibrate_scale(records, PowderModel(sys, grid), t_ref_mk);
}

/// Temperature at which the powder model reproduces `observed` polarization at this field.
inline double invert_spin_temperature(const PowderLevels& levels, double observed) {
    const double upper = levels.polarization(ThermalEnsemble(inversion_min_mk));
    const double lower = levels.polarization(ThermalEnsemble(inversion_max_mk));
    if (!(observed > lower && observed < upper))
        throw OutOfRangeError("polarization " + std::to_string(observed) + " at " + std::to_string(levels.field()) +
                                  " mT outside the attainable range (" + std::to_string(lower) + ", " +
                                  std::to_string(upper) + ")",
                              lower, upper);
    // Polarization decreases with temperature; bisect on a log scale.
    double lo = inversion_min_mk, hi = inversion_max_mk;
    while (hi - lo > std::min(inversion_tolerance_mk, 1e-9 * lo)) {
        const double mid = std::sqrt(lo * hi);
        if (mid <= lo || mid >= hi)
            break;
        if (levels.polarization(ThermalEnsemble(mid)) > observed)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline double invert_spin_temperature(const SpinSystem& sys, const OrientationGrid& grid, double field,
                                      double observed) {
    return invert_spin_temperature(PowderLevels(sys, field, grid), observed);
}

struct SeriesEntry {
    std::size_t record_index;
    std::optional<SpinTemperatureResult> result;
    std::string error;  // set when result is empty
};

struct SpinTemperatureSeries {
    double scale = 0.0;  // alpha, uPhi0 per unit polarization
    std::vector<SeriesEntry> entries;
};

inline SpinTemperatureSeries spin_temperature_series(const std::vector<MeasurementRecord>& records,
                                                     const PowderModel& model, double t_ref_mk) {
    SpinTemperatureSeries out;
    if (records.empty())
        return out;
    out.scale = calibrate_scale(records, model, t_ref_mk);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        SeriesEntry entry{i, std::nullopt, {}};
        try {
            if (!(out.scale > 0.0))
                throw CalibrationError("calibrated scale " + std::to_string(out.scale) + " is not positive");
            const double t = invert_spin_temperature(model.at(r.field), r.flux_shift / out.scale);
            entry.result = SpinTemperatureResult{r.plate_temperature, t, r.field, out.scale};
        } catch (const Error& e) {
            entry.error = e.what();
        }
        out.entries.push_back(std::move(entry));
    }
    return out;
}

inline SpinTemperatureSeries spin_temperature_series(const std::vector<MeasurementRecord>& records,
                                                     const SpinSystem& sys, const OrientationGrid& grid,
                                                     double t_ref_mk) {
    return spin_temperature_series(records, PowderModel(sys, grid), t_ref_mk);
}

}  // namespace fqmag

#endif  // FQMAG_THERMOMETRY_HPP
