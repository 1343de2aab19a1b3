#ifndef FQMAG_IO_ANALYSIS_HPP
#define FQMAG_IO_ANALYSIS_HPP

#include <fqmag/errors.hpp>
#include <fqmag/io/config.hpp>
#include <fqmag/io/csv.hpp>
#include <fqmag/qubit.hpp>
#include <fqmag/thermometry.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace fqmag::io {

/// An error from one pipeline stage, prefixed with the stage name. Keeps the kind of the cause.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& cause)
        : Error(cause.kind(), stage + ": " + cause.what()), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

namespace detail {

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e);
    }
}

}  // namespace detail

struct RecordResult {
    MeasurementRecord record;  // control-subtracted
    bool control_matched = false;
    std::optional<double> spin_temperature;  // mK
    std::string error;
};

struct AnalysisReport {
    std::string source;
    double t_ref = 0.0;  // mK
    double scale = 0.0;  // uPhi0 per unit polarization
    int anchor_records = 0;
    std::size_t sample_records = 0;
    std::size_t control_records = 0;
    std::vector<RecordResult> records;
    std::size_t count_record = 0;     // index into records
    double count_polarization = 0.0;
    std::string count_polarization_source;
    SpinCountResult spins{};
    double volume = 0.0;             // um^3
    double coupling_per_spin = 0.0;  // uPhi0
    double cell_mass_density = 0.0;  // g/cm^3
    std::vector<std::string> warnings;
    std::vector<ProvenanceEntry> provenance;
};

inline AnalysisReport run_analysis(const ConfigDocument& config, const std::vector<MeasurementRecord>& measurements,
                                   std::string source = "measurements") {
    AnalysisReport rep;
    rep.source = std::move(source);
    rep.provenance = config.provenance();
    rep.t_ref = config.get("analysis", "t_ref");
    const double in_plane_limit = config.get("analysis", "in_plane_limit");

    const auto [sys, grid, geom] = detail::staged("configuration", [&] {
        return std::make_tuple(spin_system_from(config), grid_from(config), geometry_from(config));
    });
    rep.volume = geom.volume();
    rep.coupling_per_spin = geom.coupling_per_spin();
    rep.cell_mass_density = config.get("geometry", "cell_mass_density");

    for (const auto& m : measurements)
        ++(m.channel == Channel::sample ? rep.sample_records : rep.control_records);
    if (rep.sample_records == 0)
        throw StageError("input", DomainError("no sample-channel records"));

    const auto corrected = subtract_control(measurements);
    rep.warnings = corrected.warnings;
    for (std::size_t i = 0; i < corrected.records.size(); ++i) {
        const auto& r = corrected.records[i];
        if (r.field > in_plane_limit)
            rep.warnings.push_back("sample record " + std::to_string(i + 1) + ": field " + format_value(r.field) +
                                   " mT exceeds the in-plane limit of " + format_value(in_plane_limit) + " mT");
        rep.records.push_back({r, corrected.matched[i], std::nullopt, {}});
    }

    const PowderModel model(sys, grid);
    for (const auto& r : corrected.records)
        if (std::abs(r.plate_temperature - rep.t_ref) <= anchor_tolerance * rep.t_ref)
            ++rep.anchor_records;
    const auto series =
        detail::staged("calibration", [&] { return spin_temperature_series(corrected.records, model, rep.t_ref); });
    rep.scale = series.scale;
    for (const auto& e : series.entries) {
        auto& out = rep.records[e.record_index];
        if (e.result)
            out.spin_temperature = e.result->spin_temperature;
        else
            out.error = e.error;
    }

    detail::staged("spin count", [&] {
        // Observed polarization of each inverted record is signal / scale; the largest wins.
        std::optional<std::size_t> best;
        double best_p = -std::numeric_limits<double>::infinity();
        if (rep.scale > 0.0) {
            for (std::size_t i = 0; i < rep.records.size(); ++i) {
                if (!rep.records[i].spin_temperature)
                    continue;
                const double p = rep.records[i].record.flux_shift / rep.scale;
                if (p > best_p) {
                    best_p = p;
                    best = i;
                }
            }
        }
        if (best) {
            rep.count_polarization_source = "observed";
        } else {
            for (std::size_t i = 0; i < rep.records.size(); ++i) {
                const auto& r = rep.records[i].record;
                const double p = model.polarization(r.field, r.plate_temperature);
                if (p > best_p) {
                    best_p = p;
                    best = i;
                }
            }
            rep.count_polarization_source = "model at plate temperature";
        }
        rep.count_record = *best;
        rep.count_polarization = best_p;
        const double n = flux_shift_to_spin_count(rep.records[*best].record.flux_shift, best_p, geom);
        rep.spins = density_and_mass(n, geom, rep.cell_mass_density);
    });
    return rep;
}

/// Deterministic plain-text rendering: fixed section order, %.15g numbers.
inline std::string report_to_text(const AnalysisReport& rep) {
    std::string out;
    auto kv = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    out += "# fqmag analysis report\n\n[input]\n";
    kv("source", rep.source);
    kv("sample_records", std::to_string(rep.sample_records));
    kv("control_records", std::to_string(rep.control_records));

    out += "\n[calibration]\n";
    kv("t_ref", format_value(rep.t_ref) + " mK");
    kv("anchor_records", std::to_string(rep.anchor_records));
    kv("scale", format_value(rep.scale) + " uPhi0");

    out += "\n[records]\n";
    out += "# index, plate_mK, field_mT, corrected_flux_shift_uPhi0, control, spin_mK\n";
    for (std::size_t i = 0; i < rep.records.size(); ++i) {
        const auto& r = rep.records[i];
        out += std::to_string(i + 1) + ", " + format_value(r.record.plate_temperature) + ", " +
               format_value(r.record.field) + ", " + format_value(r.record.flux_shift) + ", " +
               (r.control_matched ? "subtracted" : "unmatched") + ", " +
               (r.spin_temperature ? format_value(*r.spin_temperature) : "failed: " + r.error) + "\n";
    }

    out += "\n[spin_count]\n";
    kv("record", std::to_string(rep.count_record + 1));
    kv("signal", format_value(rep.records.at(rep.count_record).record.flux_shift) + " uPhi0");
    kv("polarization", format_value(rep.count_polarization));
    kv("polarization_source", rep.count_polarization_source);
    kv("coupling_per_spin", format_value(rep.coupling_per_spin) + " uPhi0");
    kv("n_spins", format_value(rep.spins.n_spins));
    kv("volume", format_value(rep.volume) + " um3");
    kv("density", format_value(rep.spins.density) + " spins/mm3");
    kv("cell_mass_density", format_value(rep.cell_mass_density) + " g/cm3");
    kv("iron_mass_fraction", format_value(rep.spins.iron_mass_fraction) + " ug/g");

    out += "\n[warnings]\n";
    for (const auto& w : rep.warnings)
        out += w + "\n";

    out += "\n[provenance]\n";
    for (const auto& p : rep.provenance)
        out += p.section + "." + p.key + " = " + p.value + "  # " + p.source + "\n";
    return out;
}

/// Per-record sidecar; failed inversions carry nan.
inline Table records_table(const AnalysisReport& rep) {
    Table t{"Spin temperature", {"plate_mK", "field_mT", "corrected_flux_shift_uPhi0", "spin_mK"}, {}};
    for (const auto& r : rep.records)
        t.rows.push_back({r.record.plate_temperature, r.record.field, r.record.flux_shift,
                          r.spin_temperature.value_or(std::numeric_limits<double>::quiet_NaN())});
    return t;
}

}  // namespace fqmag::io

#endif  // FQMAG_IO_ANALYSIS_HPP
