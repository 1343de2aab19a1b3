// fqmag command-line tool.

#include <fqmag/esr.hpp>
#include <fqmag/fitting.hpp>
#include <fqmag/io/analysis.hpp>
#include <fqmag/io/config.hpp>
#include <fqmag/io/csv.hpp>
#include <fqmag/io/svg.hpp>
#include <fqmag/io/synthetic.hpp>
#include <fqmag/spin.hpp>
#include <fqmag/thermomag.hpp>
#include <fqmag/thermometry.hpp>

#include "acceptance/criteria.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace fqmag;

enum Exit { ok = 0, input_error = 2, numerical_error = 3, io_error = 4 };

struct Common {
    std::string config_path;
    std::string out;
    std::string format = "csv";
    std::uint64_t seed = 1;
};

io::ConfigDocument load_config(const Common& c) {
    return io::parse_config(c.config_path.empty() ? std::string() : io::read_file(c.config_path));
}

io::Format format_of(const Common& c) { return c.format == "svg" ? io::Format::svg : io::Format::csv; }

void emit_text(const Common& c, const std::string& text) {
    if (c.out.empty())
        std::fwrite(text.data(), 1, text.size(), stdout);
    else
        io::write_file(c.out, text);
}

/// CSV of the table, or an SVG of `plot` when one is given and the format asks for it.
void emit(const Common& c, const io::Table& table, const std::optional<io::Plot>& plot = std::nullopt) {
    if (table.rows.empty())
        throw DomainError("nothing to write: the series is empty");
    if (format_of(c) == io::Format::csv)
        emit_text(c, io::table_to_csv(table));
    else
        emit_text(c, io::render_svg(plot ? *plot : io::plot_from_table(table)));
}

std::string sidecar_path(const std::string& out, const std::string& suffix, const std::string& ext) {
    std::filesystem::path p(out);
    return (p.parent_path() / (p.stem().string() + suffix + ext)).string();
}

void cmd_levels(const Common& c, std::optional<double> field_max, std::optional<int> points) {
    const auto config = load_config(c);
    const SpinSystem sys = io::spin_system_from(config);
    const double bmax = field_max.value_or(config.get("analysis", "levels_field_max"));
    const int n = points.value_or(config.integer("analysis", "levels_points"));
    if (!(bmax > 0.0) || n < 2)
        throw DomainError("levels needs a positive field range and at least 2 points");
    const Vec3 dir = unit_vector(config.get("analysis", "levels_polar"), config.get("analysis", "levels_azimuth"));
    const SpinOperators ops = make_spin_operators(sys.s());

    io::Table t{"Energy levels", {"field_mT"}, {}};
    for (int k = 0; k < sys.dimension(); ++k)
        t.columns.push_back("E" + std::to_string(k + 1) + "_GHz");
    for (int i = 0; i < n; ++i) {
        const double b = bmax * i / (n - 1);
        const RVector e = eigenvalues(build_hamiltonian(sys, ops, FieldVector(b, dir)));
        std::vector<double> row{b};
        for (int k = 0; k < e.size(); ++k)
            row.push_back(e(k));
        t.rows.push_back(std::move(row));
    }
    io::Plot plot = io::plot_from_table(t);
    plot.x_label = "field (mT)";
    plot.y_label = "energy / h (GHz)";
    emit(c, t, plot);
}

void cmd_curve(const Common& c) {
    const auto config = load_config(c);
    const SpinSystem sys = io::spin_system_from(config);
    const OrientationGrid grid = io::grid_from(config);
    const auto& fields = config.list("analysis", "curve_fields");
    const auto& temps = config.list("analysis", "curve_temperatures");

    io::Table t{"Powder magnetization", {"field_mT", "temperature_mK", "b_over_t_mT_per_mK", "polarization",
                                         "moment_muB"}, {}};
    io::Plot plot{"Powder magnetization", "B/T (mT/mK)", "polarization", {}};
    for (double b : fields) {
        std::vector<Condition> conds;
        for (double temp : temps)
            conds.push_back({b, temp});
        const auto curve = magnetization_curve(sys, conds, grid);
        io::PlotSeries s{io::format_value(b) + " mT", {}, {}};
        for (const auto& p : curve.points()) {
            t.rows.push_back({p.field, p.temperature, p.b_over_t, p.polarization, p.moment});
            s.x.push_back(p.b_over_t);
            s.y.push_back(p.polarization);
        }
        plot.series.push_back(std::move(s));
    }
    emit(c, t, plot);
}

void cmd_esr(const Common& c) {
    const auto config = load_config(c);
    const EsrSpectrum s = powder_spectrum(io::esr_mix_from(config), io::esr_config_from(config));
    io::Table t{"Powder ESR", {"field_mT", "absorption", "derivative"}, {}};
    for (std::size_t k = 0; k < s.field.size(); ++k)
        t.rows.push_back({s.field[k], s.absorption[k], s.derivative[k]});
    io::Plot plot{"Powder ESR derivative spectrum", "field (mT)", "dA/dB (arb. units)",
                  {{"derivative", s.field, s.derivative}}};
    emit(c, t, plot);
}

void cmd_fit_qubit(const Common& c, const std::vector<std::string>& files) {
    const auto config = load_config(c);
    std::vector<SpectrumPoints> sets;
    std::vector<std::string> names;
    if (files.empty()) {
        const FluxQubit q = io::qubit_from(config);
        const double lo = config.get("qubit", "synth_flux_min"), hi = config.get("qubit", "synth_flux_max");
        const int n = config.integer("qubit", "synth_points");
        const double noise = config.get("qubit", "synth_noise");
        const FluxQubit shifted(q.delta(), q.persistent_current(),
                                q.sweet_spot() + config.get("qubit", "synth_shift") * 1e-3);
        sets.push_back(io::synthetic_spectrum(q, lo, hi, n, noise, c.seed));
        sets.push_back(io::synthetic_spectrum(shifted, lo, hi, n, noise, c.seed + 1));
        names = {"synthetic reference", "synthetic shifted"};
    } else {
        if (files.size() > 2)
            throw DomainError("fit-qubit takes one or two spectrum files");
        for (const auto& f : files) {
            sets.push_back(io::read_spectrum_points(io::read_file(f)));
            names.push_back(std::filesystem::path(f).filename().string());
        }
    }

    std::vector<FitResult> fits;
    for (const auto& s : sets)
        fits.push_back(fit_qubit_spectrum(s));
    std::string summary;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const auto& f = fits[i];
        summary += "[fit " + std::to_string(i + 1) + "]\nsource = " + names[i] + "\n";
        summary += "delta = " + io::format_value(f.parameters[0]) + " +- " +
                   io::format_value(f.parameter_uncertainties[0]) + " GHz\n";
        summary += "persistent_current = " + io::format_value(f.parameters[1]) + " +- " +
                   io::format_value(f.parameter_uncertainties[1]) + " nA\n";
        summary += "sweet_spot = " + io::format_value(f.parameters[2]) + " +- " +
                   io::format_value(f.parameter_uncertainties[2]) + " mPhi0\n";
        summary += "residual_norm = " + io::format_value(f.residual_norm) + " GHz\n\n";
    }
    if (sets.size() == 2) {
        const SpectralShift shift = extract_spectral_shift(sets[0], sets[1]);
        summary += "[shift]\nflux_shift = " + io::format_value(shift.shift) + " +- " +
                   io::format_value(shift.uncertainty) + " uPhi0\n";
    }
    std::fputs(summary.c_str(), stderr);

    io::Table t{"Qubit spectrum", {"dataset", "flux_mPhi0", "frequency_GHz", "model_GHz"}, {}};
    io::Plot plot{"Qubit spectrum", "flux (mPhi0)", "frequency (GHz)", {}};
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const FluxQubit q = qubit_from_fit(fits[i]);
        io::PlotSeries data{names[i], {}, {}}, model{names[i] + " fit", {}, {}};
        for (const auto& p : sets[i].points()) {
            const double m = qubit_frequency(q, p.flux);
            t.rows.push_back({static_cast<double>(i + 1), p.flux, p.frequency, m});
            data.x.push_back(p.flux);
            data.y.push_back(p.frequency);
            model.x.push_back(p.flux);
            model.y.push_back(m);
        }
        plot.series.push_back(std::move(data));
        plot.series.push_back(std::move(model));
    }
    emit(c, t, plot);
}

void cmd_spin_temp(const Common& c, const std::string& file) {
    const auto config = load_config(c);
    const auto records = io::read_measurements(io::read_file(file));
    const auto corrected = io::subtract_control(records);
    for (const auto& w : corrected.warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    const PowderModel model(io::spin_system_from(config), io::grid_from(config));
    const auto series = spin_temperature_series(corrected.records, model, config.get("analysis", "t_ref"));
    std::fprintf(stderr, "scale = %s uPhi0\n", io::format_value(series.scale).c_str());

    io::Table t{"Spin temperature", {"plate_mK", "field_mT", "spin_mK"}, {}};
    std::map<double, io::PlotSeries> by_field;
    for (const auto& e : series.entries) {
        if (!e.result) {
            std::fprintf(stderr, "warning: record %zu: %s\n", e.record_index + 1, e.error.c_str());
            continue;
        }
        const auto& r = *e.result;
        t.rows.push_back({r.plate_temperature, r.field, r.spin_temperature});
        auto& s = by_field[r.field];
        s.name = io::format_value(r.field) + " mT";
        s.x.push_back(r.plate_temperature);
        s.y.push_back(r.spin_temperature);
    }
    io::Plot plot{"Spin temperature", "plate temperature (mK)", "spin temperature (mK)", {}};
    for (auto& [b, s] : by_field)
        plot.series.push_back(std::move(s));
    emit(c, t, plot);
}

void cmd_analyze(const Common& c, const std::string& file) {
    const auto config = load_config(c);
    const auto records = io::read_measurements(io::read_file(file));
    const auto report = io::run_analysis(config, records, std::filesystem::path(file).filename().string());
    emit_text(c, io::report_to_text(report));
    if (!c.out.empty()) {
        const io::Table t = io::records_table(report);
        if (format_of(c) == io::Format::csv) {
            io::write_file(sidecar_path(c.out, "_records", ".csv"), io::table_to_csv(t));
        } else {
            io::Plot plot{"Spin temperature", "plate temperature (mK)", "spin temperature (mK)", {}};
            std::map<double, io::PlotSeries> by_field;
            for (const auto& row : t.rows) {
                auto& s = by_field[row[1]];
                s.name = io::format_value(row[1]) + " mT";
                s.x.push_back(row[0]);
                s.y.push_back(row[3]);
            }
            for (auto& [b, s] : by_field)
                plot.series.push_back(std::move(s));
            io::write_file(sidecar_path(c.out, "_records", ".svg"), io::render_svg(plot));
        }
    }
}

void cmd_synth(const Common& c, double noise) {
    const auto config = load_config(c);
    const PowderModel model(io::spin_system_from(config), io::grid_from(config));
    auto records = io::synthetic_measurements(model, io::default_saturation_plan());
    if (noise > 0.0) {
        std::mt19937_64 rng(c.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto& r : records)
            r.flux_shift *= 1.0 + noise * gauss(rng);
    }
    emit_text(c, io::write_measurements(records));
}

int exit_code(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::input: return input_error;
        case ErrorKind::numerical: return numerical_error;
        case ErrorKind::io: return io_error;
    }
    return numerical_error;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spin-system magnetometry, thermometry and ESR modelling"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config_path, "Configuration file (INI with units)");
    app.add_option("--out", common.out, "Output path (default: standard output)");
    app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv", "svg"}));
    app.add_option("--seed", common.seed, "Seed for synthetic-data generators");

    std::optional<double> field_max;
    std::optional<int> points;
    auto* levels = app.add_subcommand("levels", "Energy levels against field");
    levels->add_option("--field-max", field_max, "Largest field, mT");
    levels->add_option("--points", points, "Number of field points");

    auto* curve = app.add_subcommand("curve", "Powder magnetization against B/T");
    auto* esr = app.add_subcommand("esr", "Powder ESR derivative spectrum");

    std::vector<std::string> spectra;
    auto* fit = app.add_subcommand("fit-qubit", "Hyperbola fit of qubit spectra and flux-shift extraction");
    fit->add_option("spectra", spectra, "One or two spectrum CSV files (synthetic data when omitted)");

    std::string measurements;
    auto* spin_temp = app.add_subcommand("spin-temp", "Spin temperature for every measurement record");
    spin_temp->add_option("measurements", measurements, "Measurement CSV")->required();

    std::string analyze_input;
    auto* analyze = app.add_subcommand("analyze", "Full analysis: calibration, spin temperatures, spin count");
    analyze->add_option("measurements", analyze_input, "Measurement CSV")->required();

    std::string dataset = FQMAG_SYNTHETIC_DATASET;
    auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite");
    selftest->add_option("dataset", dataset, "Synthetic measurement CSV for the end-to-end check");

    double noise = 0.0;
    auto* synth = app.add_subcommand("synth", "Write a synthetic measurement CSV generated from the model");
    synth->add_option("--noise", noise, "Relative Gaussian noise on every signal")->check(CLI::NonNegativeNumber);

    for (auto* sub : app.get_subcommands({}))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : input_error;
    }

    try {
        if (levels->parsed())
            cmd_levels(common, field_max, points);
        else if (curve->parsed())
            cmd_curve(common);
        else if (esr->parsed())
            cmd_esr(common);
        else if (fit->parsed())
            cmd_fit_qubit(common, spectra);
        else if (spin_temp->parsed())
            cmd_spin_temp(common, measurements);
        else if (analyze->parsed())
            cmd_analyze(common, analyze_input);
        else if (synth->parsed())
            cmd_synth(common, noise);
        else if (selftest->parsed())
            return acceptance::run_all(dataset) == 0 ? ok : numerical_error;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return numerical_error;
    }
    return ok;
}
