#ifndef FQMAG_IO_CSV_HPP
#define FQMAG_IO_CSV_HPP

// CSV at the file boundary. Each physical quantity travels in one unit, named in the
// header: mK, mT, uPhi0, mPhi0, GHz.

#include <fqmag/errors.hpp>
#include <fqmag/fitting.hpp>
#include <fqmag/thermometry.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace fqmag::io {

inline constexpr std::string_view measurement_header = "plate_mK,field_mT,flux_shift_uPhi0,channel";
inline constexpr std::string_view spectrum_header = "flux_mPhi0,frequency_GHz";

/// Column-oriented numeric table with a title for plots.
struct Table {
    std::string title;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos)
            nl = text.size();
        auto line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        lines.push_back(line);
        pos = nl + 1;
    }
    return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        auto f = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        while (!f.empty() && f.front() == ' ')
            f.remove_prefix(1);
        while (!f.empty() && f.back() == ' ')
            f.remove_suffix(1);
        out.push_back(f);
        if (comma == std::string_view::npos)
            break;
        pos = comma + 1;
    }
    return out;
}

inline double parse_field(std::string_view f, int row, std::string_view name) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
        throw ParseError("`" + std::string(f) + "` is not a number for " + std::string(name), row, "row");
    return v;
}

inline bool blank(std::string_view line) { return line.find_first_not_of(" \t") == std::string_view::npos; }

}  // namespace detail

/// 15 significant digits; identical inputs give identical bytes.
inline std::string format_value(double v) {
    std::array<char, 40> buf{};
    const int n = std::snprintf(buf.data(), buf.size(), "%.15g", v == 0.0 ? 0.0 : v);
    return std::string(buf.data(), static_cast<std::size_t>(n));
}

inline std::string_view channel_name(Channel c) { return c == Channel::sample ? "sample" : "control"; }

/// Row numbers in errors count the header as row 1.
inline std::vector<MeasurementRecord> read_measurements(std::string_view text) {
    const auto lines = detail::split_lines(text);
    if (lines.empty() || lines.front() != measurement_header)
        throw ParseError("missing header `" + std::string(measurement_header) + "`", 1, "row");
    std::vector<MeasurementRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const int row = static_cast<int>(i) + 1;
        if (detail::blank(lines[i]))
            continue;
        const auto f = detail::split_fields(lines[i]);
        if (f.size() != 4)
            throw ParseError("expected 4 fields, got " + std::to_string(f.size()), row, "row");
        MeasurementRecord r{};
        r.plate_temperature = detail::parse_field(f[0], row, "plate_mK");
        r.field = detail::parse_field(f[1], row, "field_mT");
        r.flux_shift = detail::parse_field(f[2], row, "flux_shift_uPhi0");
        if (f[3] == "sample")
            r.channel = Channel::sample;
        else if (f[3] == "control")
            r.channel = Channel::control;
        else
            throw ParseError("unknown channel `" + std::string(f[3]) + "`", row, "row");
        if (!(r.plate_temperature > 0.0))
            throw ParseError("plate temperature must be > 0 mK", row, "row");
        if (!(r.field > 0.0))
            throw ParseError("field must be > 0 mT", row, "row");
        out.push_back(r);
    }
    return out;
}

inline std::string write_measurements(const std::vector<MeasurementRecord>& records) {
    std::string out(measurement_header);
    out += '\n';
    for (const auto& r : records) {
        out += format_value(r.plate_temperature) + ',' + format_value(r.field) + ',' + format_value(r.flux_shift) +
               ',' + std::string(channel_name(r.channel)) + '\n';
    }
    return out;
}

inline SpectrumPoints read_spectrum_points(std::string_view text) {
    const auto lines = detail::split_lines(text);
    if (lines.empty() || lines.front() != spectrum_header)
        throw ParseError("missing header `" + std::string(spectrum_header) + "`", 1, "row");
    std::vector<SpectrumPoint> pts;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const int row = static_cast<int>(i) + 1;
        if (detail::blank(lines[i]))
            continue;
        const auto f = detail::split_fields(lines[i]);
        if (f.size() != 2)
            throw ParseError("expected 2 fields", row, "row");
        pts.push_back({detail::parse_field(f[0], row, "flux_mPhi0"), detail::parse_field(f[1], row, "frequency_GHz")});
    }
    return SpectrumPoints(std::move(pts));
}

inline std::string write_spectrum_points(const SpectrumPoints& pts) {
    std::string out(spectrum_header);
    out += '\n';
    for (const auto& p : pts.points())
        out += format_value(p.flux) + ',' + format_value(p.frequency) + '\n';
    return out;
}

inline std::string table_to_csv(const Table& t) {
    std::string out;
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        out += (c ? "," : "") + t.columns[c];
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out += (c ? "," : "") + format_value(row[c]);
        out += '\n';
    }
    return out;
}

/// Reads a numeric CSV with one header line.
inline Table csv_to_table(std::string_view text) {
    const auto lines = detail::split_lines(text);
    if (lines.empty())
        throw ParseError("empty CSV", 1);
    Table t;
    for (auto f : detail::split_fields(lines.front()))
        t.columns.emplace_back(f);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const int row = static_cast<int>(i) + 1;
        if (detail::blank(lines[i]))
            continue;
        const auto f = detail::split_fields(lines[i]);
        if (f.size() != t.columns.size())
            throw ParseError("column count mismatch", row, "row");
        std::vector<double> values;
        for (std::size_t c = 0; c < f.size(); ++c)
            values.push_back(detail::parse_field(f[c], row, t.columns[c]));
        t.rows.push_back(std::move(values));
    }
    return t;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open `" + path + "` for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open `" + path + "` for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw IoError("write to `" + path + "` failed");
}

struct CorrectedRecords {
    std::vector<MeasurementRecord> records;  // sample channel, control-subtracted where matched
    std::vector<bool> matched;
    std::vector<std::string> warnings;
};

/// Subtracts from each sample record the control record taken at the same plate
/// temperature and field (both within 1 %). Unmatched samples pass through unchanged.
inline CorrectedRecords subtract_control(const std::vector<MeasurementRecord>& records) {
    CorrectedRecords out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& s = records[i];
        if (s.channel != Channel::sample)
            continue;
        const MeasurementRecord* best = nullptr;
        double best_distance = 0.0;
        for (const auto& c : records) {
            if (c.channel != Channel::control)
                continue;
            const double dt = std::abs(c.plate_temperature - s.plate_temperature) / s.plate_temperature;
            const double db = std::abs(c.field - s.field) / s.field;
            if (dt > 0.01 || db > 0.01)
                continue;
            if (!best || dt + db < best_distance) {
                best = &c;
                best_distance = dt + db;
            }
        }
        MeasurementRecord corrected = s;
        if (best) {
            corrected.flux_shift = s.flux_shift - best->flux_shift;
        } else {
            out.warnings.push_back("record " + std::to_string(i + 1) + " (" + format_value(s.plate_temperature) +
                                   " mK, " + format_value(s.field) + " mT): no matching control, passed through");
        }
        out.records.push_back(corrected);
        out.matched.push_back(best != nullptr);
    }
    return out;
}

}  // namespace fqmag::io

#endif  // FQMAG_IO_CSV_HPP
