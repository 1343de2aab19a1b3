#ifndef FQMAG_IO_SVG_HPP
#define FQMAG_IO_SVG_HPP

// Minimal line-plot writer. Output depends only on the input numbers, so identical
// series give identical bytes.

#include <fqmag/errors.hpp>
#include <fqmag/io/csv.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace fqmag::io {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
};

namespace detail {

inline std::string fixed(double v, int digits = 2) {
    std::array<char, 48> buf{};
    const int n = std::snprintf(buf.data(), buf.size(), "%.*f", digits, v == 0.0 ? 0.0 : v);
    return std::string(buf.data(), static_cast<std::size_t>(n));
}

inline std::string tick_label(double v) {
    std::array<char, 48> buf{};
    const int n = std::snprintf(buf.data(), buf.size(), "%.6g", std::abs(v) < 1e-300 ? 0.0 : v);
    return std::string(buf.data(), static_cast<std::size_t>(n));
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

/// 1-2-5 tick spacing giving roughly `target` intervals.
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (raw <= step)
            break;
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
    return ticks;
}

inline std::pair<double, double> padded_range(double lo, double hi) {
    if (!(hi > lo)) {
        const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
        return {lo - pad, hi + pad};
    }
    const double pad = 0.04 * (hi - lo);
    return {lo - pad, hi + pad};
}

}  // namespace detail

inline std::string render_svg(const Plot& plot) {
    constexpr double width = 720.0, height = 480.0;
    constexpr double left = 80.0, right = 24.0, top = 48.0, bottom = 64.0;
    constexpr std::array<const char*, 6> palette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    std::size_t total = 0;
    for (const auto& s : plot.series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
            ++total;
        }
    }
    if (total == 0)
        throw DomainError("cannot plot an empty series");
    std::tie(xmin, xmax) = detail::padded_range(xmin, xmax);
    std::tie(ymin, ymax) = detail::padded_range(ymin, ymax);

    const double pw = width - left - right, ph = height - top - bottom;
    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };
    using detail::fixed;

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
           fixed(height, 0) + "\" viewBox=\"0 0 " + fixed(width, 0) + " " + fixed(height, 0) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + fixed(width / 2) + "\" y=\"28.00\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" + detail::escape(plot.title) + "</text>\n";
    out += "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
    out += "<rect x=\"" + fixed(left) + "\" y=\"" + fixed(top) + "\" width=\"" + fixed(pw) + "\" height=\"" +
           fixed(ph) + "\"/>\n";
    out += "</g>\n";

    out += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
    for (double t : detail::nice_ticks(xmin, xmax)) {
        const double x = sx(t);
        out += "<line x1=\"" + fixed(x) + "\" y1=\"" + fixed(top + ph) + "\" x2=\"" + fixed(x) + "\" y2=\"" +
               fixed(top + ph + 5) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + fixed(x) + "\" y=\"" + fixed(top + ph + 18) + "\" text-anchor=\"middle\">" +
               detail::tick_label(t) + "</text>\n";
    }
    for (double t : detail::nice_ticks(ymin, ymax)) {
        const double y = sy(t);
        out += "<line x1=\"" + fixed(left - 5) + "\" y1=\"" + fixed(y) + "\" x2=\"" + fixed(left) + "\" y2=\"" +
               fixed(y) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + fixed(left - 8) + "\" y=\"" + fixed(y + 4) + "\" text-anchor=\"end\">" +
               detail::tick_label(t) + "</text>\n";
    }
    out += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"" + fixed(height - 16) + "\" text-anchor=\"middle\" "
           "font-size=\"13\">" + detail::escape(plot.x_label) + "</text>\n";
    out += "<text x=\"18.00\" y=\"" + fixed(top + ph / 2) + "\" text-anchor=\"middle\" font-size=\"13\" "
           "transform=\"rotate(-90 18.00 " + fixed(top + ph / 2) + ")\">" + detail::escape(plot.y_label) +
           "</text>\n";
    out += "</g>\n";

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const char* color = palette[k % palette.size()];
        std::string points;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                continue;
            points += (points.empty() ? "" : " ") + fixed(sx(s.x[i])) + "," + fixed(sy(s.y[i]));
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
               points + "\"/>\n";
        if (plot.series.size() > 1) {
            const double ly = top + 16 + 16 * static_cast<double>(k);
            out += "<text x=\"" + fixed(left + pw - 8) + "\" y=\"" + fixed(ly) + "\" text-anchor=\"end\" "
                   "font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color + "\">" + detail::escape(s.name) +
                   "</text>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

/// First column is x; every other column becomes one series.
inline Plot plot_from_table(const Table& t) {
    if (t.columns.size() < 2)
        throw DomainError("a plot needs at least two columns");
    Plot p{t.title, t.columns[0], t.columns.size() == 2 ? t.columns[1] : std::string(), {}};
    for (std::size_t c = 1; c < t.columns.size(); ++c) {
        PlotSeries s{t.columns[c], {}, {}};
        for (const auto& row : t.rows) {
            s.x.push_back(row.at(0));
            s.y.push_back(row.at(c));
        }
        p.series.push_back(std::move(s));
    }
    return p;
}

enum class Format { csv, svg };

/// Writes a table as CSV or as an SVG line plot.
inline void emit_curve(const Table& series, Format format, const std::string& path) {
    if (series.rows.empty())
        throw DomainError("refusing to emit an empty series");
    write_file(path, format == Format::csv ? table_to_csv(series) : render_svg(plot_from_table(series)));
}

}  // namespace fqmag::io

#endif  // FQMAG_IO_SVG_HPP
