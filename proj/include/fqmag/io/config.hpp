#ifndef FQMAG_IO_CONFIG_HPP
#define FQMAG_IO_CONFIG_HPP

// INI-style configuration with units. The built-in defaults are the text of
// config/defaults.ini, embedded at configure time; a user file overlays them key by key.

#include <fqmag/errors.hpp>
#include <fqmag/esr.hpp>
#include <fqmag/qubit.hpp>
#include <fqmag/quadrature.hpp>
#include <fqmag/spin.hpp>

#include <fqmag/default_config.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fqmag::io {

enum class Dimension {
    dimensionless,
    count,
    frequency,
    field,
    temperature_mk,
    temperature_k,
    current,
    flux_mphi0,
    flux_uphi0,
    volume,
    length,
    mass_density,
    angle,
};

struct KeySpec {
    std::string_view section;
    std::string_view key;
    Dimension dimension;
    std::string_view unit;  // canonical unit; values are stored in it
    bool list = false;
};

// clang-format off
inline constexpr std::array key_table{
    KeySpec{"spin", "s", Dimension::dimensionless, ""},
    KeySpec{"spin", "g_x", Dimension::dimensionless, ""},
    KeySpec{"spin", "g_y", Dimension::dimensionless, ""},
    KeySpec{"spin", "g_z", Dimension::dimensionless, ""},
    KeySpec{"spin", "euler_alpha", Dimension::angle, "rad"},
    KeySpec{"spin", "euler_beta", Dimension::angle, "rad"},
    KeySpec{"spin", "euler_gamma", Dimension::angle, "rad"},
    KeySpec{"spin", "d", Dimension::frequency, "GHz"},
    KeySpec{"spin", "e", Dimension::frequency, "GHz"},
    KeySpec{"qubit", "delta", Dimension::frequency, "GHz"},
    KeySpec{"qubit", "persistent_current", Dimension::current, "nA"},
    KeySpec{"qubit", "sweet_spot", Dimension::flux_mphi0, "mPhi0"},
    KeySpec{"qubit", "synth_points", Dimension::count, ""},
    KeySpec{"qubit", "synth_flux_min", Dimension::flux_mphi0, "mPhi0"},
    KeySpec{"qubit", "synth_flux_max", Dimension::flux_mphi0, "mPhi0"},
    KeySpec{"qubit", "synth_noise", Dimension::dimensionless, ""},
    KeySpec{"qubit", "synth_shift", Dimension::flux_uphi0, "uPhi0"},
    KeySpec{"geometry", "volume", Dimension::volume, "um3"},
    KeySpec{"geometry", "coupling_per_spin", Dimension::flux_uphi0, "uPhi0"},
    KeySpec{"geometry", "loop_length", Dimension::length, "um"},
    KeySpec{"geometry", "loop_width", Dimension::length, "um"},
    KeySpec{"geometry", "cell_mass_density", Dimension::mass_density, "g/cm3"},
    KeySpec{"grid", "n_polar", Dimension::count, ""},
    KeySpec{"grid", "n_azimuth", Dimension::count, ""},
    KeySpec{"esr", "mw_frequency", Dimension::frequency, "GHz"},
    KeySpec{"esr", "field_start", Dimension::field, "mT"},
    KeySpec{"esr", "field_stop", Dimension::field, "mT"},
    KeySpec{"esr", "field_step", Dimension::field, "mT"},
    KeySpec{"esr", "scan_step", Dimension::field, "mT"},
    KeySpec{"esr", "linewidth", Dimension::field, "mT"},
    KeySpec{"esr", "temperature", Dimension::temperature_k, "K"},
    KeySpec{"esr", "n_polar", Dimension::count, ""},
    KeySpec{"esr", "n_azimuth", Dimension::count, ""},
    KeySpec{"esr", "radical_g", Dimension::dimensionless, ""},
    KeySpec{"esr", "radical_weight", Dimension::dimensionless, ""},
    KeySpec{"analysis", "t_ref", Dimension::temperature_mk, "mK"},
    KeySpec{"analysis", "in_plane_limit", Dimension::field, "mT"},
    KeySpec{"analysis", "curve_fields", Dimension::field, "mT", true},
    KeySpec{"analysis", "curve_temperatures", Dimension::temperature_mk, "mK", true},
    KeySpec{"analysis", "levels_field_max", Dimension::field, "mT"},
    KeySpec{"analysis", "levels_points", Dimension::count, ""},
    KeySpec{"analysis", "levels_polar", Dimension::angle, "rad"},
    KeySpec{"analysis", "levels_azimuth", Dimension::angle, "rad"},
};
// clang-format on

struct UnitSpec {
    std::string_view name;
    Dimension dimension;
    double to_canonical;
};

// clang-format off
inline constexpr std::array unit_table{
    UnitSpec{"GHz", Dimension::frequency, 1.0},
    UnitSpec{"MHz", Dimension::frequency, 1e-3},
    UnitSpec{"kHz", Dimension::frequency, 1e-6},
    UnitSpec{"Hz", Dimension::frequency, 1e-9},
    UnitSpec{"mT", Dimension::field, 1.0},
    UnitSpec{"T", Dimension::field, 1e3},
    UnitSpec{"uT", Dimension::field, 1e-3},
    UnitSpec{"G", Dimension::field, 0.1},
    UnitSpec{"mK", Dimension::temperature_mk, 1.0},
    UnitSpec{"K", Dimension::temperature_mk, 1e3},
    UnitSpec{"K", Dimension::temperature_k, 1.0},
    UnitSpec{"mK", Dimension::temperature_k, 1e-3},
    UnitSpec{"nA", Dimension::current, 1.0},
    UnitSpec{"uA", Dimension::current, 1e3},
    UnitSpec{"pA", Dimension::current, 1e-3},
    UnitSpec{"mPhi0", Dimension::flux_mphi0, 1.0},
    UnitSpec{"uPhi0", Dimension::flux_mphi0, 1e-3},
    UnitSpec{"Phi0", Dimension::flux_mphi0, 1e3},
    UnitSpec{"uPhi0", Dimension::flux_uphi0, 1.0},
    UnitSpec{"mPhi0", Dimension::flux_uphi0, 1e3},
    UnitSpec{"nPhi0", Dimension::flux_uphi0, 1e-3},
    UnitSpec{"um3", Dimension::volume, 1.0},
    UnitSpec{"mm3", Dimension::volume, 1e9},
    UnitSpec{"nm3", Dimension::volume, 1e-9},
    UnitSpec{"um", Dimension::length, 1.0},
    UnitSpec{"nm", Dimension::length, 1e-3},
    UnitSpec{"mm", Dimension::length, 1e3},
    UnitSpec{"g/cm3", Dimension::mass_density, 1.0},
    UnitSpec{"kg/m3", Dimension::mass_density, 1e-3},
    UnitSpec{"rad", Dimension::angle, 1.0},
    UnitSpec{"deg", Dimension::angle, std::numbers::pi / 180.0},
};
// clang-format on

inline const KeySpec* find_key(std::string_view section, std::string_view key) {
    for (const auto& k : key_table)
        if (k.section == section && k.key == key)
            return &k;
    return nullptr;
}

struct ConfigEntry {
    std::vector<double> values;  // canonical unit
    std::string text;            // value as written, unit included
    bool from_default = true;
    int line = 0;                // line in the file it came from
};

struct ProvenanceEntry {
    std::string section;
    std::string key;
    std::string value;  // canonical value(s) with unit
    std::string source; // "default" or "config line N"
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty())
        return std::nullopt;
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        return std::nullopt;
    return v;
}

/// Shortest round-trip decimal form.
inline std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace detail

class ConfigDocument {
public:
    /// Parses `text`, overlaying it on the built-in defaults.
    static ConfigDocument parse(std::string_view text) {
        ConfigDocument doc;
        doc.apply(default_config_text, true);
        for (const auto& spec : key_table)
            if (!doc.entries_.count(key_of(spec.section, spec.key)))
                throw Error(ErrorKind::input, "built-in defaults lack " + std::string(spec.section) + "." +
                                                  std::string(spec.key));
        doc.apply(text, false);
        return doc;
    }

    double get(std::string_view section, std::string_view key) const {
        const auto& e = entry(section, key);
        if (e.values.size() != 1)
            throw Error(ErrorKind::input, std::string(section) + "." + std::string(key) + " is a list");
        return e.values.front();
    }

    int integer(std::string_view section, std::string_view key) const {
        return static_cast<int>(std::llround(get(section, key)));
    }

    const std::vector<double>& list(std::string_view section, std::string_view key) const {
        return entry(section, key).values;
    }

    bool is_default(std::string_view section, std::string_view key) const {
        return entry(section, key).from_default;
    }

    /// Every key with its value and where it came from, in schema order.
    std::vector<ProvenanceEntry> provenance() const {
        std::vector<ProvenanceEntry> out;
        for (const auto& spec : key_table) {
            const auto& e = entry(spec.section, spec.key);
            std::string value;
            for (std::size_t i = 0; i < e.values.size(); ++i)
                value += (i ? ", " : "") + detail::format_number(e.values[i]);
            if (!spec.unit.empty())
                value += " " + std::string(spec.unit);
            out.push_back({std::string(spec.section), std::string(spec.key), value,
                           e.from_default ? "default" : "config line " + std::to_string(e.line)});
        }
        return out;
    }

private:
    static std::string key_of(std::string_view section, std::string_view key) {
        return std::string(section) + "." + std::string(key);
    }

    const ConfigEntry& entry(std::string_view section, std::string_view key) const {
        const auto it = entries_.find(key_of(section, key));
        if (it == entries_.end())
            throw Error(ErrorKind::input, "unknown configuration key " + key_of(section, key));
        return it->second;
    }

    void apply(std::string_view text, bool defaults) {
        std::string section;
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t nl = text.find('\n', pos);
            std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++line_no;
            if (const auto hash = raw.find('#'); hash != std::string_view::npos)
                raw = raw.substr(0, hash);
            const std::string_view line = detail::trim(raw);
            if (line.empty())
                continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ParseError("malformed section header", line_no);
                section = std::string(detail::trim(line.substr(1, line.size() - 2)));
                const bool known = std::any_of(key_table.begin(), key_table.end(),
                                               [&](const KeySpec& k) { return k.section == section; });
                if (!known)
                    throw ParseError("unknown section [" + section + "]", line_no);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ParseError("expected `key = value`", line_no);
            if (section.empty())
                throw ParseError("key outside of any section", line_no);
            const std::string key(detail::trim(line.substr(0, eq)));
            const KeySpec* spec = find_key(section, key);
            if (!spec)
                throw ParseError("unknown key `" + key + "` in [" + section + "]", line_no);
            ConfigEntry e;
            e.text = std::string(detail::trim(line.substr(eq + 1)));
            e.values = parse_value(*spec, e.text, line_no);
            e.from_default = defaults;
            e.line = line_no;
            entries_[key_of(section, key)] = std::move(e);
        }
    }

    static std::vector<double> parse_value(const KeySpec& spec, std::string_view text, int line_no) {
        // Split "<numbers> [unit]" at the first character that cannot belong to a number list.
        std::string_view numbers = text;
        std::string_view unit;
        for (std::size_t i = 0; i < text.size(); ++i) {
            const char c = text[i];
            const bool numeric = std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == ',' || c == '-' ||
                                 c == '+' || std::isspace(static_cast<unsigned char>(c)) ||
                                 ((c == 'e' || c == 'E') && i > 0 && std::isdigit(static_cast<unsigned char>(text[i - 1])));
            if (!numeric) {
                numbers = text.substr(0, i);
                unit = detail::trim(text.substr(i));
                break;
            }
        }
        if (!unit.empty() && unit.front() == '[') {
            if (unit.back() != ']')
                throw ParseError("unterminated unit bracket", line_no);
            unit = detail::trim(unit.substr(1, unit.size() - 2));
        }

        std::vector<double> values;
        std::size_t start = 0;
        while (start <= numbers.size()) {
            const auto comma = numbers.find(',', start);
            const auto item = numbers.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                    : comma - start);
            const auto v = detail::parse_number(item);
            if (!v)
                throw ParseError("`" + std::string(detail::trim(item)) + "` is not a number for " +
                                     std::string(spec.key),
                                 line_no);
            values.push_back(*v);
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        if (values.size() != 1 && !spec.list)
            throw ParseError(std::string(spec.key) + " takes a single value", line_no);

        double factor = 1.0;
        if (spec.dimension == Dimension::dimensionless || spec.dimension == Dimension::count) {
            if (!unit.empty())
                throw ParseError("unit error: " + std::string(spec.key) + " is dimensionless, got `" +
                                     std::string(unit) + "`",
                                 line_no);
        } else if (!unit.empty()) {
            const auto it = std::find_if(unit_table.begin(), unit_table.end(), [&](const UnitSpec& u) {
                return u.name == unit && u.dimension == spec.dimension;
            });
            if (it == unit_table.end())
                throw ParseError("unit error: `" + std::string(unit) + "` is not a valid unit for " +
                                     std::string(spec.key) + " (expected " + std::string(spec.unit) + ")",
                                 line_no);
            factor = it->to_canonical;
        }
        for (double& v : values) {
            v *= factor;
            if (spec.dimension == Dimension::count && (v != std::round(v) || v < 0.0))
                throw ParseError(std::string(spec.key) + " must be a non-negative integer", line_no);
        }
        return values;
    }

    std::map<std::string, ConfigEntry> entries_;
};

inline ConfigDocument parse_config(std::string_view text) { return ConfigDocument::parse(text); }

// Typed views of a configuration.

inline SpinSystem spin_system_from(const ConfigDocument& c) {
    return SpinSystem(c.get("spin", "s"), {c.get("spin", "g_x"), c.get("spin", "g_y"), c.get("spin", "g_z")},
                      {c.get("spin", "euler_alpha"), c.get("spin", "euler_beta"), c.get("spin", "euler_gamma")},
                      c.get("spin", "d"), c.get("spin", "e"));
}

inline FluxQubit qubit_from(const ConfigDocument& c) {
    return FluxQubit(c.get("qubit", "delta"), c.get("qubit", "persistent_current"), c.get("qubit", "sweet_spot"));
}

inline SensingGeometry geometry_from(const ConfigDocument& c) {
    return SensingGeometry(c.get("geometry", "volume"), c.get("geometry", "coupling_per_spin"),
                           c.get("geometry", "loop_length"), c.get("geometry", "loop_width"));
}

inline OrientationGrid grid_from(const ConfigDocument& c) {
    return make_orientation_grid(c.integer("grid", "n_polar"), c.integer("grid", "n_azimuth"));
}

inline EsrConfig esr_config_from(const ConfigDocument& c) {
    EsrConfig cfg;
    cfg.mw_frequency = c.get("esr", "mw_frequency");
    cfg.field_start = c.get("esr", "field_start");
    cfg.field_stop = c.get("esr", "field_stop");
    cfg.field_step = c.get("esr", "field_step");
    cfg.scan_step = c.get("esr", "scan_step");
    cfg.linewidth_fwhm = c.get("esr", "linewidth");
    cfg.temperature = c.get("esr", "temperature");
    cfg.grid = make_orientation_grid(c.integer("esr", "n_polar"), c.integer("esr", "n_azimuth"));
    cfg.validate();
    return cfg;
}

/// The configured spin system plus the generic S = 1/2 species.
inline SpeciesMix esr_mix_from(const ConfigDocument& c) {
    return {{spin_system_from(c), 1.0},
            {SpinSystem::isotropic(0.5, c.get("esr", "radical_g")), c.get("esr", "radical_weight")}};
}

}  // namespace fqmag::io

#endif  // FQMAG_IO_CONFIG_HPP
