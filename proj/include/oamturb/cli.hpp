#pragma once

// Command-line front end. `run_cli` is the whole program; tools/oamturb.cpp only forwards argv.
//
// Configuration comes from an optional sectioned key = value file, overridden by flags:
//
//   [beam]        waist, l0, p0
//   [werner]      gamma, theta, phi          (angles in units of pi)
//   [turbulence]  r0 | cn2, k, L | x | x_min, x_max, x_count
//   [run]         tol, output, input, form, threads

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "oamturb/errors.hpp"
#include "oamturb/lgmath.hpp"
#include "oamturb/measures.hpp"
#include "oamturb/qstate.hpp"
#include "oamturb/sweepfit.hpp"
#include "oamturb/turbulence.hpp"

namespace oamturb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

inline constexpr const char* kCsvHeader = "x,a,b,concurrence,coherence,lqu,lqu_branch";

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 12 significant digits; scientific below 1e-4 in magnitude.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    if (std::abs(v) < 1e-4)
        std::snprintf(buf, sizeof buf, "%.11e", v);
    else
        std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Sectioned key = value text. Keys are returned as "section.key".
inline std::map<std::string, std::string> parse_config_text(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string section;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": bad section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        kv[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
    }
    return kv;
}

enum class TurbulenceMode { none, r0, physical, x, grid };

struct RunConfig {
    BeamParams beam;
    WernerParams werner;
    TurbulenceMode mode = TurbulenceMode::none;
    double r0 = 0.0;
    double cn2 = 0.0, k = 0.0, path_length = 0.0;
    double x = 0.0;
    double x_min = 0.0, x_max = 3.0;
    int x_count = 61;
    double tol = kDefaultChannelTol;
    std::string output;
    std::string input;
    std::string form = "both";
    unsigned threads = 0;

    TurbulenceParams turbulence() const {
        switch (mode) {
            case TurbulenceMode::r0: return TurbulenceParams::from_r0(r0);
            case TurbulenceMode::physical: return TurbulenceParams::from_physical(cn2, k, path_length);
            case TurbulenceMode::x: return r0_from_x(beam, x);
            default: throw ConfigError("no single-point turbulence specification");
        }
    }
    std::vector<double> grid() const { return uniform_grid(x_min, x_max, static_cast<std::size_t>(x_count)); }
};

namespace detail {

// Raw string values gathered from file and flags; flags win.
struct RawOptions {
    std::map<std::string, std::string> values;

    std::optional<std::string> get(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end()) return std::nullopt;
        return it->second;
    }
    bool has(const std::string& key) const { return values.count(key) != 0; }
};

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: '" + v + "'");
    }
}

inline int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const int i = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer: '" + v + "'");
    }
}

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "beam.waist",    "beam.l0",          "beam.p0",          "werner.gamma",     "werner.theta",
        "werner.phi",    "turbulence.r0",    "turbulence.cn2",   "turbulence.k",     "turbulence.L",
        "turbulence.x",  "turbulence.x_min", "turbulence.x_max", "turbulence.x_count", "run.tol",
        "run.output",    "run.input",        "run.form",         "run.threads"};
    return keys;
}

}  // namespace detail

/// Builds and validates a RunConfig; throws ConfigError on any problem.
inline RunConfig build_config(const detail::RawOptions& raw) {
    for (const auto& [key, _] : raw.values)
        if (std::find(detail::known_keys().begin(), detail::known_keys().end(), key) == detail::known_keys().end())
            throw ConfigError("unknown configuration key '" + key + "'");

    RunConfig c;
    auto num = [&](const std::string& key, double& dst) {
        if (auto v = raw.get(key)) dst = detail::to_double(key, *v);
    };
    auto integer = [&](const std::string& key, int& dst) {
        if (auto v = raw.get(key)) dst = detail::to_int(key, *v);
    };
    num("beam.waist", c.beam.waist);
    integer("beam.l0", c.beam.l0);
    integer("beam.p0", c.beam.p0);
    num("werner.gamma", c.werner.gamma);
    double theta_pi = 0.5, phi_pi = 0.0;
    num("werner.theta", theta_pi);
    num("werner.phi", phi_pi);
    c.werner.theta = theta_pi * std::numbers::pi;
    c.werner.phi = phi_pi * std::numbers::pi;
    num("run.tol", c.tol);
    if (auto v = raw.get("run.output")) c.output = *v;
    if (auto v = raw.get("run.input")) c.input = *v;
    if (auto v = raw.get("run.form")) c.form = *v;
    if (auto v = raw.get("run.threads")) {
        const int t = detail::to_int("run.threads", *v);
        if (t < 0) throw ConfigError("run.threads must be >= 0");
        c.threads = static_cast<unsigned>(t);
    }

    const bool has_r0 = raw.has("turbulence.r0");
    const bool has_phys = raw.has("turbulence.cn2") || raw.has("turbulence.k") || raw.has("turbulence.L");
    const bool has_x = raw.has("turbulence.x");
    const bool has_grid =
        raw.has("turbulence.x_min") || raw.has("turbulence.x_max") || raw.has("turbulence.x_count");
    if (int(has_r0) + int(has_phys) + int(has_x) + int(has_grid) > 1)
        throw ConfigError("conflicting turbulence specifications: give exactly one of r0, (cn2, k, L), x, or a grid");
    if (has_r0) {
        c.mode = TurbulenceMode::r0;
        num("turbulence.r0", c.r0);
        if (!(c.r0 > 0.0)) throw ConfigError("turbulence.r0 must be positive");
    } else if (has_phys) {
        if (!(raw.has("turbulence.cn2") && raw.has("turbulence.k") && raw.has("turbulence.L")))
            throw ConfigError("physical turbulence needs all of cn2, k and L");
        c.mode = TurbulenceMode::physical;
        num("turbulence.cn2", c.cn2);
        num("turbulence.k", c.k);
        num("turbulence.L", c.path_length);
        if (!(c.cn2 > 0.0 && c.k > 0.0 && c.path_length > 0.0))
            throw ConfigError("cn2, k and L must all be positive");
    } else if (has_x) {
        c.mode = TurbulenceMode::x;
        num("turbulence.x", c.x);
        if (!(c.x >= 0.0) || !std::isfinite(c.x)) throw ConfigError("turbulence.x must be finite and >= 0");
    } else if (has_grid) {
        c.mode = TurbulenceMode::grid;
        num("turbulence.x_min", c.x_min);
        num("turbulence.x_max", c.x_max);
        integer("turbulence.x_count", c.x_count);
    }
    if (c.mode == TurbulenceMode::grid || c.mode == TurbulenceMode::none) {
        if (!(c.x_min >= 0.0) || !(c.x_max > c.x_min) || c.x_count < 2)
            throw ConfigError("grid needs 0 <= x_min < x_max and x_count >= 2");
    }

    try {
        c.beam.validate();
        c.werner.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(c.tol > 0.0)) throw ConfigError("run.tol must be positive");
    if (c.form != "poly" && c.form != "exp" && c.form != "both")
        throw ConfigError("run.form must be poly, exp or both");
    return c;
}

inline RunConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
    detail::RawOptions raw;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        raw.values = parse_config_text(in);
    }
    for (const auto& [k, v] : overrides) raw.values[k] = v;
    return build_config(raw);
}

// --- CSV ----------------------------------------------------------------------------------------

inline std::string rows_to_csv(std::span<const SweepRow> rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += format_number(r.x) + ',' + format_number(r.a) + ',' + format_number(r.b) + ',' +
               format_number(r.concurrence) + ',' + format_number(r.coherence) + ',' + format_number(r.lqu) +
               ',' + std::to_string(r.lqu_branch) + '\n';
    }
    return out;
}

inline std::vector<SweepRow> read_rows_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty CSV input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw ConfigError("CSV header mismatch: expected '" + std::string(kCsvHeader) + "'");
    std::vector<SweepRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 7) throw ConfigError("CSV line " + std::to_string(lineno) + ": expected 7 fields");
        const std::string where = "CSV line " + std::to_string(lineno);
        rows.push_back({detail::to_double(where, f[0]), detail::to_double(where, f[1]),
                        detail::to_double(where, f[2]), detail::to_double(where, f[3]),
                        detail::to_double(where, f[4]), detail::to_double(where, f[5]),
                        detail::to_int(where, f[6])});
    }
    return rows;
}

// --- commands -----------------------------------------------------------------------------------

inline void require_point_mode(const RunConfig& c) {
    if (c.mode == TurbulenceMode::none)
        throw ConfigError("missing turbulence specification: give r0, (cn2, k, L) or x");
    if (c.mode == TurbulenceMode::grid) throw ConfigError("this command takes a single turbulence point, not a grid");
}

inline void require_grid_mode(const RunConfig& c) {
    if (c.mode != TurbulenceMode::grid && c.mode != TurbulenceMode::none)
        throw ConfigError("this command takes an x grid (x_min, x_max, x_count), not a single point");
}

inline std::string cmd_channel(const RunConfig& c) {
    require_point_mode(c);
    const auto turb = c.turbulence();
    const auto cc = channel_ab(c.beam, turb, c.tol);
    std::string out;
    out += "a=" + format_number(cc.a) + '\n';
    out += "b=" + format_number(cc.b) + '\n';
    out += "err_a=" + format_number(cc.err_a) + '\n';
    out += "err_b=" + format_number(cc.err_b) + '\n';
    out += "x=" + format_number(x_ratio(c.beam, turb)) + '\n';
    out += "r0=" + format_number(turb.fried_r0) + '\n';
    out += "xi=" + format_number(phase_correlation_length(c.beam)) + '\n';
    return out;
}

inline std::string cmd_measures(const RunConfig& c) {
    require_point_mode(c);
    const auto turb = c.turbulence();
    const auto cc = channel_ab(c.beam, turb, c.tol);
    const auto m = evaluate_measures(apply_channel(werner_like(c.werner), cc));
    std::string out;
    out += "x=" + format_number(x_ratio(c.beam, turb)) + '\n';
    out += "a=" + format_number(cc.a) + '\n';
    out += "b=" + format_number(cc.b) + '\n';
    out += "concurrence=" + format_number(m.concurrence) + '\n';
    out += "coherence=" + format_number(m.coherence_rel_ent) + '\n';
    out += "lqu=" + format_number(m.lqu) + '\n';
    out += "lqu_branch=" + std::to_string(m.lqu_branch) + '\n';
    return out;
}

inline std::string cmd_sweep(const RunConfig& c) {
    require_grid_mode(c);
    const auto grid = c.grid();
    return rows_to_csv(sweep(c.beam, c.werner, grid, c.tol, c.threads));
}

inline std::string format_fit(const FitResult& f) {
    std::string out = std::string("form=") + form_name(f.form) + '\n';
    const auto names = param_names(f.form);
    for (int i = 0; i < 4; ++i) out += std::string(names[i]) + '=' + format_number(f.params[i]) + '\n';
    out += "rss=" + format_number(f.rss) + '\n';
    out += std::string("converged=") + (f.converged ? "true" : "false") + '\n';
    out += "iterations=" + std::to_string(f.iterations) + '\n';
    return out;
}

inline std::string cmd_fit(const RunConfig& c) {
    std::vector<SweepRow> rows;
    if (!c.input.empty()) {
        std::ifstream in(c.input);
        if (!in) throw ConfigError("cannot open input CSV '" + c.input + "'");
        rows = read_rows_csv(in);
    } else {
        require_grid_mode(c);
        rows = sweep(c.beam, c.werner, c.grid(), c.tol, c.threads);
    }
    if (rows.size() < 8) throw ConfigError("fit needs at least 8 rows");
    std::string out;
    if (c.form == "poly" || c.form == "both") out += format_fit(fit_poly_form(rows));
    if (c.form == "both") out += '\n';
    if (c.form == "exp" || c.form == "both") out += format_fit(fit_exp_form(rows));
    return out;
}

inline std::string cmd_esd(const RunConfig& c) {
    require_grid_mode(c);
    const auto esd = find_esd(c.beam, c.werner, c.tol, c.x_max, static_cast<std::size_t>(c.x_count));
    std::string out;
    if (esd.x)
        out += "esd_x=" + format_number(*esd.x) + '\n';
    else
        out += "esd_x=none\nesd_reason=" + esd.reason + '\n';
    const auto rows = sweep(c.beam, c.werner, c.grid(), c.tol, c.threads);
    const auto sc = detect_sudden_change(rows, SweepContext{c.beam, c.werner, c.tol});
    if (sc) {
        out += "sudden_change_x=" + format_number(sc->x) + '\n';
        out += "sudden_change_branches=" + std::to_string(sc->branch_before) + "->" +
               std::to_string(sc->branch_after) + '\n';
    } else {
        out += "sudden_change_x=none\n";
    }
    return out;
}

// --- entry point --------------------------------------------------------------------------------

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantumness of OAM photon pairs through Kolmogorov turbulence", "oamturb"};
    app.require_subcommand(1);

    std::string config_path;
    std::map<std::string, std::string> flags;
    struct Flag {
        const char* name;
        const char* key;
        const char* help;
    };
    static const Flag flag_table[] = {
        {"--waist", "beam.waist", "beam waist w0"},
        {"--l0", "beam.l0", "azimuthal index l0 (nonzero)"},
        {"--p0", "beam.p0", "radial index p0"},
        {"--gamma", "werner.gamma", "purity gamma in [0,1]"},
        {"--theta", "werner.theta", "Bell angle theta, in units of pi"},
        {"--phi", "werner.phi", "relative phase phi, in units of pi"},
        {"--r0", "turbulence.r0", "Fried parameter r0"},
        {"--cn2", "turbulence.cn2", "index-of-refraction structure constant Cn2"},
        {"--k", "turbulence.k", "optical wavenumber k"},
        {"--L", "turbulence.L", "propagation distance L"},
        {"--x", "turbulence.x", "dimensionless strength x = xi/r0"},
        {"--x-min", "turbulence.x_min", "grid start"},
        {"--x-max", "turbulence.x_max", "grid end"},
        {"--x-count", "turbulence.x_count", "grid size"},
        {"--tol", "run.tol", "absolute quadrature tolerance"},
        {"--output,-o", "run.output", "write the result here instead of stdout"},
        {"--input,-i", "run.input", "fit: read rows from this CSV instead of sweeping"},
        {"--form", "run.form", "fit: poly, exp or both"},
        {"--threads", "run.threads", "sweep worker threads (0 = hardware)"},
    };
    std::map<std::string, std::string> flag_values;
    std::vector<std::pair<CLI::Option*, std::string>> bound;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config,-c", config_path, "sectioned key = value configuration file");
        for (const auto& f : flag_table) bound.emplace_back(sub->add_option(f.name, flag_values[f.key], f.help), f.key);
    };
    auto* channel = app.add_subcommand("channel", "survival/crosstalk coefficients a, b at one turbulence point");
    auto* measures = app.add_subcommand("measures", "concurrence, coherence and LQU at one turbulence point");
    auto* sweep_cmd = app.add_subcommand("sweep", "CSV of all measures over an x grid");
    auto* fit = app.add_subcommand("fit", "fit the universal decay forms");
    auto* esd = app.add_subcommand("esd", "entanglement sudden death and LQU sudden change");
    for (auto* s : {channel, measures, sweep_cmd, fit, esd}) add_common(s);

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    for (const auto& [opt, key] : bound)
        if (opt->count() > 0) flags[key] = flag_values[key];

    try {
        const RunConfig cfg = load_config(config_path, flags);
        std::string result;
        if (channel->parsed())
            result = cmd_channel(cfg);
        else if (measures->parsed())
            result = cmd_measures(cfg);
        else if (sweep_cmd->parsed())
            result = cmd_sweep(cfg);
        else if (fit->parsed())
            result = cmd_fit(cfg);
        else
            result = cmd_esd(cfg);

        if (cfg.output.empty()) {
            out << result;
        } else {
            std::ofstream f(cfg.output, std::ios::binary | std::ios::trunc);
            if (!f) throw ConfigError("cannot open output file '" + cfg.output + "'");
            f << result;
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumeric;
    }
}

}  // namespace oamturb::cli
