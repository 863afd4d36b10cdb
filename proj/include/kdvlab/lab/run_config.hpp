#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdvlab/exact.hpp"
#include "kdvlab/grid.hpp"
#include "kdvlab/rhs.hpp"
#include "kdvlab/stepper.hpp"

namespace kdv {

/// Configuration rejected: bad value, unknown key, unreadable file.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

/// %.17g: shortest form that round-trips a double exactly, so a manifest
/// reload reproduces the run bit for bit.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) throw ConfigError(key + ": empty value");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
        throw ConfigError(key + ": cannot parse number '" + s + "'");
    if (!std::isfinite(v)) throw ConfigError(key + ": value must be finite");
    return v;
}

inline long parse_int(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) throw ConfigError(key + ": empty value");
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size())
        throw ConfigError(key + ": cannot parse integer '" + s + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& raw) {
    std::vector<double> out;
    const std::string s = trim(raw);
    if (s.empty()) return out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = s.find(',', pos);
        const std::string item =
            comma == std::string::npos ? s.substr(pos) : s.substr(pos, comma - pos);
        out.push_back(parse_double(key, item));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(v[i]);
    }
    return out;
}

}  // namespace detail

enum class InitialKind { Soliton, Tsutsumi, File };

struct InitialData {
    InitialKind kind = InitialKind::Soliton;
    double c = 1.0;          // soliton speed parameter, or the rational family's c
    double eps = 1.0;        // rational family only
    std::string path;        // file kind only
};

enum class WindowMode { Fixed, Moving };

/// Spatial window for error measurement. Moving mode shifts [a, b] by the
/// soliton displacement c^2 * T before comparing.
struct ErrorWindow {
    WindowMode mode = WindowMode::Fixed;
    double a = -10.0;
    double b = 10.0;
};

/// Complete description of one simulation run; every experiment starts here.
/// Serializes to a sectioned key=value manifest that reloads to the identical
/// configuration.
struct RunConfig {
    ModelParams model{1, 1.0, 0.01};
    double x_min = -20.0;
    double x_max = 20.0;
    std::size_t n_points = 1024;
    BoundaryMode boundary = BoundaryMode::Periodic;
    StepperConfig stepper;  // tau, Newton settings, monitor radius
    double T = 1.0;
    InitialData initial;
    ErrorWindow window;
    std::vector<double> snapshot_times;
    std::string output_dir = "out";

    /// Apply one dotted-key assignment ("section.key", raw text value).
    /// Unknown keys are errors.
    void set(const std::string& key, const std::string& raw) {
        using detail::parse_bool;
        using detail::parse_double;
        using detail::parse_double_list;
        using detail::parse_int;
        const std::string v = detail::trim(raw);

        if (key == "model.k") model.k = static_cast<int>(parse_int(key, v));
        else if (key == "model.beta") model.beta = parse_double(key, v);
        else if (key == "model.eta") model.eta = parse_double(key, v);
        else if (key == "grid.x_min") x_min = parse_double(key, v);
        else if (key == "grid.x_max") x_max = parse_double(key, v);
        else if (key == "grid.n_points") {
            const long n = parse_int(key, v);
            if (n < 0) throw ConfigError(key + ": must be nonnegative");
            n_points = static_cast<std::size_t>(n);
        } else if (key == "grid.boundary") {
            if (v == "periodic") boundary = BoundaryMode::Periodic;
            else if (v == "zero_extension" || v == "zero") boundary = BoundaryMode::ZeroExtension;
            else throw ConfigError(key + ": expected periodic or zero_extension, got '" + v + "'");
        } else if (key == "time.tau") stepper.tau = parse_double(key, v);
        else if (key == "time.T") T = parse_double(key, v);
        else if (key == "newton.tol") stepper.newton_tol = parse_double(key, v);
        else if (key == "newton.max_iters")
            stepper.newton_max_iters = static_cast<int>(parse_int(key, v));
        else if (key == "newton.freeze_jacobian") stepper.freeze_jacobian = parse_bool(key, v);
        else if (key == "initial.kind") {
            if (v == "soliton") initial.kind = InitialKind::Soliton;
            else if (v == "tsutsumi") initial.kind = InitialKind::Tsutsumi;
            else if (v == "file") initial.kind = InitialKind::File;
            else throw ConfigError(key + ": expected soliton, tsutsumi or file, got '" + v + "'");
        } else if (key == "initial.c") initial.c = parse_double(key, v);
        else if (key == "initial.eps") initial.eps = parse_double(key, v);
        else if (key == "initial.path") initial.path = v;
        else if (key == "error.mode") {
            if (v == "fixed") window.mode = WindowMode::Fixed;
            else if (v == "moving") window.mode = WindowMode::Moving;
            else throw ConfigError(key + ": expected fixed or moving, got '" + v + "'");
        } else if (key == "error.window_a") window.a = parse_double(key, v);
        else if (key == "error.window_b") window.b = parse_double(key, v);
        else if (key == "error.radius") {
            const double r = parse_double(key, v);
            if (!(r > 0.0)) throw ConfigError(key + ": must be positive");
            window.a = -r;
            window.b = r;
        } else if (key == "monitor.radius") stepper.smoothing_radius = parse_double(key, v);
        else if (key == "output.directory") output_dir = v;
        else if (key == "output.snapshot_times") snapshot_times = parse_double_list(key, v);
        else throw ConfigError("unknown configuration key '" + key + "'");
    }

    void validate() const {
        try {
            model.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("model: ") + e.what());
        }
        if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max))
            throw ConfigError("grid.x_min/x_max: need x_min < x_max, both finite");
        if (n_points < 5) throw ConfigError("grid.n_points: must be >= 5");
        if (n_points > 10'000'000) throw ConfigError("grid.n_points: exceeds size budget");
        try {
            stepper.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("time/newton: ") + e.what());
        }
        if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("time.T: must be positive");
        switch (initial.kind) {
            case InitialKind::Soliton:
                if (!(initial.c > 0.0) || !std::isfinite(initial.c))
                    throw ConfigError("initial.c: soliton speed parameter must be positive");
                break;
            case InitialKind::Tsutsumi:
                if (!std::isfinite(initial.c) || !std::isfinite(initial.eps))
                    throw ConfigError("initial.c/eps: must be finite");
                break;
            case InitialKind::File:
                if (initial.path.empty())
                    throw ConfigError("initial.path: required for file initial data");
                break;
        }
        if (!(window.a < window.b))
            throw ConfigError("error.window_a/b: need window_a < window_b");
        double shift = 0.0;
        if (window.mode == WindowMode::Moving) {
            if (initial.kind != InitialKind::Soliton)
                throw ConfigError("error.mode: moving window requires soliton initial data");
            shift = initial.c * initial.c * T;
        }
        if (window.a + shift < x_min || window.b + shift > x_max)
            throw ConfigError("error.window_a/b: window leaves the spatial domain");
        for (const double s : snapshot_times)
            if (!(s >= 0.0) || s > T)
                throw ConfigError("output.snapshot_times: times must lie in [0, T]");
    }

    Grid make_grid() const {
        return Grid::uniform(x_min, x_max, n_points, boundary);
    }

    /// The window actually used for error measurement (moving mode shifts it).
    std::pair<double, double> resolved_window() const {
        double shift = 0.0;
        if (window.mode == WindowMode::Moving) shift = initial.c * initial.c * T;
        return {window.a + shift, window.b + shift};
    }
};

GridFunction load_state_csv(const std::string& path, const Grid& grid);

inline GridFunction make_initial_state(const RunConfig& cfg, const Grid& grid) {
    switch (cfg.initial.kind) {
        case InitialKind::Soliton: {
            SolitonParams p{cfg.model.k, cfg.initial.c};
            return soliton_profile(grid, p, 0.0);
        }
        case InitialKind::Tsutsumi: {
            TsutsumiParams p{cfg.initial.c, cfg.initial.eps};
            try {
                return tsutsumi_data(grid, p);
            } catch (const std::domain_error& e) {
                throw ConfigError(std::string("initial: ") + e.what());
            }
        }
        case InitialKind::File:
            return load_state_csv(cfg.initial.path, grid);
    }
    throw ConfigError("initial.kind: unreachable");
}

// ---------------------------------------------------------------------------
// Serialization: sectioned key=value text. '#' starts a comment, [result] is
// an informational echo ignored on load.
// ---------------------------------------------------------------------------

inline void write_run_config(std::ostream& os, const RunConfig& cfg) {
    using detail::fmt_double;
    os << "[model]\n";
    os << "k = " << cfg.model.k << "\n";
    os << "beta = " << fmt_double(cfg.model.beta) << "\n";
    os << "eta = " << fmt_double(cfg.model.eta) << "\n";
    os << "\n[grid]\n";
    os << "x_min = " << fmt_double(cfg.x_min) << "\n";
    os << "x_max = " << fmt_double(cfg.x_max) << "\n";
    os << "n_points = " << cfg.n_points << "\n";
    os << "boundary = "
       << (cfg.boundary == BoundaryMode::Periodic ? "periodic" : "zero_extension") << "\n";
    os << "\n[time]\n";
    os << "tau = " << fmt_double(cfg.stepper.tau) << "\n";
    os << "T = " << fmt_double(cfg.T) << "\n";
    os << "\n[newton]\n";
    os << "tol = " << fmt_double(cfg.stepper.newton_tol) << "\n";
    os << "max_iters = " << cfg.stepper.newton_max_iters << "\n";
    os << "freeze_jacobian = " << (cfg.stepper.freeze_jacobian ? "true" : "false") << "\n";
    os << "\n[initial]\n";
    switch (cfg.initial.kind) {
        case InitialKind::Soliton:
            os << "kind = soliton\n";
            os << "c = " << fmt_double(cfg.initial.c) << "\n";
            break;
        case InitialKind::Tsutsumi:
            os << "kind = tsutsumi\n";
            os << "c = " << fmt_double(cfg.initial.c) << "\n";
            os << "eps = " << fmt_double(cfg.initial.eps) << "\n";
            break;
        case InitialKind::File:
            os << "kind = file\n";
            os << "path = " << cfg.initial.path << "\n";
            break;
    }
    os << "\n[error]\n";
    os << "mode = " << (cfg.window.mode == WindowMode::Fixed ? "fixed" : "moving") << "\n";
    os << "window_a = " << fmt_double(cfg.window.a) << "\n";
    os << "window_b = " << fmt_double(cfg.window.b) << "\n";
    os << "\n[monitor]\n";
    os << "radius = " << fmt_double(cfg.stepper.smoothing_radius) << "\n";
    os << "\n[output]\n";
    os << "directory = " << cfg.output_dir << "\n";
    os << "snapshot_times = " << detail::join_doubles(cfg.snapshot_times) << "\n";
}

/// Parse a config stream into cfg (on top of existing values, so partial
/// files override defaults). Lines in [result] are skipped.
inline void parse_run_config(std::istream& in, RunConfig& cfg) {
    static const char* const known_sections[] = {"model", "grid",    "time",   "newton",
                                                 "initial", "error", "monitor", "output",
                                                 "result"};
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = detail::trim(s.substr(1, s.size() - 2));
            bool known = false;
            for (const char* k : known_sections) known = known || section == k;
            if (!known)
                throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" +
                                  section + "]");
            continue;
        }
        if (section == "result") continue;
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        const std::string key = section + "." + detail::trim(s.substr(0, eq));
        try {
            cfg.set(key, s.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    RunConfig cfg;
    parse_run_config(in, cfg);
    return cfg;
}

// ---------------------------------------------------------------------------
// State CSV: '#' comments, "x,u" header, one node per record. The same format
// is written by the solver and accepted as file initial data.
// ---------------------------------------------------------------------------

inline void write_state_csv(std::ostream& os, const GridFunction& u,
                            const std::vector<std::string>& comments = {}) {
    for (const auto& c : comments) os << "# " << c << "\n";
    os << "x,u\n";
    const Grid& g = u.grid();
    for (std::size_t j = 0; j < u.size(); ++j)
        os << detail::fmt_double(g.x(static_cast<std::ptrdiff_t>(j))) << ","
           << detail::fmt_double(u[j]) << "\n";
}

inline GridFunction load_state_csv(const std::string& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open state file '" + path + "'");
    GridFunction u(grid);
    std::string line;
    std::size_t j = 0;
    bool seen_header = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (!seen_header) {
            if (s != "x,u")
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": expected header 'x,u'");
            seen_header = true;
            continue;
        }
        const std::size_t comma = s.find(',');
        if (comma == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected x,u record");
        if (j >= grid.size())
            throw ConfigError(path + ": more records than grid points (" +
                              std::to_string(grid.size()) + ")");
        const double x = detail::parse_double("x", s.substr(0, comma));
        const double value = detail::parse_double("u", s.substr(comma + 1));
        const double xg = grid.x(static_cast<std::ptrdiff_t>(j));
        if (std::abs(x - xg) > 1e-9 * std::max(1.0, std::abs(xg)))
            throw ConfigError(path + ":" + std::to_string(lineno) + ": node " +
                              std::to_string(j) + " at x=" + detail::fmt_double(x) +
                              " does not match grid x=" + detail::fmt_double(xg));
        u[j] = value;
        ++j;
    }
    if (j != grid.size())
        throw ConfigError(path + ": has " + std::to_string(j) + " records, grid needs " +
                          std::to_string(grid.size()));
    return u;
}

}  // namespace kdv
