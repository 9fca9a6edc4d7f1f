#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "gcflow/errors.hpp"
#include "gcflow/flow_operator.hpp"
#include "gcflow/sphere_grid.hpp"
#include "gcflow/time_integrator.hpp"

namespace gcflow {

// Flat `key = value` text format with [section] headers. Parsing is strict:
// unknown sections or keys are errors, every value must consume its token
// completely, and range checks happen at load so a bad config never reaches
// the solver.

struct MissingKeyError : ConfigError {
    explicit MissingKeyError(const std::string& key)
        : ConfigError("missing required key: " + key) {}
};
struct UnknownKeyError : ConfigError {
    explicit UnknownKeyError(const std::string& key) : ConfigError("unknown key: " + key) {}
};
struct OutOfRangeError : ConfigError {
    OutOfRangeError(const std::string& key, const std::string& why)
        : ConfigError("key out of range: " + key + " (" + why + ")") {}
};

enum class InitialType { constant, bump, file };

struct InitialConfig {
    InitialType type = InitialType::constant;
    double value = 0.0;       // constant
    double amplitude = 0.0;   // bump
    double width = -1.0;      // bump; <= 0 means "use rho"
    double base = 0.0;        // bump
    std::string path;         // file: one nodal value per line, grid order
};

struct OutputConfig {
    std::string report = "report.csv";
    int snapshot_every = 0;   // in recorded samples; 0 disables snapshots
    std::string snapshot_prefix = "snapshot";
    bool mesh = false;
    std::string mesh_path = "surface.obj";
};

struct RunConfig {
    DomainSpec domain;
    FlowParams params;
    InitialConfig initial;
    OutputConfig output;
    std::uint64_t seed = 12345;
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& key, const std::string& value) {
    size_t pos = 0;
    double x;
    try {
        x = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw OutOfRangeError(key, "not a number: '" + value + "'");
    }
    if (pos != value.size()) throw OutOfRangeError(key, "trailing characters: '" + value + "'");
    return x;
}

inline long parse_int(const std::string& key, const std::string& value) {
    size_t pos = 0;
    long x;
    try {
        x = std::stol(value, &pos);
    } catch (const std::exception&) {
        throw OutOfRangeError(key, "not an integer: '" + value + "'");
    }
    if (pos != value.size()) throw OutOfRangeError(key, "trailing characters: '" + value + "'");
    return x;
}

} // namespace detail

inline RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    cfg.params.t_end = -1.0; // no default stopping time: the config must choose

    std::string section;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    bool mode_given = false;

    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "domain" && section != "flow" && section != "initial" &&
                section != "output")
                throw UnknownKeyError("[" + section + "]");
            continue;
        }

        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const std::string qkey = section + "." + key;
        if (!seen.insert(qkey).second) throw ConfigError("duplicate key: " + qkey);

        auto num = [&] { return detail::parse_double(qkey, value); };
        auto integer = [&] { return detail::parse_int(qkey, value); };

        if (section == "domain") {
            if (key == "n") cfg.domain.n = static_cast<int>(integer());
            else if (key == "rho") cfg.domain.rho = num();
            else if (key == "nr") cfg.domain.nr = static_cast<int>(integer());
            else if (key == "ntheta") cfg.domain.ntheta = static_cast<int>(integer());
            else if (key == "mode") {
                mode_given = true;
                if (value == "axisymmetric") cfg.domain.mode = Mode::axisymmetric;
                else if (value == "full2d") cfg.domain.mode = Mode::full2d;
                else throw OutOfRangeError(qkey, "expected axisymmetric or full2d");
            } else throw UnknownKeyError(qkey);
        } else if (section == "flow") {
            if (key == "alpha") cfg.params.alpha = num();
            else if (key == "cfl") cfg.params.cfl = num();
            else if (key == "t_end") cfg.params.t_end = num();
            else if (key == "s_end") cfg.params.s_end = num();
            else if (key == "dt_min") cfg.params.dt_min = num();
            else if (key == "dt_max") cfg.params.dt_max = num();
            else if (key == "c_rescale") cfg.params.c_rescale = num();
            else if (key == "monitor_every") cfg.params.monitor_every = static_cast<int>(integer());
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(integer());
            else throw UnknownKeyError(qkey);
        } else if (section == "initial") {
            if (key == "type") {
                if (value == "constant") cfg.initial.type = InitialType::constant;
                else if (value == "bump") cfg.initial.type = InitialType::bump;
                else if (value == "file" || value == "tabulated") cfg.initial.type = InitialType::file;
                else throw OutOfRangeError(qkey, "expected constant, bump, or file");
            } else if (key == "value") cfg.initial.value = num();
            else if (key == "amplitude") cfg.initial.amplitude = num();
            else if (key == "width") cfg.initial.width = num();
            else if (key == "base") cfg.initial.base = num();
            else if (key == "path") cfg.initial.path = value;
            else throw UnknownKeyError(qkey);
        } else if (section == "output") {
            if (key == "report") cfg.output.report = value;
            else if (key == "snapshot_every") cfg.output.snapshot_every = static_cast<int>(integer());
            else if (key == "snapshot_prefix") cfg.output.snapshot_prefix = value;
            else if (key == "mesh") cfg.output.mesh = integer() != 0;
            else if (key == "mesh_path") cfg.output.mesh_path = value;
            else throw UnknownKeyError(qkey);
        } else {
            throw UnknownKeyError(key + " (before any section header)");
        }
    }

    // required keys
    if (!seen.count("domain.n")) throw MissingKeyError("domain.n");
    if (!seen.count("domain.rho")) throw MissingKeyError("domain.rho");
    if (!seen.count("flow.alpha")) throw MissingKeyError("flow.alpha");
    if (!seen.count("flow.t_end") && !seen.count("flow.s_end"))
        throw MissingKeyError("flow.t_end (or flow.s_end)");
    if (!seen.count("initial.type")) throw MissingKeyError("initial.type");
    if (cfg.initial.type == InitialType::file && cfg.initial.path.empty())
        throw MissingKeyError("initial.path");

    // range checks, phrased against the theory's hypotheses
    if (!(cfg.params.alpha > 0.0 && cfg.params.alpha < 1.0))
        throw OutOfRangeError("flow.alpha", "0<alpha<1");
    if (cfg.domain.n != 1 && cfg.domain.n != 2)
        throw OutOfRangeError("domain.n", "n must be 1 or 2");
    if (!(cfg.domain.rho > 0.0 && cfg.domain.rho < std::numbers::pi / 2.0))
        throw OutOfRangeError("domain.rho", "0 < rho < pi/2");
    if (cfg.domain.nr < 8) throw OutOfRangeError("domain.nr", "nr >= 8");
    if (mode_given && cfg.domain.n == 1 && cfg.domain.mode == Mode::full2d)
        throw OutOfRangeError("domain.mode", "full2d requires n = 2");
    if (!(cfg.params.cfl > 0.0 && cfg.params.cfl <= 0.5))
        throw OutOfRangeError("flow.cfl", "0 < cfl <= 0.5");
    if (seen.count("flow.t_end") && cfg.params.t_end <= 0.0)
        throw OutOfRangeError("flow.t_end", "must be positive");
    if (seen.count("flow.s_end") && cfg.params.s_end <= 0.0)
        throw OutOfRangeError("flow.s_end", "must be positive");
    if (seen.count("flow.t_end") && seen.count("flow.s_end"))
        throw OutOfRangeError("flow.s_end", "give only one of t_end / s_end");
    if (cfg.params.monitor_every < 1)
        throw OutOfRangeError("flow.monitor_every", "must be >= 1");
    if (cfg.output.snapshot_every < 0)
        throw OutOfRangeError("output.snapshot_every", "must be >= 0");
    if (cfg.initial.type == InitialType::bump && seen.count("initial.width") &&
        cfg.initial.width <= 0.0)
        throw OutOfRangeError("initial.width", "must be positive");

    return cfg;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

// Realize the configured initial data on a grid and certify admissibility
// (w > 0 and Neumann-compatible boundary data) before the flow starts.
inline GraphField make_initial_field(const RunConfig& cfg, const Grid& grid) {
    GraphField f;
    switch (cfg.initial.type) {
    case InitialType::constant:
        f = GraphField::constant(grid, cfg.initial.value);
        break;
    case InitialType::bump: {
        const double width = cfg.initial.width > 0.0 ? cfg.initial.width : grid.spec.rho;
        f = bump_field(grid, cfg.initial.base, cfg.initial.amplitude, width);
        break;
    }
    case InitialType::file: {
        std::ifstream in(cfg.initial.path);
        if (!in) throw ConfigError("cannot open initial data file: " + cfg.initial.path);
        f = GraphField::constant(grid, 0.0);
        for (int i = 0; i < grid.num_nodes(); ++i)
            if (!(in >> f.phi[i]))
                throw ConfigError("initial data file " + cfg.initial.path + ": expected " +
                                  std::to_string(grid.num_nodes()) + " values, got " +
                                  std::to_string(i));
        double extra;
        if (in >> extra)
            throw ConfigError("initial data file " + cfg.initial.path + ": too many values");
        break;
    }
    }

    // admissibility at load: the bump invariant and file data both go
    // through the same certificate
    apply_neumann_bc(f, grid);
    const auto wf = compute_w(f, grid);
    if (wf.global_min_eig() <= 0.0)
        throw NonAdmissibleError("initial data is not admissible: min_eig(w) = " +
                                 std::to_string(wf.global_min_eig()));
    f.ghost_valid = false;
    return f;
}

} // namespace gcflow
