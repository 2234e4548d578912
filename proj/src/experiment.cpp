#include "hjb/experiment.hpp"

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "hjb/errors.hpp"
#include "hjb/report_io.hpp"

namespace hjb {

namespace fs = std::filesystem;

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::VI: return "VI";
        case Algorithm::PI: return "PI";
        case Algorithm::API: return "API";
    }
    return "?";
}

int desk_node_limit(int dim) {
    switch (dim) {
        case 1: return 100001;
        case 2: return 321;
        case 3: return 81;
        default: return 41;
    }
}

CatalogEntry make_entry(const std::string& problem, ProblemOverrides overrides, int fine_nodes) {
    if (!overrides.mesh_spacing && fine_nodes >= 2) {
        const auto probe = catalog(problem, overrides);
        overrides.mesh_spacing = (probe.spec.upper[0] - probe.spec.lower[0]) / (fine_nodes - 1);
    }
    return catalog(problem, overrides);
}

Solution solve(const CatalogEntry& entry, const RunSettings& s, std::size_t node_cap) {
    const auto& spec = entry.spec;
    const auto fine = make_grid(spec, s.fine_nodes, node_cap);
    SolverConfig cfg;
    cfg.dt = entry.dt_ratio * fine.min_spacing();
    cfg.stop_constant = s.stop_constant;
    cfg.max_iterations = s.max_iterations;
    cfg.eval_backend = s.backend;
    cfg.record_residuals = s.record_residuals;
    switch (s.algorithm) {
        case Algorithm::VI:
            return value_iteration(spec, fine, entry.controls, cfg);
        case Algorithm::PI: {
            const auto start = initial_guess(spec, fine);
            PolicyField policy0(fine, 0);
            return policy_iteration(spec, fine, entry.controls, cfg, policy0, start);
        }
        case Algorithm::API: {
            const int nc = s.coarse_nodes > 0 ? s.coarse_nodes : (s.fine_nodes + 1) / 2;
            const auto coarse = make_grid(spec, nc, node_cap);
            SolverConfig ccfg = cfg;
            ccfg.dt = entry.dt_ratio * coarse.min_spacing();
            ccfg.stop_constant = s.coarse_constant;
            return api_solve(spec, coarse, fine, entry.controls, ccfg, cfg);
        }
    }
    throw InvalidArgument("unknown algorithm");
}

SliceRequest parse_slice(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw InvalidArgument("slice must look like axis=value, got '" + text + "'");
    std::string axis = text.substr(0, eq);
    if (!axis.empty() && (axis[0] == 'x' || axis[0] == 'X')) axis.erase(0, 1);
    char* end = nullptr;
    errno = 0;
    const long a = std::strtol(axis.c_str(), &end, 10);
    if (axis.empty() || *end != '\0' || errno || a < 1 || a > kMaxDim)
        throw InvalidArgument("slice axis must be 1.." + std::to_string(kMaxDim) + ", got '" + axis + "'");
    const std::string value = text.substr(eq + 1);
    const double c = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0' || !std::isfinite(c))
        throw InvalidArgument("slice coordinate is not a number: '" + value + "'");
    return {static_cast<int>(a) - 1, c};
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x))
        throw ConfigError(key, "expected a decimal real, got '" + v + "'");
    return x;
}

int parse_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    errno = 0;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0' || errno == ERANGE || x < INT32_MIN || x > INT32_MAX)
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

void apply_entry(ExperimentConfig& c, const std::string& key, const std::string& v) {
    if (key == "problem.name") {
        c.problem = v;
    } else if (key == "problem.domain.lower") {
        c.overrides.domain_lower = parse_real(key, v);
    } else if (key == "problem.domain.upper") {
        c.overrides.domain_upper = parse_real(key, v);
    } else if (key == "problem.controls") {
        std::vector<int> counts;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) counts.push_back(parse_int(key, trim(item)));
        if (counts.empty()) throw ConfigError(key, "expected comma-separated counts");
        c.overrides.control_counts = counts;
    } else if (key == "problem.dt_ratio") {
        c.overrides.dt_ratio = parse_real(key, v);
    } else if (key == "problem.exterior_value") {
        c.overrides.exterior_value = parse_real(key, v);
    } else if (key == "problem.target_radius") {
        c.overrides.target_radius = parse_real(key, v);
    } else if (key == "problem.discount") {
        c.overrides.discount_rate = parse_real(key, v);
    } else if (key == "algorithm") {
        if (v == "VI" || v == "vi")
            c.algorithm = Algorithm::VI;
        else if (v == "PI" || v == "pi")
            c.algorithm = Algorithm::PI;
        else if (v == "API" || v == "api")
            c.algorithm = Algorithm::API;
        else
            throw ConfigError(key, "expected VI, PI or API, got '" + v + "'");
    } else if (key == "grid.fine.nodes") {
        c.fine_nodes = parse_int(key, v);
    } else if (key == "grid.coarse.nodes") {
        c.coarse_nodes = parse_int(key, v);
    } else if (key == "solver.stop_constant") {
        c.stop_constant = parse_real(key, v);
    } else if (key == "solver.max_iterations") {
        c.max_iterations = parse_int(key, v);
    } else if (key == "solver.backend") {
        if (v == "fixed_point")
            c.backend = EvalBackend::FixedPoint;
        else if (v == "direct")
            c.backend = EvalBackend::DirectLinear;
        else
            throw ConfigError(key, "expected fixed_point or direct, got '" + v + "'");
    } else if (key == "api.coarse_constant") {
        c.coarse_constant = parse_real(key, v);
    } else if (key == "output.dir") {
        c.output_dir = v;
    } else if (key == "output.field") {
        c.export_field = parse_bool(key, v);
    } else if (key == "output.slice") {
        try {
            c.slice = parse_slice(v);
        } catch (const InvalidArgument& e) {
            throw ConfigError(key, e.what());
        }
    } else if (key == "limits.allow_large") {
        c.allow_large = parse_bool(key, v);
    } else {
        throw ConfigError(key, "unknown key");
    }
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig c;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");
        if (!seen.insert(key).second) throw ConfigError(key, "given more than once");
        apply_entry(c, key, value);
        c.entries.emplace_back(key, value);
    }
    c.validate();
    return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    return parse_config(in);
}

void ExperimentConfig::validate() const {
    if (problem.empty()) throw ConfigError("problem.name", "missing");
    if (fine_nodes == 0) throw ConfigError("grid.fine.nodes", "missing");
    if (fine_nodes < 3) throw ConfigError("grid.fine.nodes", "needs at least 3 nodes per axis");
    if (!(stop_constant > 0.0)) throw ConfigError("solver.stop_constant", "must be positive");
    if (!(coarse_constant > 0.0)) throw ConfigError("api.coarse_constant", "must be positive");
    if (max_iterations < 1) throw ConfigError("solver.max_iterations", "must be at least 1");
    CatalogEntry entry = [&] {
        try {
            return make_entry(problem, overrides, fine_nodes);
        } catch (const InvalidArgument& e) {
            throw ConfigError("problem.name", e.what());
        }
    }();
    const int dim = entry.spec.state_dim;
    if (!allow_large && fine_nodes > desk_node_limit(dim))
        throw ConfigError("grid.fine.nodes", std::to_string(fine_nodes) + " exceeds the desk limit of " +
                                                 std::to_string(desk_node_limit(dim)) + " for dimension " +
                                                 std::to_string(dim) + " (set limits.allow_large)");
    if (algorithm == Algorithm::API) {
        if (fine_nodes % 2 == 0)
            throw ConfigError("grid.fine.nodes", "API needs an odd fine node count (2 * coarse - 1)");
        if (coarse_nodes != 0 && 2 * coarse_nodes - 1 != fine_nodes)
            throw ConfigError("grid.coarse.nodes", "must satisfy fine = 2 * coarse - 1");
    } else if (coarse_nodes != 0) {
        throw ConfigError("grid.coarse.nodes", "only used by API");
    }
    if (slice && slice->axis >= dim)
        throw ConfigError("output.slice", "axis beyond the problem dimension");
    if (slice && dim == 1) throw ConfigError("output.slice", "cannot slice a one-dimensional field");
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move result into place at " + path.string());
    }
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto entry = make_entry(config.problem, config.overrides, config.fine_nodes);
    RunSettings s;
    s.algorithm = config.algorithm;
    s.fine_nodes = config.fine_nodes;
    s.coarse_nodes = config.coarse_nodes;
    s.stop_constant = config.stop_constant;
    s.coarse_constant = config.coarse_constant;
    s.max_iterations = config.max_iterations;
    s.backend = config.backend;
    auto sol = solve(entry, s, config.allow_large ? std::size_t{1} << 40 : kDefaultNodeCap);

    ExperimentResult r;
    r.config = config;
    r.report = sol.report;

    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw IoError("cannot create output directory " + config.output_dir.string());

    std::ostringstream echo;
    for (const auto& [k, v] : config.entries) echo << k << " = " << v << '\n';
    const auto config_path = config.output_dir / "config.txt";
    write_file_atomic(config_path, echo.str());
    r.files.push_back(config_path);

    std::ostringstream report;
    write_report(report, sol.report);
    const auto report_path = config.output_dir / "report.json";
    write_file_atomic(report_path, report.str());
    r.files.push_back(report_path);

    if (config.export_field) {
        std::ostringstream field;
        write_field_table(field, sol.values);
        const auto p = config.output_dir / "field.txt";
        write_file_atomic(p, field.str());
        r.files.push_back(p);
    }
    if (config.slice) {
        std::ostringstream field;
        write_field_table(field, slice(sol.values, config.slice->axis, config.slice->coordinate));
        const auto p = config.output_dir / "slice.txt";
        write_file_atomic(p, field.str());
        r.files.push_back(p);
    }
    if (entry.reference) {
        r.error = error_vs_reference(sol.values, entry.reference);
        std::ostringstream table;
        const ErrorRecord rec[] = {*r.error};
        const int nodes[] = {config.fine_nodes};
        write_rate_table(table, rec, nodes);
        const auto p = config.output_dir / "errors.csv";
        write_file_atomic(p, table.str());
        r.files.push_back(p);
    }
    r.values = std::move(sol.values);
    return r;
}

int exit_status(const ExperimentResult& result) {
    return result.report.converged ? exit_code::ok : exit_code::not_converged;
}

fs::path export_field(const fs::path& result_dir, const fs::path& out_dir, const std::string& format,
                      const std::optional<SliceRequest>& request) {
    const auto source = result_dir / "field.txt";
    std::ifstream in(source);
    if (!in) throw IoError("no field export found at " + source.string());
    const auto field = read_field_table(in);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string());
    std::ostringstream out;
    fs::path target;
    if (format == "table") {
        write_field_table(out, field);
        target = out_dir / "field_table.txt";
    } else if (format == "slice") {
        if (!request) throw InvalidArgument("slice export needs --slice axis=value");
        if (request->axis >= field.grid().dim()) throw InvalidArgument("slice axis beyond the field dimension");
        write_field_table(out, slice(field, request->axis, request->coordinate));
        std::ostringstream name;
        name << "slice_x" << request->axis + 1 << ".txt";
        target = out_dir / name.str();
    } else {
        throw InvalidArgument("format must be table or slice, got '" + format + "'");
    }
    write_file_atomic(target, out.str());
    return target;
}

}  // namespace hjb
