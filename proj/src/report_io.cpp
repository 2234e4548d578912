#include "hjb/report_io.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

#include "hjb/errors.hpp"

namespace hjb {

namespace {

using nlohmann::ordered_json;

ordered_json to_json(const RunReport& r, bool with_time) {
    ordered_json j;
    j["algorithm"] = r.algorithm;
    j["grid_nodes"] = r.grid_nodes;
    j["dx"] = r.dx;
    j["dt"] = r.dt;
    j["control_count"] = r.control_count;
    j["tolerance"] = r.tolerance;
    j["iterations"] = r.outer_iterations;
    j["converged"] = r.converged;
    j["sub_iterations"] = r.sub_iteration_history;
    j["node_updates"] = r.node_updates;
    j["interpolations"] = r.interpolations;
    if (with_time) j["wall_seconds"] = r.wall_time_seconds;
    j["residual_history"] = r.residual_history;
    if (!r.phases.empty()) {
        j["phases"] = ordered_json::array();
        for (const auto& p : r.phases) j["phases"].push_back(to_json(p, with_time));
    }
    return j;
}

RunReport from_json(const ordered_json& j) {
    RunReport r;
    r.algorithm = j.at("algorithm").get<std::string>();
    r.grid_nodes = j.at("grid_nodes").get<std::vector<int>>();
    r.dx = j.at("dx").get<double>();
    r.dt = j.at("dt").get<double>();
    r.control_count = j.at("control_count").get<std::size_t>();
    r.tolerance = j.at("tolerance").get<double>();
    r.outer_iterations = j.at("iterations").get<int>();
    r.converged = j.at("converged").get<bool>();
    r.sub_iteration_history = j.at("sub_iterations").get<std::vector<int>>();
    r.node_updates = j.at("node_updates").get<std::uint64_t>();
    r.interpolations = j.value("interpolations", std::uint64_t{0});
    r.wall_time_seconds = j.value("wall_seconds", 0.0);
    r.residual_history = j.at("residual_history").get<std::vector<double>>();
    if (j.contains("phases"))
        for (const auto& p : j.at("phases")) r.phases.push_back(from_json(p));
    return r;
}

}  // namespace

void write_report(std::ostream& out, const RunReport& report) { out << to_json(report, true).dump(2) << '\n'; }

RunReport read_report(std::istream& in) {
    try {
        return from_json(ordered_json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed run report: ") + e.what());
    }
}

std::string report_numerics(const RunReport& report) { return to_json(report, false).dump(); }

}  // namespace hjb
