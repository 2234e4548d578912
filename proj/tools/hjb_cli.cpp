// Command-line front end: solve one config, run a named suite, or re-export a
// saved field.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hjb/errors.hpp"
#include "hjb/experiment.hpp"

namespace {

int report_error(const char* prefix, const std::exception& e, int code) {
    std::fprintf(stderr, "%s: %s\n", prefix, e.what());
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Value iteration, policy iteration and accelerated policy iteration for static HJB equations"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "Worker threads for the sweep kernels")->check(CLI::PositiveNumber);

    std::string config_path;
    std::string out_dir;
    auto* solve = app.add_subcommand("solve", "Run one experiment from a config file");
    solve->add_option("--config", config_path, "Config file (key = value lines)")->required();
    solve->add_option("--out", out_dir, "Output directory (overrides output.dir)");

    std::string suite_name;
    std::string suite_out = "suite_out";
    bool allow_large = false;
    int max_nodes = 0;
    auto* suite = app.add_subcommand("suite", "Run a named suite: paper_tables, invariants, rates");
    suite->add_option("name", suite_name, "Suite name")->required();
    suite->add_option("--out", suite_out, "Directory for the emitted tables");
    suite->add_flag("--allow-large", allow_large, "Lift the desk-scale grid limits");
    suite->add_option("--max-nodes", max_nodes, "Skip rows above this many nodes per axis");

    std::string result_dir;
    std::string export_out;
    std::string format = "table";
    std::string slice_text;
    auto* exp = app.add_subcommand("export", "Re-export the field of a result directory");
    exp->add_option("result_dir", result_dir, "Directory written by solve")->required();
    exp->add_option("--out", export_out, "Output directory (default: the result directory)");
    exp->add_option("--format", format, "table or slice")->check(CLI::IsMember({"table", "slice"}));
    exp->add_option("--slice", slice_text, "axis=value, axis counted from 1");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : hjb::exit_code::config_error;
    }

    try {
        if (threads > 0) hjb::set_worker_count(threads);
    } catch (const hjb::Error& e) {
        return report_error("error", e, hjb::exit_code::config_error);
    }

    if (*solve) {
        hjb::ExperimentConfig config;
        try {
            config = hjb::load_config(config_path);
            if (!out_dir.empty()) config.output_dir = out_dir;
        } catch (const hjb::IoError& e) {
            return report_error("io error", e, hjb::exit_code::io_error);
        } catch (const hjb::InvalidArgument& e) {
            return report_error("config error", e, hjb::exit_code::config_error);
        }
        try {
            const auto result = hjb::run_experiment(config);
            const auto& r = result.report;
            std::printf("%s %s: %d iterations, %llu node updates, %.3f s, %s\n", config.problem.c_str(),
                        hjb::algorithm_name(config.algorithm), r.outer_iterations,
                        static_cast<unsigned long long>(r.node_updates), r.wall_time_seconds,
                        r.converged ? "converged" : "NOT converged");
            if (result.error)
                std::printf("error vs reference: L1 %.6g, sup %.6g\n", result.error->l1_error,
                            result.error->sup_error);
            for (const auto& f : result.files) std::printf("wrote %s\n", f.string().c_str());
            return hjb::exit_status(result);
        } catch (const hjb::IoError& e) {
            return report_error("io error", e, hjb::exit_code::io_error);
        } catch (const hjb::InvalidArgument& e) {
            return report_error("config error", e, hjb::exit_code::config_error);
        } catch (const std::exception& e) {
            return report_error("error", e, hjb::exit_code::not_converged);
        }
    }

    if (*suite) {
        try {
            hjb::SuiteOptions o;
            o.output_dir = suite_out;
            o.allow_large = allow_large;
            o.max_nodes = max_nodes;
            return hjb::run_suite(suite_name, o, std::cout);
        } catch (const hjb::IoError& e) {
            return report_error("io error", e, hjb::exit_code::io_error);
        } catch (const hjb::InvalidArgument& e) {
            return report_error("config error", e, hjb::exit_code::config_error);
        }
    }

    if (*exp) {
        try {
            std::optional<hjb::SliceRequest> slice;
            if (!slice_text.empty()) slice = hjb::parse_slice(slice_text);
            const auto path =
                hjb::export_field(result_dir, export_out.empty() ? result_dir : export_out, format, slice);
            std::printf("wrote %s\n", path.string().c_str());
            return hjb::exit_code::ok;
        } catch (const hjb::IoError& e) {
            return report_error("io error", e, hjb::exit_code::io_error);
        } catch (const hjb::InvalidArgument& e) {
            return report_error("config error", e, hjb::exit_code::config_error);
        }
    }
    return hjb::exit_code::ok;
}
