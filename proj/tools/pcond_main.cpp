#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pcond/errors.hpp"
#include "pcond/scenario.hpp"

namespace {

void write_error_json(const std::string& out_dir, const std::string& kind,
                      const std::string& message) {
    try {
        std::filesystem::create_directories(out_dir);
        nlohmann::json doc;
        doc["error"] = kind;
        doc["message"] = message;
        std::ofstream out(std::filesystem::path(out_dir) / "error.json", std::ios::binary);
        out << doc.dump(2) << '\n';
    } catch (...) {
        // error reporting must not mask the exit code
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"p-conductivity toolkit: scenario-driven forward solves, DN probes, "
                 "enclosure sweeps and identity checks"};

    std::string scenario_path;
    std::string out_dir = ".";
    int threads = 0;
    bool verbose = false;

    app.add_option("--scenario", scenario_path, "Scenario JSON file (schema v1)")->required();
    app.add_option("--out", out_dir, "Output directory (created if missing)");
    app.add_option("--threads", threads, "Worker thread count (1 = bit-reproducible, 0 = default)");
    app.add_flag("--verbose", verbose, "Progress chatter on stderr");

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        const pcond::Scenario scenario = pcond::parse_scenario(scenario_path);
        const pcond::RunSummary summary = pcond::run_scenario(scenario, out_dir, verbose);
        for (const auto& stage : summary.stages) {
            std::printf("[%s] %s%s%s\n", stage.ok ? "ok" : "FAIL", stage.name.c_str(),
                        stage.detail.empty() ? "" : ": ", stage.detail.c_str());
        }
        std::printf("wrote %zu files in %.3f s (scenario %s)\n", summary.outputs.size(),
                    summary.wall_time_seconds, summary.scenario_hash.c_str());
        return summary.all_ok() ? 0 : 3;
    } catch (const pcond::SchemaError& e) {
        std::fprintf(stderr, "schema error: %s\n", e.what());
        write_error_json(out_dir, "schema", e.what());
        return 2;
    } catch (const pcond::InconclusiveError& e) {
        std::fprintf(stderr, "inconclusive: %s\n", e.what());
        write_error_json(out_dir, "inconclusive", e.what());
        return 4;
    } catch (const pcond::SolveError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        write_error_json(out_dir, "solver", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        write_error_json(out_dir, "error", e.what());
        return 3;
    }
}
