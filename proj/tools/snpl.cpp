// Command-line entry point: staged batch pipeline over a workspace
// directory. Exit codes: 0 ok, 1 user error, 2 internal error.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "snpl/pipeline.hpp"

namespace {

constexpr const char* kStages[] = {"synth",    "ingest",      "match", "eval-match",
                                   "metrics",  "frontier",    "residualize", "bins",
                                   "regress",  "figures",     "all"};

const char* stage_help(const std::string& stage) {
    if (stage == "synth")
        return "Generate a synthetic corpus with known ground truth";
    if (stage == "ingest")
        return "Validate and canonicalize the input corpus files";
    if (stage == "match")
        return "Link NPL reference strings to publications";
    if (stage == "eval-match")
        return "Precision/recall of the linking against gold links";
    if (stage == "metrics")
        return "Science-quality and patent-value measures";
    if (stage == "frontier")
        return "Distance to the science frontier with quality propagation";
    if (stage == "residualize")
        return "Residualize the value outcome on technology-field x year";
    if (stage == "bins")
        return "Binned residualized value by quality percentile";
    if (stage == "regress")
        return "Selection and value regressions with robust standard errors";
    if (stage == "figures")
        return "Figure-ready tables (selection, quality-value, self-references, "
               "frontier, time lag)";
    return "Run every stage in order";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"snpl: links patent NPL references to publications, computes "
                 "science-quality and patent-value measures, and emits analysis tables"};
    app.require_subcommand(1);

    std::string workspace = "workspace";
    std::string config_path;
    std::int64_t seed = -1;
    int threads = -1;
    app.add_option("-w,--workspace", workspace, "Workspace directory for staged artifacts")
        ->capture_default_str();
    app.add_option("-c,--config", config_path, "Configuration file (JSON)");
    app.add_option("-s,--seed", seed, "Override the synthetic-corpus seed");
    app.add_option("-t,--threads", threads, "Worker threads (0 = hardware)");

    for (const auto* stage : kStages)
        app.add_subcommand(stage, stage_help(stage))->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // --help exits 0, usage errors exit 1
    }

    try {
        snpl::PipelineConfig cfg = snpl::load_config(config_path);
        if (seed >= 0)
            cfg.synth.seed = static_cast<std::uint64_t>(seed);
        if (threads >= 0)
            cfg.threads = threads;

        const snpl::pipeline::Workspace ws{std::filesystem::path(workspace)};
        const std::string stage = app.get_subcommands().front()->get_name();
        snpl::pipeline::run_stage(stage, ws, cfg);
        std::cerr << "snpl " << stage << ": ok (config " << snpl::config_digest(cfg) << ")\n";
        return 0;
    } catch (const snpl::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const snpl::pipeline::StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
