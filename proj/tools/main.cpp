// deepreport CLI: `run` drives the four-stage pipeline, `judge` scores
// report bundles, `demo` executes an offline scripted run and leaves a
// replayable transcript behind.

#include <cstdio>
#include <memory>

#include <CLI11.hpp>

#include "deepreport/log.hpp"
#include "deepreport/orchestrator.hpp"
#include "deepreport/scripted_gateway.hpp"

using namespace deepreport;

namespace {

RunConfig config_from_file_or_default(const std::string& config_path) {
    if (config_path.empty()) return RunConfig{};
    auto loaded = load_run_config(config_path);
    if (!loaded) throw std::runtime_error(loaded.error());
    return loaded.take();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deepreport: evidence-grounded deep research reports with source figures"};
    app.require_subcommand(1);

    // --- run ---
    auto* run_cmd = app.add_subcommand("run", "execute the research-to-report pipeline");
    std::string run_topic, run_config_path, run_out, run_transcript;
    bool no_enrichment = false, global_generation = false, no_cache = false;
    run_cmd->add_option("--topic", run_topic, "research topic (overrides config)");
    run_cmd->add_option("--config", run_config_path, "JSON config file");
    run_cmd->add_option("--out", run_out, "output directory (overrides config)");
    run_cmd->add_option("--mock-transcript", run_transcript,
                        "replay gateway calls from a recorded transcript");
    run_cmd->add_flag("--no-enrichment", no_enrichment,
                      "bypass image enrichment (metadata-only selection)");
    run_cmd->add_flag("--global-generation", global_generation,
                      "single global generation pass instead of sectionwise writing");
    run_cmd->add_flag("--no-cache", no_cache, "disable the gateway call cache");

    // --- judge ---
    auto* judge_cmd = app.add_subcommand("judge", "score report bundles with the rubric judge");
    std::string judge_bundles_dir, judge_config_path, judge_out, judge_transcript;
    int judge_runs = 1;
    judge_cmd->add_option("--bundles", judge_bundles_dir, "directory of report bundles")
        ->required();
    judge_cmd->add_option("--runs", judge_runs, "evaluations per report (>=2 adds stability.json)");
    judge_cmd->add_option("--config", judge_config_path, "JSON config file");
    judge_cmd->add_option("--out", judge_out, "output directory for scores.csv/stability.json");
    judge_cmd->add_option("--mock-transcript", judge_transcript,
                          "replay gateway calls from a recorded transcript");

    // --- demo ---
    auto* demo_cmd = app.add_subcommand("demo", "offline scripted run; records a transcript");
    std::string demo_out = "demo_run";
    std::string demo_topic = "staged evidence pipelines for long-form analysis systems";
    demo_cmd->add_option("--out", demo_out, "output directory");
    demo_cmd->add_option("--topic", demo_topic, "demo topic");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            RunConfig config = config_from_file_or_default(run_config_path);
            if (!run_topic.empty()) config.topic = run_topic;
            if (!run_out.empty()) config.output_dir = run_out;
            if (!run_transcript.empty()) config.mock_transcript = run_transcript;
            if (no_enrichment) config.disable_enrichment = true;
            if (global_generation) config.global_generation = true;
            if (no_cache) config.cache = false;
            auto report = run_pipeline(config);
            if (!report) {
                std::fprintf(stderr, "run failed: %s\n", report.error().c_str());
                return 1;
            }
            std::printf("%s\n", report.value().string().c_str());
            return 0;
        }
        if (*judge_cmd) {
            RunConfig config = config_from_file_or_default(judge_config_path);
            config.output_dir = judge_out.empty() ? judge_bundles_dir : judge_out;
            if (!judge_transcript.empty()) config.mock_transcript = judge_transcript;
            auto scores = run_judge(config, judge_bundles_dir, judge_runs);
            if (!scores) {
                std::fprintf(stderr, "judge failed: %s\n", scores.error().c_str());
                return 1;
            }
            std::printf("%s\n", scores.value().string().c_str());
            return 0;
        }
        if (*demo_cmd) {
            RunConfig config;
            config.topic = demo_topic;
            config.output_dir = demo_out;
            config.cache = false;
            config.research.rounds = 2;
            config.research.queries_per_round = 3;
            config.research.pages_per_query = 2;
            config.renderer_command =
                "/bin/sh -c 'echo rendered via stub; printf stub-png-bytes > {output}'";
            auto scripted = std::make_shared<ScriptedGateway>();
            auto recorder = std::make_shared<TranscriptGateway>(
                scripted, std::filesystem::path(demo_out) / "transcript.json");
            auto report = run_pipeline(config, recorder);
            recorder->save();
            if (!report) {
                std::fprintf(stderr, "demo failed: %s\n", report.error().c_str());
                return 1;
            }
            std::printf("%s\n", report.value().string().c_str());
            std::printf("%s\n",
                        (std::filesystem::path(demo_out) / "transcript.json").string().c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fatal: %s\n", e.what());
        return 2;
    }
    return 0;
}
