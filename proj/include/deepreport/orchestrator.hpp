#pragma once
// End-to-end pipeline driver: configuration, run-directory management,
// gateway assembly (live, cached, or transcript replay), the four stages in
// order, and the ablation switches.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "deepreport/enrichment.hpp"
#include "deepreport/gateway.hpp"
#include "deepreport/http_gateway.hpp"
#include "deepreport/media.hpp"
#include "deepreport/research.hpp"
#include "deepreport/scoring.hpp"

namespace deepreport {

struct RunConfig {
    std::string topic;
    ResearchConfig research;
    FunnelCaps caps;
    ScoringParams scoring;
    SignalWords signals;
    HttpGatewayConfig http;
    std::string renderer_command;  // {input}/{output} placeholders; empty = no charts
    bool disable_enrichment = false;  // Stage B replaced by metadata-only selection
    bool global_generation = false;   // Stage D replaced by one global pass
    std::filesystem::path output_dir = "run";
    bool cache = true;
    std::optional<std::filesystem::path> mock_transcript;  // replay instead of live calls
    RefineLimits refine;
};

// Parses the declarative JSON config; missing fields keep their defaults.
Result<RunConfig> load_run_config(const std::filesystem::path& path);

// Runs Stage A..D and returns the final report path. Artifacts land in
// config.output_dir: learnings.json, outline.md, rounds/, plan.json,
// style_guide.md, enrichment_report.json, sections/, media/, report.md.
// `injected` overrides gateway assembly (tests); the cache wrapper still
// applies around it when config.cache is set.
Result<std::filesystem::path> run_pipeline(const RunConfig& config,
                                           std::shared_ptr<Gateway> injected = nullptr);

// Judges a directory of report bundles `runs` times; writes scores.csv and
// (for runs >= 2) stability.json under output_dir.
Result<std::filesystem::path> run_judge(const RunConfig& config,
                                        const std::filesystem::path& bundles_dir, int runs,
                                        std::shared_ptr<Gateway> injected = nullptr);

}  // namespace deepreport
