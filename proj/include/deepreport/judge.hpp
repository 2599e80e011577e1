#pragma once
// Five-dimension rubric evaluation: structured judge prompt, XML score
// parsing with half-point grid validation, the source-figure floor rule,
// aggregation, and repeated-run stability metrics.

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepreport/gateway.hpp"

namespace deepreport {

inline constexpr std::array<const char*, 5> kDimensionNames = {
    "informativeness", "coherence", "verifiability", "visualization_quality",
    "source_figure_integration"};

struct DimensionScore {
    double value = 0.0;  // in [1,5], on the 0.5 grid
    std::string justification;
};

struct DimensionScores {
    DimensionScore informativeness;
    DimensionScore coherence;
    DimensionScore verifiability;
    DimensionScore visualization_quality;
    DimensionScore source_figure_integration;

    std::array<double, 5> values() const {
        return {informativeness.value, coherence.value, verifiability.value,
                visualization_quality.value, source_figure_integration.value};
    }
};

// True iff 2*score is an integer in [2,10].
bool on_score_grid(double score);

// Judges one report. Source and generated images are partitioned in the
// prompt; with no source images, source_figure_integration is forced to 1
// regardless of model output. Invalid XML or off-grid scores retry once
// (never silently rounded), then the evaluation fails.
Result<DimensionScores> evaluate_report(const std::string& topic, const std::string& report,
                                        const std::vector<ImagePayload>& source_images,
                                        const std::vector<ImagePayload>& generated_images,
                                        Gateway& gateway);

// Arithmetic mean of the five dimension scores, reported to 2 decimals.
double aggregate(const std::array<double, 5>& dimension_means);
double aggregate(const DimensionScores& scores);

struct DimensionStability {
    double within_half_pct = 0.0;  // % of reports with max-min <= 0.5
    double mean_range = 0.0;
    double mean_std = 0.0;  // population form
};

struct StabilityReport {
    std::map<std::string, DimensionStability> per_dimension;  // five dims + "overall"
};

// Stability across k >= 2 runs of the same reports: runs_by_report[r][k] is
// run k of report r; every report needs the same run count.
Result<StabilityReport> stability_metrics(
    const std::vector<std::vector<DimensionScores>>& runs_by_report);

nlohmann::json stability_to_json(const StabilityReport& report);

// One report bundle on disk: report.md, topic.txt, and optional
// source_images/ and generated_images/ directories.
struct ReportBundle {
    std::string name;
    std::string topic;
    std::string report;
    std::vector<ImagePayload> source_images;
    std::vector<ImagePayload> generated_images;
};

Result<ReportBundle> load_bundle(const std::filesystem::path& dir);

// Judges every bundle under `bundles_dir` `runs` times; writes scores.csv
// (one row per report per run) and, for runs >= 2, stability.json. Returns
// the scores.csv path. Malformed bundles are skipped with a summary.
Result<std::filesystem::path> judge_bundles(const std::filesystem::path& bundles_dir, int runs,
                                            const std::filesystem::path& output_dir,
                                            Gateway& gateway);

}  // namespace deepreport
