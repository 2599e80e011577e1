#include "deepreport/judge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "deepreport/log.hpp"
#include "deepreport/prompts.hpp"

namespace deepreport {

using nlohmann::json;

namespace {

// XML tag names in the judge's response format, in dimension order.
constexpr std::array<const char*, 5> kXmlTags = {
    "informativeness_and_depth", "coherence_and_organization", "verifiability",
    "visualization_quality", "original_image_integration"};

std::string image_list_text(const std::vector<ImagePayload>& images) {
    if (images.empty()) return "(none provided)";
    std::string out;
    for (const auto& image : images) {
        if (!out.empty()) out += "\n";
        out += "- " + (image.name.empty() ? (image.url.empty() ? "(inline image)" : image.url)
                                          : image.name);
    }
    return out;
}

struct ParsedScores {
    DimensionScores scores;
    std::string problem;  // empty when valid
};

ParsedScores parse_judge_xml(const std::string& reply) {
    ParsedScores out;
    auto evaluation = first_tag_block(reply, "evaluation");
    if (!evaluation) {
        out.problem = "missing <evaluation> block";
        return out;
    }
    auto report_block = first_tag_block(*evaluation, "report");
    std::string body = report_block.value_or(*evaluation);

    std::array<DimensionScore*, 5> fields = {
        &out.scores.informativeness, &out.scores.coherence, &out.scores.verifiability,
        &out.scores.visualization_quality, &out.scores.source_figure_integration};
    for (std::size_t i = 0; i < kXmlTags.size(); ++i) {
        auto dimension = first_tag_block(body, kXmlTags[i]);
        if (!dimension) {
            out.problem = std::string("missing <") + kXmlTags[i] + "> element";
            return out;
        }
        auto score_text = first_tag_block(*dimension, "score");
        if (!score_text) {
            out.problem = std::string("missing score for ") + kXmlTags[i];
            return out;
        }
        auto value = parse_double(*score_text);
        if (!value) {
            out.problem = std::string("unreadable score for ") + kXmlTags[i] + ": '" + *score_text + "'";
            return out;
        }
        if (!on_score_grid(*value)) {
            out.problem = std::string("off-grid score ") + *score_text + " for " + kXmlTags[i];
            return out;
        }
        fields[i]->value = *value;
        fields[i]->justification = first_tag_block(*dimension, "justification").value_or("");
    }
    return out;
}

double population_std(const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double variance = 0.0;
    for (double v : values) variance += (v - mean) * (v - mean);
    variance /= static_cast<double>(values.size());
    return std::sqrt(variance);
}

}  // namespace

bool on_score_grid(double score) {
    double doubled = score * 2.0;
    if (std::abs(doubled - std::round(doubled)) > 1e-9) return false;
    int grid = static_cast<int>(std::llround(doubled));
    return grid >= 2 && grid <= 10;
}

Result<DimensionScores> evaluate_report(const std::string& topic, const std::string& report,
                                        const std::vector<ImagePayload>& source_images,
                                        const std::vector<ImagePayload>& generated_images,
                                        Gateway& gateway) {
    PromptSlots slots{{"topic", topic},
                      {"report", report},
                      {"source_images", image_list_text(source_images)},
                      {"generated_images", image_list_text(generated_images)}};
    auto request = build_prompt(PromptTemplate::judge_single, slots);
    if (!request) return Result<DimensionScores>::fail(request.error());
    ChatRequest chat = request.take();
    for (const auto& image : source_images) chat.images.push_back(image);
    for (const auto& image : generated_images) chat.images.push_back(image);

    std::string problem;
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto reply = gateway.chat(chat);
        if (!reply) {
            problem = reply.error();
        } else {
            auto parsed = parse_judge_xml(reply.value());
            if (parsed.problem.empty()) {
                DimensionScores scores = parsed.scores;
                if (source_images.empty()) {
                    // No traceable source figures: the floor rule overrides
                    // whatever the model said.
                    scores.source_figure_integration.value = 1.0;
                    scores.source_figure_integration.justification =
                        "no source images provided; floored to 1";
                }
                return Result<DimensionScores>::ok(std::move(scores));
            }
            problem = parsed.problem;
        }
        if (attempt == 0) {
            logging::warn("judge reply invalid (" + problem + "); retrying");
            chat.user += "\n\nYour previous response was invalid (" + problem +
                         "). Return valid XML with every score from 1 to 5 in 0.5-point steps.";
        }
    }
    return Result<DimensionScores>::fail("evaluation failed: " + problem);
}

double aggregate(const std::array<double, 5>& dimension_means) {
    double sum = 0.0;
    for (double v : dimension_means) sum += v;
    double mean = sum / 5.0;
    return std::round(mean * 100.0) / 100.0;
}

double aggregate(const DimensionScores& scores) { return aggregate(scores.values()); }

Result<StabilityReport> stability_metrics(
    const std::vector<std::vector<DimensionScores>>& runs_by_report) {
    if (runs_by_report.empty())
        return Result<StabilityReport>::fail("no reports given");
    std::size_t k = runs_by_report.front().size();
    if (k < 2) return Result<StabilityReport>::fail("need at least 2 runs per report");
    for (const auto& runs : runs_by_report)
        if (runs.size() != k)
            return Result<StabilityReport>::fail("mismatched run counts across reports");

    StabilityReport report;
    // Six series: the five dimensions plus the per-run overall.
    std::vector<std::string> names(kDimensionNames.begin(), kDimensionNames.end());
    names.push_back("overall");

    for (std::size_t d = 0; d < names.size(); ++d) {
        int within = 0;
        double range_sum = 0.0;
        double std_sum = 0.0;
        for (const auto& runs : runs_by_report) {
            std::vector<double> values;
            values.reserve(k);
            for (const auto& scores : runs)
                values.push_back(d < 5 ? scores.values()[d] : aggregate(scores));
            auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
            double range = *max_it - *min_it;
            if (range <= 0.5 + 1e-9) ++within;
            range_sum += range;
            std_sum += population_std(values);
        }
        DimensionStability stability;
        const double n = static_cast<double>(runs_by_report.size());
        stability.within_half_pct = 100.0 * static_cast<double>(within) / n;
        stability.mean_range = range_sum / n;
        stability.mean_std = std_sum / n;
        report.per_dimension[names[d]] = stability;
    }
    return Result<StabilityReport>::ok(std::move(report));
}

json stability_to_json(const StabilityReport& report) {
    json j;
    for (const auto& [name, stability] : report.per_dimension)
        j[name] = {{"within_half_pct", stability.within_half_pct},
                   {"mean_range", stability.mean_range},
                   {"mean_std", stability.mean_std}};
    return j;
}

Result<ReportBundle> load_bundle(const std::filesystem::path& dir) {
    ReportBundle bundle;
    bundle.name = dir.filename().string();

    auto read_file = [](const std::filesystem::path& path) -> std::optional<std::string> {
        std::ifstream in(path, std::ios::binary);
        if (!in.good()) return std::nullopt;
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };

    auto report = read_file(dir / "report.md");
    if (!report) return Result<ReportBundle>::fail("missing report.md in " + dir.string());
    bundle.report = std::move(*report);
    auto topic = read_file(dir / "topic.txt");
    if (!topic) return Result<ReportBundle>::fail("missing topic.txt in " + dir.string());
    bundle.topic = trim(*topic);

    auto load_images = [&](const char* subdir, std::vector<ImagePayload>& out) {
        std::filesystem::path path = dir / subdir;
        if (!std::filesystem::is_directory(path)) return;
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(path))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            auto bytes = read_file(file);
            if (!bytes) continue;
            ImagePayload payload;
            payload.name = file.filename().string();
            payload.bytes_b64 = base64_encode(reinterpret_cast<const std::uint8_t*>(bytes->data()),
                                              bytes->size());
            std::string ext = to_lower(file.extension().string());
            payload.mime = ext == ".jpg" || ext == ".jpeg" ? "image/jpeg" : "image/png";
            out.push_back(std::move(payload));
        }
    };
    load_images("source_images", bundle.source_images);
    load_images("generated_images", bundle.generated_images);
    return Result<ReportBundle>::ok(std::move(bundle));
}

Result<std::filesystem::path> judge_bundles(const std::filesystem::path& bundles_dir, int runs,
                                            const std::filesystem::path& output_dir,
                                            Gateway& gateway) {
    if (!std::filesystem::is_directory(bundles_dir))
        return Result<std::filesystem::path>::fail("bundle directory does not exist: " +
                                                   bundles_dir.string());
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(bundles_dir))
        if (entry.is_directory()) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty())
        return Result<std::filesystem::path>::fail("no report bundles in " + bundles_dir.string());

    std::filesystem::create_directories(output_dir);
    std::filesystem::path csv_path = output_dir / "scores.csv";
    std::ofstream csv(csv_path);
    csv << "bundle,run,informativeness,coherence,verifiability,visualization_quality,"
           "source_figure_integration,overall\n";

    int skipped = 0;
    std::vector<std::vector<DimensionScores>> runs_by_report;
    for (const auto& dir : dirs) {
        auto bundle = load_bundle(dir);
        if (!bundle) {
            logging::warn("skipping bundle: " + bundle.error());
            ++skipped;
            continue;
        }
        std::vector<DimensionScores> report_runs;
        for (int run = 1; run <= runs; ++run) {
            auto scores = evaluate_report(bundle.value().topic, bundle.value().report,
                                          bundle.value().source_images,
                                          bundle.value().generated_images, gateway);
            if (!scores) {
                logging::warn("evaluation failed for " + bundle.value().name + " run " +
                              std::to_string(run) + ": " + scores.error());
                continue;
            }
            const auto values = scores.value().values();
            csv << bundle.value().name << "," << run;
            for (double v : values) csv << "," << format_fixed(v, 2);
            csv << "," << format_fixed(aggregate(scores.value()), 2) << "\n";
            report_runs.push_back(scores.take());
        }
        if (static_cast<int>(report_runs.size()) == runs && runs >= 2)
            runs_by_report.push_back(std::move(report_runs));
    }
    csv.close();
    if (skipped > 0)
        logging::warn(std::to_string(skipped) + " bundle(s) skipped as malformed");

    if (runs >= 2 && !runs_by_report.empty()) {
        auto stability = stability_metrics(runs_by_report);
        if (stability) {
            std::ofstream out(output_dir / "stability.json");
            out << stability_to_json(stability.value()).dump(2) << "\n";
        }
    }
    return Result<std::filesystem::path>::ok(csv_path);
}

}  // namespace deepreport
