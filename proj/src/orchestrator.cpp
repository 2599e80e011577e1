#include "deepreport/orchestrator.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "deepreport/judge.hpp"
#include "deepreport/log.hpp"
#include "deepreport/planner.hpp"
#include "deepreport/prompts.hpp"
#include "deepreport/section_writer.hpp"

namespace deepreport {

using nlohmann::json;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

std::string toc_list(const AdaptiveOutline& outline) {
    std::string out;
    struct Walker {
        std::string* out;
        void walk(const OutlineNode& node, int depth) {
            out->append(static_cast<std::size_t>(depth) * 2, ' ');
            *out += "- " + node.number + ". " + node.title + "\n";
            for (const auto& child : node.children) walk(child, depth + 1);
        }
    } walker{&out};
    for (const auto& node : outline.nodes) walker.walk(node, 0);
    return out;
}

std::string all_learnings_text(const EvidencePool& pool) {
    std::string out;
    for (const auto& learning : pool.learnings) {
        if (!out.empty()) out += "\n";
        out += format_learning_line(learning);
    }
    return out;
}

std::shared_ptr<Gateway> assemble_gateway(const RunConfig& config,
                                          std::shared_ptr<Gateway> injected) {
    std::shared_ptr<Gateway> base = std::move(injected);
    if (!base) {
        if (config.mock_transcript) {
            base = std::make_shared<TranscriptGateway>(nullptr, *config.mock_transcript);
        } else {
            base = std::make_shared<HttpGateway>(config.http);
        }
    }
    if (!config.cache) return base;
    return std::make_shared<TranscriptGateway>(base,
                                               config.output_dir / "cache" / "gateway_cache.json");
}

// Stage D, sectionwise path. Returns the validated drafts; per-section
// prompts and markdown are persisted for audit.
std::vector<SectionDraft> write_sections(const RunConfig& config, const ReportPlan& plan,
                                         const EvidencePool& pool,
                                         const std::vector<SelectedFigure>& figures,
                                         UsedFigureRegistry& registry, Gateway& gateway) {
    std::vector<SectionDraft> drafts;
    std::filesystem::create_directories(config.output_dir / "sections");
    for (const auto& section : plan.sections) {
        std::vector<Learning> routed_learnings;
        for (int id : section.evidence_ids)
            if (const Learning* learning = pool.find_learning(id))
                routed_learnings.push_back(*learning);

        auto routed_images = route_section_images(figures, section, registry, config.scoring);

        std::string prompt_text;
        SectionDraft draft = generate_section(section, routed_learnings, routed_images,
                                              plan.style_guide, config.topic, gateway, &prompt_text);

        std::map<std::string, std::string> provided;
        for (const auto& figure : routed_images)
            provided[figure.brief.image_id] = figure.candidate.dedup_key;
        draft = validate_section_refs(std::move(draft), provided, registry);

        const std::string stem = "sec_" + std::to_string(section.index);
        write_text(config.output_dir / "sections" / (stem + ".prompt.txt"), prompt_text);
        write_text(config.output_dir / "sections" / (stem + ".md"), draft.markdown);
        drafts.push_back(std::move(draft));
    }
    return drafts;
}

// Stage D, single-pass ablation: one global prompt, one draft, global
// reference validation; no per-section files.
std::vector<SectionDraft> write_global_report(const RunConfig& config, const ReportPlan& plan,
                                              const EvidencePool& pool,
                                              const std::vector<SelectedFigure>& figures,
                                              UsedFigureRegistry& registry, Gateway& gateway) {
    std::string images_text;
    for (const auto& figure : figures) {
        if (!images_text.empty()) images_text += "\n";
        images_text += "[" + figure.brief.image_id + "] " + figure.candidate.alt_text;
    }
    if (images_text.empty()) images_text = "none";

    PromptSlots slots{{"topic", config.topic},
                      {"outline", plan.reader_outline},
                      {"style_guide", plan.style_guide},
                      {"learnings", all_learnings_text(pool)},
                      {"images", images_text}};
    auto request = build_prompt(PromptTemplate::global_report, slots);
    if (!request) throw std::runtime_error("global report prompt build failed: " + request.error());
    auto reply = gateway.chat(request.value());

    SectionDraft draft;
    draft.section_index = 0;
    draft.markdown = reply ? trim(reply.value()) : "";
    if (draft.markdown.empty()) {
        logging::warn("global generation returned nothing; emitting a stub report body");
        draft.markdown = "*No content was generated.*";
    }
    std::map<std::string, std::string> provided;
    for (const auto& figure : figures)
        provided[figure.brief.image_id] = figure.candidate.dedup_key;
    draft = validate_section_refs(std::move(draft), provided, registry);
    return {std::move(draft)};
}

}  // namespace

Result<RunConfig> load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.good())
        return Result<RunConfig>::fail("config file not readable: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const std::exception& e) {
        return Result<RunConfig>::fail("config parse error: " + std::string(e.what()));
    }

    RunConfig config;
    config.topic = j.value("topic", "");
    if (j.contains("output_dir")) config.output_dir = j["output_dir"].get<std::string>();
    config.cache = j.value("cache", true);
    config.renderer_command = j.value("renderer_command", "");
    if (j.contains("mock_transcript"))
        config.mock_transcript = std::filesystem::path(j["mock_transcript"].get<std::string>());

    if (j.contains("research")) {
        const json& r = j["research"];
        config.research.rounds = r.value("rounds", config.research.rounds);
        config.research.queries_per_round =
            r.value("queries_per_round", config.research.queries_per_round);
        config.research.pages_per_query =
            r.value("pages_per_query", config.research.pages_per_query);
        config.research.learnings_per_page =
            r.value("learnings_per_page", config.research.learnings_per_page);
        config.research.per_page_image_cap =
            r.value("per_page_image_cap", config.research.per_page_image_cap);
        config.research.context_window = r.value("context_window", config.research.context_window);
        config.research.min_image_bytes =
            r.value("min_image_bytes", config.research.min_image_bytes);
        config.research.parallelism = r.value("parallelism", config.research.parallelism);
        if (r.contains("excluded_formats"))
            config.research.excluded_formats = r["excluded_formats"].get<std::vector<std::string>>();
        if (r.contains("blocklists")) {
            const json& b = r["blocklists"];
            if (b.contains("filename_substrings"))
                config.research.blocklists.filename_substrings =
                    b["filename_substrings"].get<std::vector<std::string>>();
            if (b.contains("alt_substrings"))
                config.research.blocklists.alt_substrings =
                    b["alt_substrings"].get<std::vector<std::string>>();
            if (b.contains("domains"))
                config.research.blocklists.domains = b["domains"].get<std::vector<std::string>>();
        }
    }
    if (j.contains("caps")) {
        const json& c = j["caps"];
        config.caps.after_classification =
            c.value("after_classification", config.caps.after_classification);
        config.caps.after_rerank = c.value("after_rerank", config.caps.after_rerank);
        config.caps.vlm_budget = c.value("vlm_budget", config.caps.vlm_budget);
        config.caps.final_cap = c.value("final_cap", config.caps.final_cap);
        config.caps.classify_batch = c.value("classify_batch", config.caps.classify_batch);
    }
    if (j.contains("scoring")) {
        const json& s = j["scoring"];
        config.scoring.alpha = s.value("alpha", config.scoring.alpha);
        config.scoring.type_bonus_major = s.value("type_bonus_major", config.scoring.type_bonus_major);
        config.scoring.type_bonus_minor = s.value("type_bonus_minor", config.scoring.type_bonus_minor);
        config.scoring.gamma = s.value("gamma", config.scoring.gamma);
        config.scoring.tau = s.value("tau", config.scoring.tau);
        config.scoring.min_matches = s.value("min_matches", config.scoring.min_matches);
        config.scoring.threshold = s.value("threshold", config.scoring.threshold);
        config.scoring.per_section_candidates =
            s.value("per_section_candidates", config.scoring.per_section_candidates);
        if (s.contains("stopwords"))
            config.scoring.stopwords = s["stopwords"].get<std::vector<std::string>>();
    }
    if (j.contains("signals")) {
        const json& s = j["signals"];
        if (s.contains("asset")) config.signals.asset = s["asset"].get<std::vector<std::string>>();
        if (s.contains("technical"))
            config.signals.technical = s["technical"].get<std::vector<std::string>>();
    }
    if (j.contains("models")) {
        const json& m = j["models"];
        auto load_endpoint = [](const json& e, ModelEndpoint& endpoint) {
            endpoint.base_url = e.value("base_url", endpoint.base_url);
            endpoint.path = e.value("path", endpoint.path);
            endpoint.model = e.value("model", endpoint.model);
            endpoint.api_key_env = e.value("api_key_env", endpoint.api_key_env);
        };
        if (m.contains("generation")) load_endpoint(m["generation"], config.http.generation);
        if (m.contains("visual")) load_endpoint(m["visual"], config.http.visual);
    }
    if (j.contains("serp")) {
        const json& s = j["serp"];
        config.http.serp.base_url = s.value("base_url", config.http.serp.base_url);
        config.http.serp.path = s.value("path", config.http.serp.path);
        config.http.serp.api_key_env = s.value("api_key_env", config.http.serp.api_key_env);
    }
    if (j.contains("ablations")) {
        const json& a = j["ablations"];
        config.disable_enrichment = a.value("disable_enrichment", false);
        config.global_generation = a.value("global_generation", false);
    }
    config.http.context_window = config.research.context_window;
    return Result<RunConfig>::ok(std::move(config));
}

Result<std::filesystem::path> run_pipeline(const RunConfig& config,
                                           std::shared_ptr<Gateway> injected) {
    if (trim(config.topic).empty())
        return Result<std::filesystem::path>::fail("topic must not be empty");
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec)
        return Result<std::filesystem::path>::fail("output dir not writable: " +
                                                   config.output_dir.string());

    std::shared_ptr<Gateway> gateway = assemble_gateway(config, std::move(injected));

    // Stage A: outline-evolving research.
    auto research = run_research(config.topic, config.research, *gateway, config.output_dir);
    if (!research) return Result<std::filesystem::path>::fail(research.error());
    EvidencePool& pool = research.value().pool;
    AdaptiveOutline& outline = research.value().outline;

    // Stage B: image enrichment (or its metadata-only bypass).
    EnrichmentResult enrichment =
        config.disable_enrichment
            ? metadata_only_select(pool, config.caps, config.signals)
            : run_enrichment(pool, outline, config.topic, config.caps, config.signals, *gateway);
    write_json(config.output_dir / "enrichment_report.json", enrichment.audit);

    // Stage C: evidence-indexed plan and style guide.
    ReportPlan plan =
        make_report_plan(outline, config.topic, pool.learnings, enrichment.selected, *gateway);
    if (plan.sections.empty())
        return Result<std::filesystem::path>::fail("outline produced no report sections");
    write_json(config.output_dir / "plan.json", plan_to_json(plan));
    write_text(config.output_dir / "style_guide.md", plan.style_guide + "\n");

    // Stage D: grounded generation.
    UsedFigureRegistry registry;
    std::vector<SectionDraft> drafts =
        config.global_generation
            ? write_global_report(config, plan, pool, enrichment.selected, registry, *gateway)
            : write_sections(config, plan, pool, enrichment.selected, registry, *gateway);

    // Charts.
    auto specs = extract_visualizations(drafts);
    std::map<std::string, ChartRef> charts;
    if (!specs.empty()) {
        ChartRenderer renderer{config.renderer_command, config.output_dir / "media_work"};
        if (!renderer.available()) {
            logging::warn("no chart renderer configured; " + std::to_string(specs.size()) +
                          " chart(s) dropped");
        } else {
            std::filesystem::create_directories(config.output_dir / "media");
            auto artifacts = parallel_map<VisualizationSpec, Result<ChartArtifact>>(
                specs, config.research.parallelism, [&](const VisualizationSpec& spec) {
                    return refine_chart(spec, plan.style_guide, *gateway, renderer);
                });
            for (std::size_t i = 0; i < specs.size(); ++i) {
                if (!artifacts[i]) {
                    logging::warn("chart " + specs[i].id + " dropped: " + artifacts[i].error());
                    continue;
                }
                const ChartArtifact& artifact = artifacts[i].value();
                std::string stem = "chart_" + std::to_string(i + 1);
                write_text(config.output_dir / "media" / (stem + ".html"), artifact.html);
                {
                    std::ofstream png(config.output_dir / "media" / (stem + ".png"),
                                      std::ios::binary);
                    png.write(reinterpret_cast<const char*>(artifact.png.data()),
                              static_cast<std::streamsize>(artifact.png.size()));
                }
                std::string title = "Generated chart";
                try {
                    title = json::parse(specs[i].spec_json).value("title", title);
                } catch (const std::exception&) {
                }
                charts[specs[i].id] = ChartRef{"media/" + stem + ".png",
                                               "media/" + stem + ".html", title};
            }
        }
    }

    // Assembly, media resolution, anchored refinement, references.
    std::string report = "# " + config.topic + "\n\n## Contents\n\n" + toc_list(outline) + "\n";
    for (const auto& draft : drafts) report += draft.markdown + "\n\n";
    report = resolve_media(report, enrichment.selected, charts);

    auto [anchored, anchor_map] = anchorize(report);
    const std::string learnings_text = all_learnings_text(pool);
    std::string refined =
        refine_report(anchored, learnings_text, anchor_map, config.topic, *gateway, config.refine);
    std::string final_report = validate_anchors(refined, anchor_map, *gateway);

    std::string references = extract_references(final_report, learnings_text);
    if (!references.empty()) {
        if (!ends_with(final_report, "\n")) final_report += "\n";
        final_report += "\n" + references;
    }

    std::filesystem::path report_path = config.output_dir / "report.md";
    write_text(report_path, final_report);
    return Result<std::filesystem::path>::ok(report_path);
}

Result<std::filesystem::path> run_judge(const RunConfig& config,
                                        const std::filesystem::path& bundles_dir, int runs,
                                        std::shared_ptr<Gateway> injected) {
    if (runs < 1) return Result<std::filesystem::path>::fail("runs must be >= 1");
    std::shared_ptr<Gateway> gateway = assemble_gateway(config, std::move(injected));
    return judge_bundles(bundles_dir, runs, config.output_dir, *gateway);
}

}  // namespace deepreport
