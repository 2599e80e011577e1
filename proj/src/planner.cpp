#include "deepreport/planner.hpp"

#include "deepreport/log.hpp"
#include "deepreport/prompts.hpp"

namespace deepreport {

using nlohmann::json;

namespace {

constexpr const char* kDefaultStyleGuide =
    "Neutral analytical tone. Figures use a single accent color on a light\n"
    "background, every axis labeled with unit, legends only when more than one\n"
    "series is shown, and captions that state the takeaway rather than repeat\n"
    "the title.";

void collect_gaps(const OutlineNode& node, std::vector<std::string>& gaps) {
    for (const auto& bullet : node.bullets)
        if (bullet.is_gap && !bullet.text.empty()) gaps.push_back(bullet.text);
    for (const auto& child : node.children) collect_gaps(child, gaps);
}

}  // namespace

std::vector<SectionPlan> build_evidence_map(const AdaptiveOutline& outline) {
    std::vector<SectionPlan> sections;
    int index = 1;
    for (const auto& node : outline.nodes) {
        SectionPlan plan;
        plan.index = index++;
        plan.number = node.number;
        plan.title = node.title;
        plan.summary = render_branch(node, OutlineMode::reader);
        plan.evidence_ids = collect_citation_ids(node);
        std::vector<std::string> gaps;
        collect_gaps(node, gaps);
        if (!gaps.empty()) plan.gap = join(gaps, "; ");
        sections.push_back(std::move(plan));
    }
    return sections;
}

std::pair<std::string, std::string> finalize_outline(const AdaptiveOutline& outline) {
    return {render_outline(outline, OutlineMode::internal),
            render_outline(outline, OutlineMode::reader)};
}

std::string generate_style_guide(const std::string& topic, const std::vector<Learning>& learnings,
                                 const std::vector<SelectedFigure>& figures, Gateway& gateway) {
    std::string figure_plan_text;
    if (figures.empty()) {
        figure_plan_text = "none available";
    } else {
        std::vector<std::string> lines;
        for (const auto& figure : figures) {
            std::string line = figure.brief.image_id;
            if (figure.brief.figure_type) line += " (" + to_string(*figure.brief.figure_type) + ")";
            if (!figure.candidate.alt_text.empty()) line += ": " + figure.candidate.alt_text;
            lines.push_back(std::move(line));
        }
        figure_plan_text = join(lines, "\n");
    }

    PromptSlots slots{{"topic", topic},
                      {"learning_str", format_learnings_block(learnings, 20000)},
                      {"figure_plan_text", figure_plan_text}};
    auto request = build_prompt(PromptTemplate::style_guide, slots);
    if (!request) {
        logging::error("style guide prompt build failed: " + request.error());
        return kDefaultStyleGuide;
    }
    auto reply = gateway.chat(request.value());
    if (!reply) {
        logging::warn("style guide generation failed; using default guide: " + reply.error());
        return kDefaultStyleGuide;
    }
    auto block = first_tag_block(reply.value(), "style_guide");
    if (!block || block->empty()) {
        logging::warn("style guide reply missing <style_guide> block; using default guide");
        return kDefaultStyleGuide;
    }
    return *block;
}

ReportPlan make_report_plan(const AdaptiveOutline& outline, const std::string& topic,
                            const std::vector<Learning>& learnings,
                            const std::vector<SelectedFigure>& figures, Gateway& gateway) {
    ReportPlan plan;
    plan.sections = build_evidence_map(outline);
    plan.reader_outline = render_outline(outline, OutlineMode::reader);
    plan.style_guide = generate_style_guide(topic, learnings, figures, gateway);
    return plan;
}

json plan_to_json(const ReportPlan& plan) {
    json sections = json::array();
    for (const auto& section : plan.sections) {
        json s;
        s["index"] = section.index;
        s["number"] = section.number;
        s["title"] = section.title;
        s["summary"] = section.summary;
        s["evidence_ids"] = section.evidence_ids;
        if (section.gap) s["gap"] = *section.gap;
        s["evidence_sparse"] = section.evidence_sparse();
        sections.push_back(std::move(s));
    }
    return json{{"schema", 1}, {"sections", sections}, {"reader_outline", plan.reader_outline}};
}

}  // namespace deepreport
