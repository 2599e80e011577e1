#pragma once
// Stage C: finalize the outline, derive the per-section evidence map and gap
// annotations, and produce the visualization style guide.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepreport/enrichment.hpp"
#include "deepreport/gateway.hpp"
#include "deepreport/outline.hpp"
#include "deepreport/types.hpp"

namespace deepreport {

// One top-level section of the report plan: its routed learning IDs (union
// of citations over the whole branch, first-occurrence order) and optional
// gap annotation.
struct SectionPlan {
    int index = 0;  // 1-based position among top-level sections
    std::string number;
    std::string title;
    std::string summary;            // reader-mode rendering of the branch
    std::vector<int> evidence_ids;  // R(s_k), subset of pool learning IDs
    std::optional<std::string> gap; // G(s_k)

    bool evidence_sparse() const { return evidence_ids.empty(); }
};

struct ReportPlan {
    std::vector<SectionPlan> sections;
    std::string reader_outline;  // no citation/Gap metadata
    std::string style_guide;
};

std::vector<SectionPlan> build_evidence_map(const AdaptiveOutline& outline);

// (internal render, reader render)
std::pair<std::string, std::string> finalize_outline(const AdaptiveOutline& outline);

// Extracts the <style_guide> block from the model reply; a built-in default
// guide is used when the reply carries no block.
std::string generate_style_guide(const std::string& topic, const std::vector<Learning>& learnings,
                                 const std::vector<SelectedFigure>& figures, Gateway& gateway);

ReportPlan make_report_plan(const AdaptiveOutline& outline, const std::string& topic,
                            const std::vector<Learning>& learnings,
                            const std::vector<SelectedFigure>& figures, Gateway& gateway);

nlohmann::json plan_to_json(const ReportPlan& plan);

}  // namespace deepreport
