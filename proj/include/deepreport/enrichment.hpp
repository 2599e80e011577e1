#pragma once
// Stage B: the five-stage funnel distilling the raw visual pool into a
// compact set of selected source figures with evidence atoms and planning
// briefs. Capacity limits 100/50/20/15; every stage degrades, none throws.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepreport/gateway.hpp"
#include "deepreport/outline.hpp"
#include "deepreport/types.hpp"

namespace deepreport {

struct FunnelCaps {
    int after_classification = 100;
    int after_rerank = 50;
    int vlm_budget = 20;
    int final_cap = 15;
    int classify_batch = 12;
    int parallelism = 8;
};

struct SignalWords {
    std::vector<std::string> asset = {"logo",   "avatar", "icon",        "thumbnail",
                                      "banner", "sprite", "favicon",     "advertisement",
                                      "share button", "social"};
    std::vector<std::string> technical = {"figure",    "table",     "chart",    "diagram",
                                          "architecture", "benchmark", "plot",  "graph",
                                          "schematic", "pipeline",  "curve",    "results"};
};

// The per-selected-image record handed from enrichment to planning and
// generation.
struct PlanningBrief {
    std::string image_id;
    std::optional<FigureType> figure_type;
    std::vector<EvidenceAtom> atoms;
    std::string recommended_section;  // outline top-level title or "unassigned"
    std::string integration_advice;
    double composite_score = 0.0;
};

// Brief plus the enriched candidate it describes; the section writer scores
// and embeds through this pair.
struct SelectedFigure {
    PlanningBrief brief;
    ImageCandidate candidate;
};

struct PruneDecision {
    bool keep = true;
    std::string reason;
};

// Asymmetric rule filter: drop iff an asset signal appears in the metadata
// or local context AND no technical signal does. Ambiguous candidates stay.
PruneDecision heuristic_prune(const ImageCandidate& candidate, const SignalWords& signals);

struct Classification {
    std::string image_id;
    bool keep = false;
    std::optional<FigureType> figure_type;
    double relevance = 0.0;
    bool primary_source = false;
};

// One model call per batch (at most `classify_batch` candidates); candidates
// missing from the reply default to keep=false. Annotates and returns the
// survivors across all batches, truncated to `after_classification` by
// relevance descending (candidate ID ascending on ties). `calls` reports the
// number of batch requests made.
std::vector<ImageCandidate> classify_context(const std::vector<ImageCandidate>& candidates,
                                             const std::string& topic, const FunnelCaps& caps,
                                             Gateway& gateway, int* calls = nullptr);

// Topic reranking with outline context. Fuzzy-matches each recommended
// section to an existing top-level title (normalized-token Jaccard >= 0.4,
// else "unassigned"), drops should_keep=false entries, sorts by
// relevance_score descending with ID tie-break, truncates to `after_rerank`.
std::vector<ImageCandidate> rerank_by_topic(const std::vector<ImageCandidate>& candidates,
                                            const std::string& topic,
                                            const std::vector<Learning>& learnings,
                                            const AdaptiveOutline& outline, const FunnelCaps& caps,
                                            Gateway& gateway);

// Exposed for tests: the recommended-section matcher.
std::string match_section_title(const std::string& recommended,
                                const std::vector<std::string>& titles);

// Vision-model analysis of one candidate; on failure the candidate is
// returned unanalyzed (and excluded from final selection).
ImageCandidate visual_analyze(const ImageCandidate& candidate, const std::string& topic,
                              Gateway& gateway);

// Final selection over analyzed candidates: use/reject decision, composite
// score, credibility, supported claims, integration advice. Deduplicates by
// dedup_key; at most `final_cap` figures, briefs sorted by composite score
// descending.
std::vector<SelectedFigure> final_select(const std::vector<ImageCandidate>& candidates,
                                         const std::string& topic,
                                         const std::vector<Learning>& learnings,
                                         const FunnelCaps& caps, Gateway& gateway);

struct EnrichmentResult {
    std::vector<SelectedFigure> selected;
    nlohmann::json audit;  // per-stage counts, drop reasons, final briefs
};

EnrichmentResult run_enrichment(const EvidencePool& pool, const AdaptiveOutline& outline,
                                const std::string& topic, const FunnelCaps& caps,
                                const SignalWords& signals, Gateway& gateway);

// The enrichment bypass: selection from weak textual metadata only, no model
// calls. Used by the ablation switch; records the bypass in its audit.
EnrichmentResult metadata_only_select(const EvidencePool& pool, const FunnelCaps& caps,
                                      const SignalWords& signals);

void to_json(nlohmann::json& j, const PlanningBrief& b);
void from_json(const nlohmann::json& j, PlanningBrief& b);

}  // namespace deepreport
