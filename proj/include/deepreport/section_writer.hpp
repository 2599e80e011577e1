#pragma once
// Stage D generation core: per-section image routing, grounded section
// generation, and reference validation with cross-section deduplication.
// Sections run strictly sequentially; the used-figure registry is the serial
// dependency between them.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "deepreport/enrichment.hpp"
#include "deepreport/gateway.hpp"
#include "deepreport/planner.hpp"
#include "deepreport/scoring.hpp"

namespace deepreport {

struct SectionDraft {
    int section_index = 0;
    std::string markdown;
    std::set<std::string> used_image_ids;
    std::vector<std::string> visualization_specs;  // raw JSON blocks
};

// Dedup keys of figures already placed somewhere in the report; append-only.
struct UsedFigureRegistry {
    std::set<std::string> used;

    bool contains(const std::string& key) const { return used.count(key) > 0; }
    void add(const std::string& key) { used.insert(key); }
};

// Scores the remaining figures for a section (registry exclusions applied),
// keeps strictly-above-threshold candidates sorted by score descending with
// ID tie-break, and returns at most `per_section_candidates` of them. A
// brief whose recommended section names this section gets a rank-only prior;
// the threshold always applies to the raw score.
std::vector<SelectedFigure> route_section_images(const std::vector<SelectedFigure>& figures,
                                                 const SectionPlan& section,
                                                 const UsedFigureRegistry& registry,
                                                 const ScoringParams& params);

// Builds the grounded section prompt and parses the draft. `learnings`
// must be exactly the pool learnings with IDs in the section's evidence map.
// An empty model reply retries once, then degrades to a stub paragraph
// carrying the gap note.
SectionDraft generate_section(const SectionPlan& section, const std::vector<Learning>& learnings,
                              const std::vector<SelectedFigure>& image_candidates,
                              const std::string& style_guide, const std::string& topic,
                              Gateway& gateway, std::string* prompt_out = nullptr);

// Exposed for prompt-content tests.
ChatRequest build_section_request(const SectionPlan& section,
                                  const std::vector<Learning>& learnings,
                                  const std::vector<SelectedFigure>& image_candidates,
                                  const std::string& style_guide, const std::string& topic);

// Removes placeholders whose ID was not provided (with the adjacent caption
// line when it literally names the image), collapses repeated references to
// the first occurrence, updates used_image_ids, and grows the registry by
// the dedup keys of surviving references. `provided` maps image ID to
// dedup key.
SectionDraft validate_section_refs(SectionDraft draft,
                                   const std::map<std::string, std::string>& provided,
                                   UsedFigureRegistry& registry);

}  // namespace deepreport
