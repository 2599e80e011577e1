#pragma once
// Section-level image routing score: keyword overlap between the section
// text and the candidate's visual metadata, plus credibility, a figure-type
// bonus, and a depth bonus for substantive evidence roles. Candidates with
// fewer than `min_matches` keyword matches are discarded before scoring and
// only scores strictly above `threshold` route.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "deepreport/planner.hpp"
#include "deepreport/types.hpp"

namespace deepreport {

struct ScoringParams {
    double alpha = 2.0;
    double type_bonus_major = 3.0;  // architecture, pipeline, hardware, schematic
    double type_bonus_minor = 2.0;  // result_chart, benchmark, ablation_table
    double gamma = 1.0;
    int tau = 20;  // evidence-role length threshold, chars
    int min_matches = 2;
    double threshold = 4.0;
    double section_match_prior = 0.5;  // rank-only nudge when the brief's
                                       // recommended section is this section
    int per_section_candidates = 4;
    std::vector<std::string> stopwords;  // empty -> built-in default set

    const std::vector<std::string>& effective_stopwords() const;
};

// Lowercase, split on non-alphanumerics, drop tokens shorter than 3 chars
// and stopwords; returns a set.
std::set<std::string> tokenize(const std::string& text,
                               const std::vector<std::string>& stopwords);
std::set<std::string> tokenize(const std::string& text);  // default stopwords

double type_bonus(std::optional<FigureType> type, const ScoringParams& params);

// The routing score; absent when the keyword-match count is below
// min_matches. Exactly:
//   alpha * m + credibility + type_bonus + gamma * [len(evidence_role) > tau]
// with m = |tok(section title+summary) ∩ tok(alt + ocr keywords + role)|.
std::optional<double> score_image(const ImageCandidate& candidate, const SectionPlan& section,
                                  const ScoringParams& params);

}  // namespace deepreport
