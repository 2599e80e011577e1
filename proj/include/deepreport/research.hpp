#pragma once
// Stage A: iterative query generation, retrieval, extraction-time image
// filtering, learning extraction with image preservation, and online outline
// maintenance over a fixed round budget.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "deepreport/gateway.hpp"
#include "deepreport/outline.hpp"
#include "deepreport/types.hpp"

namespace deepreport {

struct BlockLists {
    std::vector<std::string> filename_substrings = {"logo",   "icon",  "avatar", "sprite",
                                                     "favicon", "badge", "banner-ad"};
    std::vector<std::string> alt_substrings = {"logo", "avatar", "site icon", "advertisement"};
    std::vector<std::string> domains = {"doubleclick.net",        "googlesyndication.com",
                                        "google-analytics.com",   "gravatar.com",
                                        "facebook.com",           "fbcdn.net",
                                        "twimg.com",              "adservice.google.com"};
};

struct ResearchConfig {
    int rounds = 5;                 // N_R
    int queries_per_round = 10;     // N_K
    int pages_per_query = 3;        // N_P
    int learnings_per_page = 3;     // N_L
    int per_page_image_cap = 15;    // N_cap
    int context_window = 140;       // W, chars each side
    std::int64_t min_image_bytes = 30 * 1024;
    std::vector<std::string> excluded_formats = {".svg", ".gif", "data:image"};
    BlockLists blocklists;
    int follow_up_questions = 2;
    int parallelism = 8;
    int prompt_learnings_chars = 45000;  // learning context clamp for prompts
};

struct RoundState {
    int round = 0;
    std::vector<std::string> issued_queries;  // cumulative, no exact duplicates
    std::vector<Learning> new_learnings;
    AdaptiveOutline outline;
};

// Keep/drop verdict of the extraction-time filter; `reason` names the rule
// that fired ("min size 30KB", "excluded format .svg", ...). Pure function.
struct PrefilterDecision {
    bool keep = true;
    std::string reason;
};

PrefilterDecision prefilter_image(const RawImageMeta& meta, const ResearchConfig& cfg);

// Page-level image intake: prefilter, cap at N_cap in document order, then
// global ID assignment through the pool (an already-seen dedup key reuses the
// existing candidate). `offsets` parallels `candidates` for placeholder
// injection into this page's markdown.
struct PageImages {
    std::vector<ImageCandidate> candidates;
    std::vector<std::size_t> offsets;
    std::vector<std::pair<std::string, std::string>> dropped;  // url -> reason
};

PageImages collect_page_images(const ScrapedPage& page, const ResearchConfig& cfg,
                               EvidencePool& pool);

// Query generation: one query per line of model output, duplicates against
// `prev_queries` dropped, at most `n` kept. With a nonempty outline the
// gap-targeting prompt variant is used.
std::vector<std::string> generate_queries(const std::string& topic,
                                          const std::vector<Learning>& learnings,
                                          const std::optional<AdaptiveOutline>& outline,
                                          const std::vector<std::string>& prev_queries, int n,
                                          Gateway& gateway);

struct ExtractionResult {
    std::vector<Learning> learnings;
    std::vector<std::string> follow_up_questions;
};

// Distills one page into at most N_L learnings with preserved placeholders
// and evidence atoms. `next_learning_id` advances once per accepted learning.
ExtractionResult extract_learnings(const ScrapedPage& page, const std::string& query,
                                   const PageImages& images, const ResearchConfig& cfg,
                                   Gateway& gateway, int& next_learning_id, int round);

// Injects `[Image_X: alt]` placeholders into page markdown at the collected
// offsets (exposed for prompt-content tests).
std::string inject_placeholders(const std::string& markdown, const PageImages& images);

// Rebuilds the outline from the model's <adaptive_outline> block. Citations
// to IDs outside `all_learnings` are removed with a warning; on any parse
// failure the current outline is returned unchanged.
AdaptiveOutline update_outline(const std::string& topic,
                               const std::optional<AdaptiveOutline>& current,
                               const std::vector<Learning>& new_learnings,
                               const std::vector<Learning>& all_learnings, int round,
                               Gateway& gateway);

struct ResearchOutput {
    EvidencePool pool;
    AdaptiveOutline outline;
    std::vector<RoundState> rounds;
    int pages_attempted = 0;
};

// Runs the full Stage A loop. Per-round artifacts, learnings.json and
// outline.md are written under `run_dir` when provided. Fails only when the
// pool holds no learnings after all rounds.
Result<ResearchOutput> run_research(const std::string& topic, const ResearchConfig& cfg,
                                    Gateway& gateway,
                                    const std::optional<std::filesystem::path>& run_dir);

}  // namespace deepreport
