#pragma once
// Core evidence types shared by every pipeline stage: learnings with their
// deductive evidence atoms, image candidates, and the evidence pool. All
// types are plain immutable-after-construction values; mutation of the pool
// is confined to the research loop (single writer).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace deepreport {

// A (visual feature, supported fact, rationale) triple tying what is visible
// in a figure to the claim it backs.
struct EvidenceAtom {
    std::string visual_features;
    std::string deductive_fact;
    std::string rationale;
    std::optional<std::string> image_id;

    bool operator==(const EvidenceAtom&) const = default;
};

// A compact factual unit distilled from one retrieved page. IDs are global
// per run and never reused; text may carry Markdown links and
// `[Image_X: description]` placeholders.
struct Learning {
    int id = 0;
    std::string text;
    std::string source_url;
    std::vector<std::string> image_refs;
    std::vector<EvidenceAtom> evidence_atoms;
    int round = 0;

    bool operator==(const Learning&) const = default;
};

struct OcrResult {
    std::string visible_title;
    std::string visible_text;
    std::vector<std::string> keywords;  // lowercase, deduplicated
    std::string summary;

    bool operator==(const OcrResult&) const = default;
};

enum class FigureType {
    architecture,
    pipeline,
    hardware,
    schematic,
    result_chart,
    benchmark,
    ablation_table,
    photo,
    map,
    other,
};

std::string to_string(FigureType type);
std::optional<FigureType> figure_type_from_string(std::string_view name);

// A web image reference accumulating annotations as it moves through the
// enrichment funnel.
struct ImageCandidate {
    std::string id;  // stable, e.g. "Image_17"
    std::string url;
    std::string page_url;
    std::string alt_text;
    std::string surrounding_text;
    std::optional<std::int64_t> file_size_bytes;
    std::optional<std::string> content_type;
    std::optional<FigureType> figure_type;
    double credibility = 0.0;            // [0, 5]
    std::optional<double> relevance;     // [0, 5]
    std::optional<std::string> recommended_section;
    std::string evidence_role;           // may be empty
    std::optional<OcrResult> ocr;
    std::vector<EvidenceAtom> atoms;
    std::optional<double> composite_score;
    std::optional<bool> keep_decision;
    std::string dedup_key;               // normalized URL
    bool primary_source = false;
    bool analyzed = false;               // visual analysis succeeded

    bool operator==(const ImageCandidate&) const = default;
};

// Numeric suffix of "Image_17" -> 17; nullopt when the suffix is not a number.
std::optional<int> candidate_numeric_id(std::string_view image_id);

// Deterministic ordering key used for tie-breaks throughout the funnel:
// numeric suffix ascending when both parse, else lexicographic.
bool candidate_id_less(const std::string& a, const std::string& b);

// Normalized dedup key for a URL: lowercase scheme and host, fragment
// dropped, `utm_*` and `fbclid` query parameters removed, path and the rest
// of the query preserved. Idempotent.
std::string normalize_dedup_key(const std::string& url);

// One `[Image_X: description]` or bare `[Image_X]` occurrence.
struct ImagePlaceholder {
    std::string id;           // "Image_4"
    std::string description;  // empty for the bare form
    std::size_t position = 0;
    std::size_t length = 0;

    bool operator==(const ImagePlaceholder&) const = default;
};

// Scans text for placeholders in order. Unmatched brackets are ignored.
std::vector<ImagePlaceholder> extract_image_placeholders(const std::string& text);

// The multimodal evidence pool collected by the research loop.
struct EvidencePool {
    std::vector<Learning> learnings;
    std::vector<ImageCandidate> images;

    bool has_learning(int id) const;
    const Learning* find_learning(int id) const;
    const ImageCandidate* find_image(const std::string& id) const;
    const ImageCandidate* find_image_by_dedup_key(const std::string& key) const;

    // Appends unless an image with the same dedup_key exists; returns the
    // pool-resident candidate either way.
    const ImageCandidate& insert_or_get(ImageCandidate candidate);

    void add_learning(Learning learning);  // throws on duplicate ID
};

// Prompt rendering of learnings: "[id N] text (Source: url)". The "[id N]"
// marker is the same token the outline cites, which keeps prompt contents
// scannable for routing checks.
std::string format_learning_line(const Learning& learning);
std::string format_learnings_block(const std::vector<Learning>& learnings,
                                   std::size_t max_chars);

// JSON serialization (schema-versioned files in the run directory).
void to_json(nlohmann::json& j, const EvidenceAtom& a);
void from_json(const nlohmann::json& j, EvidenceAtom& a);
void to_json(nlohmann::json& j, const Learning& l);
void from_json(const nlohmann::json& j, Learning& l);
void to_json(nlohmann::json& j, const OcrResult& o);
void from_json(const nlohmann::json& j, OcrResult& o);
void to_json(nlohmann::json& j, const ImageCandidate& c);
void from_json(const nlohmann::json& j, ImageCandidate& c);

nlohmann::json pool_to_json(const EvidencePool& pool);      // {"schema":1,...}
EvidencePool pool_from_json(const nlohmann::json& j);

}  // namespace deepreport
