#include "deepreport/types.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

#include "deepreport/util.hpp"

namespace deepreport {

std::string to_string(FigureType type) {
    switch (type) {
        case FigureType::architecture: return "architecture";
        case FigureType::pipeline: return "pipeline";
        case FigureType::hardware: return "hardware";
        case FigureType::schematic: return "schematic";
        case FigureType::result_chart: return "result_chart";
        case FigureType::benchmark: return "benchmark";
        case FigureType::ablation_table: return "ablation_table";
        case FigureType::photo: return "photo";
        case FigureType::map: return "map";
        case FigureType::other: return "other";
    }
    return "other";
}

std::optional<FigureType> figure_type_from_string(std::string_view name) {
    std::string n = to_lower(trim(name));
    if (n == "architecture") return FigureType::architecture;
    if (n == "pipeline") return FigureType::pipeline;
    if (n == "hardware") return FigureType::hardware;
    if (n == "schematic") return FigureType::schematic;
    if (n == "result_chart" || n == "result chart") return FigureType::result_chart;
    if (n == "benchmark") return FigureType::benchmark;
    if (n == "ablation_table" || n == "ablation table") return FigureType::ablation_table;
    if (n == "photo") return FigureType::photo;
    if (n == "map") return FigureType::map;
    if (n == "other") return FigureType::other;
    return std::nullopt;
}

std::optional<int> candidate_numeric_id(std::string_view image_id) {
    auto underscore = image_id.rfind('_');
    if (underscore == std::string_view::npos) return std::nullopt;
    return parse_int(image_id.substr(underscore + 1));
}

bool candidate_id_less(const std::string& a, const std::string& b) {
    auto na = candidate_numeric_id(a);
    auto nb = candidate_numeric_id(b);
    if (na && nb && *na != *nb) return *na < *nb;
    return a < b;
}

std::string normalize_dedup_key(const std::string& url) {
    auto parts = parse_url(url);
    if (!parts) return to_lower(trim(url));
    std::string out = parts->scheme + "://" + parts->host + parts->path;
    if (!parts->query.empty()) {
        std::vector<std::string> kept;
        for (const auto& param : split(parts->query, '&')) {
            if (param.empty()) continue;
            std::string key = to_lower(param.substr(0, param.find('=')));
            if (starts_with(key, "utm_") || key == "fbclid") continue;
            kept.push_back(param);
        }
        if (!kept.empty()) out += "?" + join(kept, "&");
    }
    return out;
}

std::vector<ImagePlaceholder> extract_image_placeholders(const std::string& text) {
    static constexpr std::string_view kPrefix = "[Image_";
    std::vector<ImagePlaceholder> out;
    std::size_t pos = 0;
    while ((pos = text.find(kPrefix, pos)) != std::string::npos) {
        std::size_t digits = pos + kPrefix.size();
        std::size_t cursor = digits;
        while (cursor < text.size() && std::isdigit(static_cast<unsigned char>(text[cursor]))) ++cursor;
        if (cursor == digits) {  // "[Image_" with no number
            pos += kPrefix.size();
            continue;
        }
        std::string id = "Image_" + text.substr(digits, cursor - digits);
        std::string description;
        if (cursor < text.size() && text[cursor] == ']') {
            out.push_back({id, "", pos, cursor + 1 - pos});
            pos = cursor + 1;
            continue;
        }
        if (cursor < text.size() && text[cursor] == ':') {
            std::size_t close = text.find(']', cursor);
            std::size_t newline = text.find('\n', cursor);
            if (close != std::string::npos && (newline == std::string::npos || close < newline)) {
                description = trim(text.substr(cursor + 1, close - cursor - 1));
                out.push_back({id, description, pos, close + 1 - pos});
                pos = close + 1;
                continue;
            }
        }
        pos = cursor;  // unmatched bracket: ignore
    }
    return out;
}

bool EvidencePool::has_learning(int id) const { return find_learning(id) != nullptr; }

const Learning* EvidencePool::find_learning(int id) const {
    for (const auto& l : learnings)
        if (l.id == id) return &l;
    return nullptr;
}

const ImageCandidate* EvidencePool::find_image(const std::string& id) const {
    for (const auto& c : images)
        if (c.id == id) return &c;
    return nullptr;
}

const ImageCandidate* EvidencePool::find_image_by_dedup_key(const std::string& key) const {
    for (const auto& c : images)
        if (c.dedup_key == key) return &c;
    return nullptr;
}

const ImageCandidate& EvidencePool::insert_or_get(ImageCandidate candidate) {
    if (candidate.dedup_key.empty()) candidate.dedup_key = normalize_dedup_key(candidate.url);
    for (const auto& c : images)
        if (c.dedup_key == candidate.dedup_key) return c;
    images.push_back(std::move(candidate));
    return images.back();
}

void EvidencePool::add_learning(Learning learning) {
    if (has_learning(learning.id))
        throw std::runtime_error("duplicate learning id " + std::to_string(learning.id));
    learnings.push_back(std::move(learning));
}

std::string format_learning_line(const Learning& learning) {
    std::string line = "[id " + std::to_string(learning.id) + "] " + learning.text;
    if (!learning.source_url.empty()) line += " (Source: " + learning.source_url + ")";
    return line;
}

std::string format_learnings_block(const std::vector<Learning>& learnings, std::size_t max_chars) {
    std::string out;
    for (const auto& learning : learnings) {
        std::string line = format_learning_line(learning);
        if (!out.empty()) out += "\n";
        out += line;
        if (out.size() >= max_chars) {
            out = clip(out, max_chars);
            break;
        }
    }
    return out.empty() ? "(none)" : out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------
using nlohmann::json;

void to_json(json& j, const EvidenceAtom& a) {
    j = json{{"visual_features", a.visual_features},
             {"deductive_fact", a.deductive_fact},
             {"rationale", a.rationale}};
    if (a.image_id) j["image_id"] = *a.image_id;
}

void from_json(const json& j, EvidenceAtom& a) {
    a.visual_features = j.value("visual_features", "");
    a.deductive_fact = j.value("deductive_fact", "");
    a.rationale = j.value("rationale", "");
    if (j.contains("image_id")) a.image_id = j.at("image_id").get<std::string>();
}

void to_json(json& j, const Learning& l) {
    j = json{{"id", l.id},
             {"text", l.text},
             {"source_url", l.source_url},
             {"image_refs", l.image_refs},
             {"evidence_atoms", l.evidence_atoms},
             {"round", l.round}};
}

void from_json(const json& j, Learning& l) {
    l.id = j.at("id").get<int>();
    l.text = j.value("text", "");
    l.source_url = j.value("source_url", "");
    l.image_refs = j.value("image_refs", std::vector<std::string>{});
    l.evidence_atoms = j.value("evidence_atoms", std::vector<EvidenceAtom>{});
    l.round = j.value("round", 0);
}

void to_json(json& j, const OcrResult& o) {
    j = json{{"visible_title", o.visible_title},
             {"visible_text", o.visible_text},
             {"keywords", o.keywords},
             {"summary", o.summary}};
}

void from_json(const json& j, OcrResult& o) {
    o.visible_title = j.value("visible_title", "");
    o.visible_text = j.value("visible_text", "");
    o.keywords = j.value("keywords", std::vector<std::string>{});
    o.summary = j.value("summary", "");
}

void to_json(json& j, const ImageCandidate& c) {
    j = json{{"id", c.id},
             {"url", c.url},
             {"page_url", c.page_url},
             {"alt_text", c.alt_text},
             {"surrounding_text", c.surrounding_text},
             {"credibility", c.credibility},
             {"evidence_role", c.evidence_role},
             {"atoms", c.atoms},
             {"dedup_key", c.dedup_key},
             {"primary_source", c.primary_source},
             {"analyzed", c.analyzed}};
    if (c.file_size_bytes) j["file_size_bytes"] = *c.file_size_bytes;
    if (c.content_type) j["content_type"] = *c.content_type;
    if (c.figure_type) j["figure_type"] = to_string(*c.figure_type);
    if (c.relevance) j["relevance"] = *c.relevance;
    if (c.recommended_section) j["recommended_section"] = *c.recommended_section;
    if (c.ocr) j["ocr"] = *c.ocr;
    if (c.composite_score) j["composite_score"] = *c.composite_score;
    if (c.keep_decision) j["keep_decision"] = *c.keep_decision;
}

void from_json(const json& j, ImageCandidate& c) {
    c.id = j.value("id", "");
    c.url = j.value("url", "");
    c.page_url = j.value("page_url", "");
    c.alt_text = j.value("alt_text", "");
    c.surrounding_text = j.value("surrounding_text", "");
    c.credibility = j.value("credibility", 0.0);
    c.evidence_role = j.value("evidence_role", "");
    c.atoms = j.value("atoms", std::vector<EvidenceAtom>{});
    c.dedup_key = j.value("dedup_key", "");
    c.primary_source = j.value("primary_source", false);
    c.analyzed = j.value("analyzed", false);
    if (j.contains("file_size_bytes")) c.file_size_bytes = j.at("file_size_bytes").get<std::int64_t>();
    if (j.contains("content_type")) c.content_type = j.at("content_type").get<std::string>();
    if (j.contains("figure_type")) c.figure_type = figure_type_from_string(j.at("figure_type").get<std::string>());
    if (j.contains("relevance")) c.relevance = j.at("relevance").get<double>();
    if (j.contains("recommended_section")) c.recommended_section = j.at("recommended_section").get<std::string>();
    if (j.contains("ocr")) c.ocr = j.at("ocr").get<OcrResult>();
    if (j.contains("composite_score")) c.composite_score = j.at("composite_score").get<double>();
    if (j.contains("keep_decision")) c.keep_decision = j.at("keep_decision").get<bool>();
    if (c.dedup_key.empty() && !c.url.empty()) c.dedup_key = normalize_dedup_key(c.url);
}

json pool_to_json(const EvidencePool& pool) {
    return json{{"schema", 1}, {"learnings", pool.learnings}, {"images", pool.images}};
}

EvidencePool pool_from_json(const json& j) {
    if (j.value("schema", 0) != 1) throw std::runtime_error("unsupported evidence pool schema");
    EvidencePool pool;
    pool.learnings = j.value("learnings", std::vector<Learning>{});
    pool.images = j.value("images", std::vector<ImageCandidate>{});
    return pool;
}

}  // namespace deepreport
