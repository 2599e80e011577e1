#include "deepreport/section_writer.hpp"

#include <algorithm>

#include "deepreport/log.hpp"
#include "deepreport/prompts.hpp"

namespace deepreport {

namespace {

std::string format_image_line(const SelectedFigure& figure) {
    std::string line = "[" + figure.brief.image_id + "] ";
    const ImageCandidate& c = figure.candidate;
    if (c.ocr && !c.ocr->visible_title.empty())
        line += c.ocr->visible_title;
    else if (!c.alt_text.empty())
        line += c.alt_text;
    else
        line += "(no description)";
    if (!figure.brief.atoms.empty())
        line += " | evidence: " + figure.brief.atoms.front().visual_features + " -> " +
                figure.brief.atoms.front().deductive_fact;
    if (!figure.brief.integration_advice.empty())
        line += " | advice: " + figure.brief.integration_advice;
    return line;
}

bool line_is_blank(const std::string& line) { return trim(line).empty(); }

}  // namespace

std::vector<SelectedFigure> route_section_images(const std::vector<SelectedFigure>& figures,
                                                 const SectionPlan& section,
                                                 const UsedFigureRegistry& registry,
                                                 const ScoringParams& params) {
    struct Routed {
        const SelectedFigure* figure;
        double raw_score;
        double rank_score;
    };
    std::vector<Routed> routed;
    for (const auto& figure : figures) {
        if (registry.contains(figure.candidate.dedup_key)) continue;
        auto raw = score_image(figure.candidate, section, params);
        if (!raw) continue;
        if (!(*raw > params.threshold)) continue;  // strict inequality
        double rank = *raw;
        if (trim(figure.brief.recommended_section) == trim(section.title))
            rank += params.section_match_prior;
        routed.push_back({&figure, *raw, rank});
    }
    std::stable_sort(routed.begin(), routed.end(), [](const Routed& a, const Routed& b) {
        if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
        return candidate_id_less(a.figure->brief.image_id, b.figure->brief.image_id);
    });
    std::vector<SelectedFigure> out;
    for (const auto& r : routed) {
        if (static_cast<int>(out.size()) >= params.per_section_candidates) break;
        out.push_back(*r.figure);
    }
    return out;
}

ChatRequest build_section_request(const SectionPlan& section,
                                  const std::vector<Learning>& learnings,
                                  const std::vector<SelectedFigure>& image_candidates,
                                  const std::string& style_guide, const std::string& topic) {
    std::string sec_learnings;
    for (const auto& learning : learnings) {
        if (!sec_learnings.empty()) sec_learnings += "\n";
        sec_learnings += format_learning_line(learning);
    }
    if (sec_learnings.empty()) sec_learnings = "(none)";

    std::string sec_images;
    for (const auto& figure : image_candidates) {
        if (!sec_images.empty()) sec_images += "\n";
        sec_images += format_image_line(figure);
    }
    if (sec_images.empty()) sec_images = "none";

    PromptSlots slots{{"topic", topic},
                      {"section_title", section.title},
                      {"section_summary", section.summary},
                      {"style_guide", style_guide},
                      {"sec_learnings", sec_learnings},
                      {"evidence_gap", section.gap.value_or("none")},
                      {"sec_images", sec_images}};
    auto request = build_prompt(PromptTemplate::section_generation, slots);
    if (!request) throw std::runtime_error("section prompt build failed: " + request.error());
    return request.take();
}

SectionDraft generate_section(const SectionPlan& section, const std::vector<Learning>& learnings,
                              const std::vector<SelectedFigure>& image_candidates,
                              const std::string& style_guide, const std::string& topic,
                              Gateway& gateway, std::string* prompt_out) {
    ChatRequest request = build_section_request(section, learnings, image_candidates, style_guide, topic);
    if (prompt_out) *prompt_out = request.system + "\n" + request.user;

    std::string markdown;
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto reply = gateway.chat(request);
        if (reply && !trim(reply.value()).empty()) {
            markdown = trim(reply.value());
            break;
        }
        if (attempt == 0) {
            logging::warn("empty draft for section " + std::to_string(section.index) + "; retrying");
            request.user += "\n\nYour previous response was empty. Write the section now.";
        }
    }
    if (markdown.empty()) {
        logging::warn("section " + std::to_string(section.index) + " fell back to a stub");
        markdown = "*Evidence for this section is limited.*";
        if (section.gap) markdown += " Known gap: " + *section.gap;
    }

    SectionDraft draft;
    draft.section_index = section.index;
    // Drafts start at their own section heading; prepend when the model
    // returned body text only.
    std::string heading = "## " + section.number + ". " + section.title;
    if (!starts_with(trim(markdown), "#")) markdown = heading + "\n\n" + markdown;
    draft.markdown = std::move(markdown);
    return draft;
}

SectionDraft validate_section_refs(SectionDraft draft,
                                   const std::map<std::string, std::string>& provided,
                                   UsedFigureRegistry& registry) {
    std::vector<std::string> lines = split(draft.markdown, '\n');
    std::set<std::string> seen_ids;
    std::set<std::string> kept_ids;
    std::vector<bool> delete_line(lines.size(), false);
    // Per line: ids removed there and whether a standalone media line emptied.
    std::vector<std::vector<std::string>> removed_ids(lines.size());

    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto placeholders = extract_image_placeholders(lines[i]);
        if (placeholders.empty()) continue;
        std::vector<ImagePlaceholder> removals;
        for (const auto& placeholder : placeholders) {
            bool valid = provided.count(placeholder.id) > 0;
            bool first = valid && seen_ids.insert(placeholder.id).second;
            if (first) {
                kept_ids.insert(placeholder.id);
            } else {
                removals.push_back(placeholder);
                removed_ids[i].push_back(placeholder.id);
                if (!valid)
                    logging::warn("placeholder " + placeholder.id + " not provided; removed");
            }
        }
        for (auto it = removals.rbegin(); it != removals.rend(); ++it)
            lines[i].erase(it->position, it->length);
        if (!removals.empty() && line_is_blank(lines[i])) delete_line[i] = true;
    }

    // Caption cleanup: a standalone media line that vanished takes its
    // adjacent caption with it when that caption literally names the image.
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!delete_line[i]) continue;
        for (const auto& id : removed_ids[i]) {
            auto names_id = [&](std::size_t j) {
                if (j >= lines.size() || delete_line[j]) return false;
                if (lines[j].find(id) == std::string::npos) return false;
                // Never delete a line still holding a kept placeholder.
                for (const auto& placeholder : extract_image_placeholders(lines[j]))
                    if (kept_ids.count(placeholder.id)) return false;
                return true;
            };
            if (i + 1 < lines.size() && names_id(i + 1)) {
                delete_line[i + 1] = true;
            } else if (i > 0 && names_id(i - 1)) {
                delete_line[i - 1] = true;
            }
        }
    }

    // A deleted line between two blanks would leave a doubled blank; drop
    // one neighbor. Untouched drafts rebuild byte-identically.
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!delete_line[i]) continue;
        std::ptrdiff_t prev = static_cast<std::ptrdiff_t>(i) - 1;
        while (prev >= 0 && delete_line[static_cast<std::size_t>(prev)]) --prev;
        std::size_t next = i + 1;
        while (next < lines.size() && delete_line[next]) ++next;
        bool prev_blank = prev < 0 || line_is_blank(lines[static_cast<std::size_t>(prev)]);
        if (prev_blank && next < lines.size() && line_is_blank(lines[next]))
            delete_line[next] = true;
    }

    std::string rebuilt;
    bool first = true;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (delete_line[i]) continue;
        if (!first) rebuilt += "\n";
        rebuilt += lines[i];
        first = false;
    }

    draft.markdown = std::move(rebuilt);
    draft.used_image_ids = kept_ids;
    for (const auto& id : kept_ids) {
        auto it = provided.find(id);
        if (it != provided.end()) registry.add(it->second);
    }
    return draft;
}

}  // namespace deepreport
