#include "deepreport/media.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "deepreport/log.hpp"
#include "deepreport/prompts.hpp"

namespace deepreport {

using nlohmann::json;

namespace {

constexpr std::string_view kVizOpen = "<visualization>";
constexpr std::string_view kVizClose = "</visualization>";
constexpr std::string_view kPendingPrefix = "[[PENDING_CHART_";
constexpr std::string_view kAnchorPrefix = "[[MEDIA_ANCHOR_";
constexpr std::string_view kInteractiveLabel = " [(interactive chart)](";

std::string anchor_token(std::size_t index) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "[[MEDIA_ANCHOR_%03zu]]", index);
    return std::string(buf.data());
}

// Bounds of one media element starting at `pos` ("![..](..)" plus an
// optional interactive-chart link on the same line); npos when `pos` does
// not start one.
std::size_t media_element_end(const std::string& text, std::size_t pos) {
    if (pos + 1 >= text.size() || text[pos] != '!' || text[pos + 1] != '[') return std::string::npos;
    std::size_t close_bracket = text.find(']', pos + 2);
    if (close_bracket == std::string::npos) return std::string::npos;
    if (text.find('\n', pos) < close_bracket) return std::string::npos;
    if (close_bracket + 1 >= text.size() || text[close_bracket + 1] != '(') return std::string::npos;
    std::size_t close_paren = text.find(')', close_bracket + 2);
    if (close_paren == std::string::npos) return std::string::npos;
    if (text.find('\n', close_bracket) < close_paren) return std::string::npos;
    std::size_t end = close_paren + 1;
    // Optional " [(interactive chart)](path)" suffix.
    if (text.compare(end, kInteractiveLabel.size(), kInteractiveLabel) == 0) {
        std::size_t suffix_close = text.find(')', end + kInteractiveLabel.size());
        if (suffix_close != std::string::npos && text.find('\n', end) > suffix_close)
            end = suffix_close + 1;
    }
    return end;
}

std::string sanitize_caption(std::string caption) {
    caption = replace_all(std::move(caption), "]", ")");
    caption = replace_all(std::move(caption), "\n", " ");
    return trim(caption);
}

std::string sanitize_url(std::string url) {
    url = replace_all(std::move(url), ")", "%29");
    url = replace_all(std::move(url), " ", "%20");
    return url;
}

std::string extract_html_block(const std::string& reply) {
    auto fence = reply.find("```html");
    if (fence != std::string::npos) {
        auto start = reply.find('\n', fence);
        if (start != std::string::npos) {
            auto end = reply.find("```", start + 1);
            if (end != std::string::npos) return trim(reply.substr(start + 1, end - start - 1));
        }
    }
    auto generic = reply.find("```");
    if (generic != std::string::npos) {
        auto start = reply.find('\n', generic);
        if (start != std::string::npos) {
            auto end = reply.find("```", start + 1);
            if (end != std::string::npos) return trim(reply.substr(start + 1, end - start - 1));
        }
    }
    if (contains_ci(reply, "<html") || contains_ci(reply, "<!doctype")) return trim(reply);
    return "";
}

// Replaces {input}/{output} in the renderer command.
std::string expand_renderer_command(const std::string& command, const std::string& input,
                                    const std::string& output) {
    std::string out = replace_all(command, "{input}", input);
    return replace_all(std::move(out), "{output}", output);
}

const char* kMonthNames[12][2] = {
    {"january", "jan"}, {"february", "feb"}, {"march", "mar"},    {"april", "apr"},
    {"may", "may"},     {"june", "jun"},     {"july", "jul"},     {"august", "aug"},
    {"september", "sep"}, {"october", "oct"}, {"november", "nov"}, {"december", "dec"},
};

}  // namespace

const std::string* MediaAnchorMap::find(const std::string& token) const {
    for (const auto& [anchor, markup] : entries)
        if (anchor == token) return &markup;
    return nullptr;
}

std::string pending_chart_marker(const std::string& spec_id) {
    return std::string(kPendingPrefix) + spec_id + "]]";
}

std::vector<VisualizationSpec> extract_visualizations(std::vector<SectionDraft>& drafts) {
    std::vector<VisualizationSpec> specs;
    for (auto& draft : drafts) {
        int counter = 0;
        std::string& text = draft.markdown;
        std::size_t pos = 0;
        while ((pos = text.find(kVizOpen, pos)) != std::string::npos) {
            std::size_t close = text.find(kVizClose, pos + kVizOpen.size());
            if (close == std::string::npos) {
                logging::warn("unterminated <visualization> block removed from section " +
                              std::to_string(draft.section_index));
                text.erase(pos);
                break;
            }
            std::string body =
                trim(text.substr(pos + kVizOpen.size(), close - pos - kVizOpen.size()));
            std::size_t block_end = close + kVizClose.size();
            bool valid_json = false;
            try {
                valid_json = !body.empty() && json::parse(body).is_object();
            } catch (const std::exception&) {
                valid_json = false;
            }
            if (!valid_json) {
                logging::warn("non-JSON <visualization> block removed from section " +
                              std::to_string(draft.section_index));
                text.erase(pos, block_end - pos);
                continue;
            }
            VisualizationSpec spec;
            spec.section_index = draft.section_index;
            spec.id = "viz_" + std::to_string(draft.section_index) + "_" + std::to_string(++counter);
            spec.spec_json = body;
            std::string marker = pending_chart_marker(spec.id);
            text.replace(pos, block_end - pos, marker);
            pos += marker.size();
            draft.visualization_specs.push_back(spec.spec_json);
            specs.push_back(std::move(spec));
        }
    }
    return specs;
}

bool detect_template_chart(const std::string& html) {
    if (contains_ci(html, "monthly performance") || contains_ci(html, "sample data")) return true;

    std::set<int> months;
    std::string token;
    auto check = [&]() {
        if (token.empty()) return;
        for (int m = 0; m < 12; ++m)
            if (token == kMonthNames[m][0] || token == kMonthNames[m][1]) months.insert(m);
        token.clear();
    };
    for (char ch : html) {
        if (std::isalpha(static_cast<unsigned char>(ch)))
            token += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        else
            check();
    }
    check();
    return months.size() >= 4;
}

Result<RenderOutput> render_chart_html(const ChartRenderer& renderer, const std::string& html,
                                       const std::string& name) {
    if (!renderer.available()) return Result<RenderOutput>::fail("no chart renderer configured");
    std::filesystem::create_directories(renderer.workdir);
    std::filesystem::path html_path = renderer.workdir / (name + ".html");
    std::filesystem::path png_path = renderer.workdir / (name + ".png");
    {
        std::ofstream out(html_path);
        out << html;
    }
    std::error_code ec;
    std::filesystem::remove(png_path, ec);

    std::string command =
        expand_renderer_command(renderer.command, html_path.string(), png_path.string()) + " 2>&1";
    std::string console;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) return Result<RenderOutput>::fail("renderer command failed to start");
    std::array<char, 4096> buffer{};
    std::size_t n;
    while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) console.append(buffer.data(), n);
    int status = pclose(pipe);
    if (status != 0)
        return Result<RenderOutput>::fail("renderer exited with status " + std::to_string(status) +
                                          ": " + clip(console, 500));
    std::ifstream png(png_path, std::ios::binary);
    if (!png.good()) return Result<RenderOutput>::fail("renderer produced no output image");
    RenderOutput out;
    out.png.assign(std::istreambuf_iterator<char>(png), std::istreambuf_iterator<char>());
    out.console = std::move(console);
    return Result<RenderOutput>::ok(std::move(out));
}

Result<ChartArtifact> refine_chart(const VisualizationSpec& spec, const std::string& style_guide,
                                   Gateway& gateway, const ChartRenderer& renderer,
                                   int max_iterations) {
    struct Candidate {
        std::string html;
        std::vector<std::uint8_t> png;
    };
    std::vector<Candidate> candidates;
    std::vector<std::string> critic_log;
    std::string revision_notes = "(first attempt)";
    int iterations = 0;
    bool satisfied = false;

    while (iterations < max_iterations && !satisfied) {
        ++iterations;
        PromptSlots actor_slots{{"design_spec", spec.spec_json},
                                {"style_guide", style_guide},
                                {"revision_notes", revision_notes}};
        auto actor_request = build_prompt(PromptTemplate::chart_actor, actor_slots);
        if (!actor_request) return Result<ChartArtifact>::fail(actor_request.error());
        auto actor_reply = gateway.chat(actor_request.value());
        if (!actor_reply)
            return Result<ChartArtifact>::fail("chart actor failed: " + actor_reply.error());
        std::string html = extract_html_block(actor_reply.value());
        if (html.empty()) {
            critic_log.push_back("actor returned no HTML block");
            revision_notes = "Your previous reply contained no ```html code block. Return the "
                             "complete self-contained HTML file.";
            continue;
        }
        if (detect_template_chart(html)) {
            logging::warn("template chart detected for " + spec.id + "; forcing regeneration");
            critic_log.push_back("template detected; regeneration forced");
            revision_notes = "The previous chart used placeholder or template data (sample labels "
                             "or calendar months). Implement the actual specification data.";
            continue;
        }

        auto rendered = render_chart_html(renderer, html, spec.id + "_iter" + std::to_string(iterations));
        if (!rendered) {
            logging::warn("rendering failed for " + spec.id + ": " + rendered.error());
            return Result<ChartArtifact>::fail("renderer unavailable: " + rendered.error());
        }
        candidates.push_back({html, rendered.value().png});

        PromptSlots critic_slots{{"design_spec", spec.spec_json},
                                 {"console_text", rendered.value().console.empty()
                                                      ? "(none)"
                                                      : rendered.value().console}};
        auto critic_request = build_prompt(PromptTemplate::chart_critic, critic_slots);
        if (!critic_request) return Result<ChartArtifact>::fail(critic_request.error());
        ChatRequest critic_chat = critic_request.take();
        ImagePayload screenshot;
        screenshot.bytes_b64 = base64_encode(rendered.value().png);
        screenshot.name = spec.id + "_screenshot";
        critic_chat.images.push_back(std::move(screenshot));
        auto critic_reply = gateway.chat(critic_chat);
        std::string critique = critic_reply ? trim(critic_reply.value()) : "critic unavailable";
        critic_log.push_back(critique);
        if (critique.find("No issues found.") != std::string::npos) {
            satisfied = true;
        } else {
            revision_notes = critique;
        }
    }

    if (candidates.empty())
        return Result<ChartArtifact>::fail("no renderable chart after " +
                                           std::to_string(iterations) + " iterations");

    std::size_t pick = candidates.size() - 1;
    if (candidates.size() >= 2) {
        // Revised candidates are settled by one pairwise comparison of the
        // last two.
        PromptSlots pair_slots{{"design_spec", spec.spec_json}};
        auto pair_request = build_prompt(PromptTemplate::chart_pairwise, pair_slots);
        if (pair_request) {
            ChatRequest pair_chat = pair_request.take();
            for (std::size_t i = candidates.size() - 2; i < candidates.size(); ++i) {
                ImagePayload shot;
                shot.bytes_b64 = base64_encode(candidates[i].png);
                shot.name = spec.id + "_candidate_" + std::to_string(i);
                pair_chat.images.push_back(std::move(shot));
            }
            auto verdict = gateway.chat(pair_chat);
            if (verdict && trim(verdict.value()) == "A") pick = candidates.size() - 2;
        }
    }

    ChartArtifact artifact;
    artifact.spec_id = spec.id;
    artifact.html = candidates[pick].html;
    artifact.png = candidates[pick].png;
    artifact.iterations_used = iterations;
    artifact.critic_log = std::move(critic_log);
    return Result<ChartArtifact>::ok(std::move(artifact));
}

std::string figure_caption(const SelectedFigure& figure) {
    const ImageCandidate& c = figure.candidate;
    std::string title;
    if (c.ocr && !c.ocr->visible_title.empty()) title = c.ocr->visible_title;
    else if (!c.alt_text.empty()) title = c.alt_text;
    else title = figure.brief.image_id;
    std::string caption = "Figure: " + title;
    if (!figure.brief.atoms.empty())
        caption += " - " + figure.brief.atoms.front().visual_features;
    return sanitize_caption(caption);
}

std::string resolve_media(const std::string& report, const std::vector<SelectedFigure>& figures,
                          const std::map<std::string, ChartRef>& charts) {
    std::map<std::string, const SelectedFigure*> by_id;
    for (const auto& figure : figures) by_id[figure.brief.image_id] = &figure;

    std::string out = report;
    // Source-figure placeholders -> Markdown images.
    for (;;) {
        auto placeholders = extract_image_placeholders(out);
        if (placeholders.empty()) break;
        bool changed = false;
        for (const auto& placeholder : placeholders) {
            std::string replacement;
            auto it = by_id.find(placeholder.id);
            if (it != by_id.end()) {
                replacement = "![" + figure_caption(*it->second) + "](" +
                              sanitize_url(it->second->candidate.url) + ")";
            } else {
                logging::warn("placeholder " + placeholder.id + " had no resolved figure; removed");
            }
            out.replace(placeholder.position, placeholder.length, replacement);
            changed = true;
            break;  // offsets shifted; rescan
        }
        if (!changed) break;
    }

    // Pending chart markers -> embedded chart markup (or removal).
    std::size_t pos = 0;
    while ((pos = out.find(kPendingPrefix, pos)) != std::string::npos) {
        std::size_t close = out.find("]]", pos);
        if (close == std::string::npos) break;
        std::string spec_id =
            out.substr(pos + kPendingPrefix.size(), close - pos - kPendingPrefix.size());
        auto it = charts.find(spec_id);
        std::string replacement;
        if (it != charts.end()) {
            replacement = "![" + sanitize_caption(it->second.title) + "](" +
                          sanitize_url(it->second.png_path) + ")" + std::string(kInteractiveLabel) +
                          sanitize_url(it->second.html_path) + ")";
        } else {
            logging::warn("chart " + spec_id + " was dropped; marker removed");
        }
        out.replace(pos, close + 2 - pos, replacement);
        pos += replacement.size();
    }
    return out;
}

std::pair<std::string, MediaAnchorMap> anchorize(const std::string& report) {
    MediaAnchorMap map;
    std::string out;
    out.reserve(report.size());
    std::size_t pos = 0;
    while (pos < report.size()) {
        if (report[pos] == '!' && pos + 1 < report.size() && report[pos + 1] == '[') {
            std::size_t end = media_element_end(report, pos);
            if (end != std::string::npos) {
                std::string token = anchor_token(map.entries.size() + 1);
                map.entries.emplace_back(token, report.substr(pos, end - pos));
                out += token;
                pos = end;
                continue;
            }
        }
        out += report[pos++];
    }
    return {std::move(out), std::move(map)};
}

std::string deanchorize(const std::string& report, const MediaAnchorMap& map) {
    std::string out = report;
    for (const auto& [token, markup] : map.entries) {
        auto pos = out.find(token);
        if (pos != std::string::npos) out.replace(pos, token.size(), markup);
    }
    return out;
}

std::string refine_report(const std::string& anchored, const std::string& learnings_text,
                          const MediaAnchorMap& map, const std::string& topic, Gateway& gateway,
                          const RefineLimits& limits) {
    std::string inventory;
    for (const auto& [token, markup] : map.entries) {
        if (!inventory.empty()) inventory += "\n";
        inventory += token + " -> " + clip(markup, 120);
    }
    if (inventory.empty()) inventory = "(no media)";

    PromptSlots slots{{"topic_hint", topic},
                      {"media_inventory", inventory},
                      {"learnings_text", clip(learnings_text, static_cast<std::size_t>(limits.learnings_chars))},
                      {"report_with_anchors", clip(anchored, static_cast<std::size_t>(limits.report_chars))}};
    auto request = build_prompt(PromptTemplate::report_refine, slots);
    if (!request) {
        logging::error("refine prompt build failed: " + request.error());
        return anchored;
    }
    auto reply = gateway.chat(request.value());
    std::string refined;
    if (!reply || trim(reply.value()).empty()) {
        logging::warn("report refinement failed; keeping pre-refinement report");
        refined = anchored;
    } else {
        refined = trim(reply.value());
    }

    // Post-pass: unwrap a whole-document code fence.
    if (starts_with(refined, "```")) {
        auto first_newline = refined.find('\n');
        if (first_newline != std::string::npos && ends_with(trim(refined), "```")) {
            std::string body = refined.substr(first_newline + 1);
            auto last_fence = body.rfind("```");
            if (last_fence != std::string::npos) refined = trim(body.substr(0, last_fence));
        }
    }
    return renumber_headings(refined);
}

std::string validate_anchors(const std::string& refined, const MediaAnchorMap& map,
                             Gateway& gateway) {
    std::string text = refined;

    auto enforce_known_and_unique = [&](std::string input) {
        std::set<std::string> seen;
        std::string out;
        out.reserve(input.size());
        std::size_t pos = 0;
        while (pos < input.size()) {
            auto hit = input.find(kAnchorPrefix, pos);
            if (hit == std::string::npos) {
                out += input.substr(pos);
                break;
            }
            out += input.substr(pos, hit - pos);
            auto close = input.find("]]", hit);
            if (close == std::string::npos) {
                out += input.substr(hit);
                break;
            }
            std::string token = input.substr(hit, close + 2 - hit);
            if (map.find(token) == nullptr) {
                logging::warn("unknown media anchor " + token + " removed");
            } else if (!seen.insert(token).second) {
                logging::warn("duplicated media anchor " + token + " collapsed");
            } else {
                out += token;
            }
            pos = close + 2;
        }
        return out;
    };

    auto missing_anchors = [&](const std::string& input) {
        std::vector<std::string> missing;
        for (const auto& [token, markup] : map.entries)
            if (input.find(token) == std::string::npos) missing.push_back(token);
        return missing;
    };

    text = enforce_known_and_unique(text);
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto missing = missing_anchors(text);
        if (missing.empty()) break;
        logging::warn(std::to_string(missing.size()) + " media anchor(s) missing; repair attempt " +
                      std::to_string(attempt + 1));
        PromptSlots slots{{"missing_anchors", join(missing, "\n")}, {"report", text}};
        auto request = build_prompt(PromptTemplate::anchor_repair, slots);
        if (!request) break;
        auto reply = gateway.chat(request.value());
        if (!reply || trim(reply.value()).empty()) continue;
        text = enforce_known_and_unique(trim(reply.value()));
    }

    auto still_missing = missing_anchors(text);
    if (!still_missing.empty()) {
        logging::warn("repair failed for " + std::to_string(still_missing.size()) +
                      " anchor(s); re-appending at document end");
        text += "\n\n---\n\n*Recovered media:*\n";
        for (const auto& token : still_missing) text += "\n" + token + "\n";
    }

    return deanchorize(text, map);
}

std::string extract_references(const std::string& report, const std::string& learnings_text) {
    struct Reference {
        std::string text;
        std::string url;
    };
    std::vector<Reference> references;
    std::set<std::string> seen_urls;
    std::set<std::string> seen_arxiv;

    auto scan_links = [&](const std::string& input) {
        std::size_t pos = 0;
        while ((pos = input.find('[', pos)) != std::string::npos) {
            if (pos > 0 && input[pos - 1] == '!') {  // image, not a reference
                ++pos;
                continue;
            }
            std::size_t close = input.find(']', pos);
            if (close == std::string::npos) break;
            if (close + 1 >= input.size() || input[close + 1] != '(') {
                pos = close + 1;
                continue;
            }
            std::size_t paren = input.find(')', close + 2);
            if (paren == std::string::npos) {
                pos = close + 1;
                continue;
            }
            std::string text = input.substr(pos + 1, close - pos - 1);
            std::string url = trim(input.substr(close + 2, paren - close - 2));
            pos = paren + 1;
            if (!starts_with(url, "http://") && !starts_with(url, "https://")) continue;
            if (!seen_urls.insert(url).second) continue;
            references.push_back({trim(text), url});
        }
    };

    auto scan_arxiv = [&](const std::string& input) {
        std::size_t pos = 0;
        while ((pos = input.find(':', pos)) != std::string::npos) {
            if (pos < 5 || to_lower(input.substr(pos - 5, 5)) != "arxiv") {
                ++pos;
                continue;
            }
            std::size_t cursor = pos + 1;
            while (cursor < input.size() && input[cursor] == ' ') ++cursor;
            std::string id;
            int digits_before = 0, digits_after = 0;
            bool dot = false;
            while (cursor < input.size()) {
                char c = input[cursor];
                if (std::isdigit(static_cast<unsigned char>(c))) {
                    id += c;
                    (dot ? digits_after : digits_before)++;
                } else if (c == '.' && !dot && digits_before == 4) {
                    id += c;
                    dot = true;
                } else {
                    break;
                }
                ++cursor;
            }
            pos = cursor;
            if (digits_before == 4 && dot && digits_after >= 4 && digits_after <= 5 &&
                seen_arxiv.insert(id).second) {
                std::string url = "https://arxiv.org/abs/" + id;
                if (seen_urls.insert(url).second)
                    references.push_back({"arXiv:" + id, url});
            }
        }
    };

    scan_links(report);
    scan_arxiv(report);
    scan_links(learnings_text);
    scan_arxiv(learnings_text);

    if (references.empty()) return "";
    std::string out = "## References\n";
    for (const auto& reference : references) {
        std::string label = reference.text.empty() ? reference.url : reference.text;
        out += "\n- [" + sanitize_caption(label) + "](" + reference.url + ")";
    }
    out += "\n";
    return out;
}

std::string renumber_headings(const std::string& markdown) {
    std::vector<std::string> lines = split(markdown, '\n');
    std::map<int, int> counters;  // heading level -> running count
    for (auto& line : lines) {
        std::size_t hashes = 0;
        while (hashes < line.size() && line[hashes] == '#') ++hashes;
        if (hashes == 0 || hashes >= line.size() || line[hashes] != ' ') continue;
        int level = static_cast<int>(hashes);
        std::size_t cursor = hashes + 1;
        while (cursor < line.size() && line[cursor] == ' ') ++cursor;
        std::size_t number_start = cursor;
        int components = 0;
        while (cursor < line.size()) {
            if (!std::isdigit(static_cast<unsigned char>(line[cursor]))) break;
            while (cursor < line.size() && std::isdigit(static_cast<unsigned char>(line[cursor])))
                ++cursor;
            ++components;
            if (cursor < line.size() && line[cursor] == '.' && cursor + 1 < line.size() &&
                std::isdigit(static_cast<unsigned char>(line[cursor + 1]))) {
                ++cursor;
                continue;
            }
            break;
        }
        if (components == 0) continue;  // unnumbered heading stays as-is
        std::string punct;
        while (cursor < line.size() && (line[cursor] == '.' || line[cursor] == ')')) {
            punct += line[cursor];
            ++cursor;
        }
        counters[level] += 1;
        for (auto it = counters.upper_bound(level); it != counters.end();)
            it = counters.erase(it);
        // Compose from active ancestor counters, shallowest first, clipped
        // to the original component count.
        std::vector<int> path;
        for (const auto& [l, count] : counters)
            if (l <= level) path.push_back(count);
        while (static_cast<int>(path.size()) > components) path.erase(path.begin());
        std::string number;
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (i) number += ".";
            number += std::to_string(path[i]);
        }
        line = line.substr(0, number_start) + number + punct + line.substr(cursor);
    }
    return join(lines, "\n");
}

}  // namespace deepreport
