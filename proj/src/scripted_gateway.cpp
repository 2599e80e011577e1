#include "deepreport/scripted_gateway.hpp"

#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepreport/http_gateway.hpp"

namespace deepreport {

using nlohmann::json;

namespace {

std::string line_value(const std::string& text, const std::string& marker) {
    auto pos = text.find(marker);
    if (pos == std::string::npos) return "";
    auto start = pos + marker.size();
    auto end = text.find('\n', start);
    return trim(text.substr(start, end == std::string::npos ? std::string::npos : end - start));
}

std::string quoted_value(const std::string& text, const std::string& marker) {
    auto pos = text.find(marker);
    if (pos == std::string::npos) return "";
    auto open = text.find('"', pos + marker.size());
    if (open == std::string::npos) return "";
    auto close = text.find('"', open + 1);
    if (close == std::string::npos) return "";
    return text.substr(open + 1, close - open - 1);
}

int first_int_after(const std::string& text, const std::string& marker, int fallback) {
    auto pos = text.find(marker);
    if (pos == std::string::npos) return fallback;
    pos += marker.size();
    while (pos < text.size() && !std::isdigit(static_cast<unsigned char>(text[pos]))) {
        if (text[pos] == '\n' && pos - text.find(marker) > 80) return fallback;
        ++pos;
    }
    std::string digits;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
        digits += text[pos++];
    auto value = parse_int(digits);
    return value ? *value : fallback;
}

std::vector<int> learning_ids_in(const std::string& text) {
    std::vector<int> ids;
    std::set<int> seen;
    std::size_t pos = 0;
    while ((pos = text.find("[id ", pos)) != std::string::npos) {
        std::size_t start = pos + 4;
        std::size_t end = start;
        while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
        if (end > start && end < text.size() && text[end] == ']') {
            int id = *parse_int(text.substr(start, end - start));
            if (seen.insert(id).second) ids.push_back(id);
        }
        pos = end;
    }
    return ids;
}

std::optional<json> candidates_json_in(const std::string& text) {
    auto marker = text.find("Candidates:");
    if (marker == std::string::npos) return std::nullopt;
    auto start = text.find('[', marker);
    auto end = text.rfind(']');
    if (start == std::string::npos || end == std::string::npos || end <= start) return std::nullopt;
    try {
        return json::parse(text.substr(start, end - start + 1));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// (source url, link text) pairs found in "(Source: url)" learning lines.
std::vector<std::string> source_urls_in(const std::string& text) {
    std::vector<std::string> urls;
    std::set<std::string> seen;
    std::size_t pos = 0;
    while ((pos = text.find("(Source: ", pos)) != std::string::npos) {
        std::size_t start = pos + 9;
        std::size_t end = text.find(')', start);
        if (end == std::string::npos) break;
        std::string url = text.substr(start, end - start);
        if (seen.insert(url).second) urls.push_back(url);
        pos = end;
    }
    return urls;
}

std::string slug_words(const std::string& url) {
    std::string filename = url_filename(url);
    auto dot = filename.rfind('.');
    if (dot != std::string::npos) filename = filename.substr(0, dot);
    std::string words;
    for (char c : filename)
        words += std::isalnum(static_cast<unsigned char>(c)) ? c : ' ';
    return trim(words);
}

std::string titlecase(const std::string& words) {
    std::string out = words;
    bool start = true;
    for (char& c : out) {
        if (std::isalpha(static_cast<unsigned char>(c)) && start)
            c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        start = !std::isalnum(static_cast<unsigned char>(c));
    }
    return out;
}

// The four fixed section titles the scripted planner maintains.
const std::vector<std::string>& script_sections() {
    static const std::vector<std::string> kSections = {
        "Background and Context", "System Architecture", "Benchmark Results",
        "Open Problems and Outlook"};
    return kSections;
}

std::string guess_recommended_section(const std::string& alt) {
    if (contains_ci(alt, "architecture") || contains_ci(alt, "pipeline") ||
        contains_ci(alt, "module"))
        return "System Architecture";
    if (contains_ci(alt, "benchmark") || contains_ci(alt, "chart") || contains_ci(alt, "curve") ||
        contains_ci(alt, "throughput"))
        return "Benchmark Results";
    return "Background and Context";
}

std::optional<FigureType> guess_figure_type(const std::string& alt) {
    if (contains_ci(alt, "architecture")) return FigureType::architecture;
    if (contains_ci(alt, "pipeline")) return FigureType::pipeline;
    if (contains_ci(alt, "benchmark")) return FigureType::benchmark;
    if (contains_ci(alt, "chart") || contains_ci(alt, "curve")) return FigureType::result_chart;
    if (contains_ci(alt, "table")) return FigureType::ablation_table;
    return FigureType::other;
}

}  // namespace

ScriptedGateway::ScriptedGateway(ScriptedGatewayOptions options) : options_(options) {}

std::vector<SearchResult> ScriptedGateway::search(const std::string& query, int top_k) {
    std::vector<SearchResult> results;
    std::uint64_t h = fnv1a64(query);
    for (int i = 0; i < top_k; ++i) {
        std::uint64_t page_hash = fnv1a64(std::to_string(i), h);
        SearchResult r;
        r.url = "https://site-" + std::to_string(page_hash % 5) + ".example/articles/" +
                hex64(page_hash).substr(0, 10);
        r.title = "Article " + hex64(page_hash).substr(0, 6);
        r.snippet = "Coverage of " + query;
        results.push_back(std::move(r));
    }
    return results;
}

Result<ScrapedPage> ScriptedGateway::fetch_page(const std::string& url) {
    std::uint64_t h = fnv1a64(url);
    std::string tag = hex64(h).substr(0, 6);

    std::string markdown;
    markdown += "# Field Notes " + tag + "\n\n";
    markdown += "This page surveys the system design space. A companion "
                "[technical whitepaper](https://refs.example/paper-" + tag + ") gives the "
                "formal treatment, and the preprint arXiv:2401." +
                std::to_string(1000 + static_cast<int>(h % 9000)) + " reports the measurements.\n\n";
    std::size_t architecture_offset = markdown.size();
    markdown += "The deployment separates ingestion, planning, and rendering stages, each "
                "scaled independently.\n\n";
    std::size_t benchmark_offset = markdown.size();
    markdown += "Throughput grows with batch size until the planner saturates; latency stays "
                "flat in the measured range. See the [methods appendix](https://refs.example/methods-" +
                tag + ") for the setup.\n";

    std::vector<RawImageMeta> images;
    {
        RawImageMeta architecture;
        architecture.url = "https://site-" + std::to_string(h % 5) + ".example/figs/" + tag +
                           "-system-architecture-diagram.png";
        architecture.alt = "system architecture diagram with labeled modules";
        architecture.content_type = "image/png";
        architecture.file_size_bytes = 80000 + static_cast<std::int64_t>(h % 9000);
        architecture.markdown_offset = architecture_offset;
        images.push_back(architecture);

        RawImageMeta logo;
        logo.url = "https://site-" + std::to_string(h % 5) + ".example/assets/logo.png";
        logo.alt = "company logo";
        logo.content_type = "image/png";
        logo.file_size_bytes = 12000;
        logo.markdown_offset = 0;
        images.push_back(logo);

        if (h % 2 == 0) {
            RawImageMeta benchmark;
            benchmark.url = "https://site-" + std::to_string(h % 5) + ".example/figs/" + tag +
                            "-benchmark-results-chart.png";
            benchmark.alt = "benchmark results chart comparing throughput";
            benchmark.content_type = "image/png";
            benchmark.file_size_bytes = 64000 + static_cast<std::int64_t>(h % 5000);
            benchmark.markdown_offset = benchmark_offset;
            images.push_back(benchmark);
        }
        if (h % 3 == 0) {
            RawImageMeta shared;
            shared.url = "https://cdn-shared.example/figs/common-pipeline-overview.png?utm_source=feed";
            shared.alt = "pipeline overview diagram shared across mirrors";
            shared.content_type = "image/png";
            shared.file_size_bytes = 70000;
            shared.markdown_offset = architecture_offset;
            images.push_back(shared);
        }
        RawImageMeta decorative;
        decorative.url = "https://site-" + std::to_string(h % 5) + ".example/assets/divider.svg";
        decorative.alt = "decorative banner";
        decorative.markdown_offset = benchmark_offset;
        images.push_back(decorative);
    }

    return Result<ScrapedPage>::ok(
        finalize_scraped_page(url, std::move(markdown), std::move(images), 8000, 140));
}

Result<std::string> ScriptedGateway::chat(const ChatRequest& request) {
    const std::string& user = request.user;
    const std::string& system = request.system;
    std::uint64_t h = fnv1a64(user);

    // --- query generation (initial and outline-guided) ---
    if (user.find("generate a list of SERP queries") != std::string::npos ||
        user.find("targeted search queries for the next research round") != std::string::npos) {
        int n = first_int_after(user, "maximum of", first_int_after(user, "generate", 5));
        std::string topic = first_tag_block(user, "prompt").value_or(line_value(user, "Topic: "));
        if (topic.empty()) topic = "the research topic";
        static const char* kFacets[] = {
            "system architecture diagram", "performance benchmark chart", "deployment case study",
            "comparison table of frameworks", "visual schematic of the pipeline",
            "failure mode analysis", "scaling behavior measurements", "operator survey results"};
        std::string out;
        for (int i = 0; i < n; ++i) {
            out += topic + " " + kFacets[(h + static_cast<std::uint64_t>(i)) % 8] + " v" +
                   std::to_string((h % 7) + static_cast<std::uint64_t>(i)) + "\n";
        }
        return Result<std::string>::ok(out);
    }

    // --- learning extraction ---
    if (system.find("extracting information from web pages") != std::string::npos) {
        auto contents = first_tag_block(user, "contents").value_or("");
        auto placeholders = extract_image_placeholders(contents);
        auto links = [&]() {
            std::vector<std::string> found;
            std::size_t pos = 0;
            while ((pos = contents.find("](http", pos)) != std::string::npos) {
                auto end = contents.find(')', pos);
                if (end == std::string::npos) break;
                found.push_back(contents.substr(pos + 2, end - pos - 2));
                pos = end;
            }
            return found;
        }();
        std::string link1 = links.empty() ? "https://refs.example/fallback" : links.front();

        std::string out;
        out += "<learning>\n";
        out += "The pipeline separates ingestion, planning, and rendering into independently "
               "scaled stages, per the [technical whitepaper](" + link1 + ").";
        if (!placeholders.empty()) {
            out += " The layout is visible in [" + placeholders.front().id + ": " +
                   (placeholders.front().description.empty() ? "figure"
                                                             : placeholders.front().description) +
                   "].\n";
            out += "<evidence_atom image_id=\"" + placeholders.front().id + "\">\n";
            out += "visual_features: labeled boxes for ingestion, planning, and rendering with "
                   "directed arrows\n";
            out += "deductive_fact: the system decomposes into three independently scaled stages\n";
            out += "rationale: the diagram documents the decomposition the text claims\n";
            out += "</evidence_atom>\n";
        } else {
            out += "\n";
        }
        out += "</learning>\n";
        out += "<learning>\n";
        out += "Reported throughput grows with batch size until planner saturation while latency "
               "stays flat, per the preprint arXiv:2401." + std::to_string(1000 + static_cast<int>(h % 9000)) + ".";
        if (placeholders.size() > 1) {
            out += " Measured curves appear in [" + placeholders[1].id + "].";
        }
        out += "\n</learning>\n";
        out += "<follow_up_question>Which stage saturates first under mixed workloads?"
               "</follow_up_question>\n";
        out += "<follow_up_question>How does the planner degrade with stale evidence?"
               "</follow_up_question>\n";
        return Result<std::string>::ok(out);
    }

    // --- outline update ---
    if (system.find("expert research planner") != std::string::npos) {
        auto ids = learning_ids_in(line_value(user, "All learnings so far:").empty()
                                       ? user
                                       : user.substr(user.find("All learnings so far:")));
        std::string out = "<adaptive_outline>\n";
        const auto& sections = script_sections();
        for (std::size_t s = 0; s < sections.size(); ++s) {
            out += "# " + std::to_string(s + 1) + ". " + sections[s] + "\n";
            std::string cites;
            int used = 0;
            for (std::size_t i = s; i < ids.size() && used < 3; i += sections.size(), ++used) {
                if (!cites.empty()) cites += ", ";
                cites += "id " + std::to_string(ids[i]);
            }
            if (!cites.empty())
                out += "a. Key finding grounded in collected evidence <citation>" + cites +
                       "</citation>\n";
            if (s == 1) {
                out += "## 2.1 Stage Decomposition\n";
                if (!ids.empty())
                    out += "a. The staged layout and its scaling behavior <citation>id " +
                           std::to_string(ids.front()) + "</citation>\n";
            }
            if (s == 3) out += "Gap: long-term operational data is still missing\n";
        }
        out += "</adaptive_outline>\n";
        return Result<std::string>::ok(out);
    }

    // --- context classification ---
    if (system.find("triaging web images") != std::string::npos) {
        auto candidates = candidates_json_in(user);
        json out = json::array();
        if (candidates) {
            double relevance = 4.9;
            for (const auto& item : *candidates) {
                std::string alt = item.value("alt", "");
                bool technical = contains_ci(alt, "diagram") || contains_ci(alt, "chart") ||
                                 contains_ci(alt, "table") || contains_ci(alt, "curve") ||
                                 contains_ci(alt, "overview");
                json entry;
                entry["image_id"] = item.value("image_id", "");
                entry["keep"] = technical;
                auto type = guess_figure_type(alt);
                entry["figure_type"] = type ? to_string(*type) : "other";
                entry["relevance"] = technical ? relevance : 1.0;
                entry["primary_source"] = contains_ci(alt, "architecture");
                out.push_back(entry);
                if (technical) relevance = std::max(1.0, relevance - 0.1);
            }
        }
        return Result<std::string>::ok(out.dump(2));
    }

    // --- topic rerank ---
    if (system.find("selecting source images for a report topic") != std::string::npos) {
        auto candidates = candidates_json_in(user);
        json out = json::array();
        if (candidates) {
            double score = 5.0;
            for (const auto& item : *candidates) {
                std::string alt = item.value("alt", "");
                json entry;
                entry["image_id"] = item.value("image_id", "");
                entry["relevance_score"] = score;
                entry["should_keep"] = true;
                entry["recommended_section"] = guess_recommended_section(alt);
                entry["why_relevant"] = "matches the section focus";
                out.push_back(entry);
                score = std::max(1.0, score - 0.25);
            }
        }
        return Result<std::string>::ok(out.dump(2));
    }

    // --- vision analysis ---
    if (system.find("OCR and technical-figure understanding assistant") != std::string::npos) {
        std::string image_url = request.images.empty() ? "figure.png" : request.images.front().url;
        std::string words = slug_words(image_url);
        if (words.empty()) words = "technical figure";
        std::string out;
        out += "visible_title: " + titlecase(words) + "\n";
        out += "visible_text: stage labels, axis captions, and throughput numbers\n";
        out += "ocr_keywords: " + replace_all(words, " ", ", ") + ", system, stages\n";
        out += "ocr_summary: the figure lays out " + words + " with annotated components\n";
        out += "deductive_evidence_atoms:\n";
        out += "[Visual Feature] labeled module boxes with directed arrows -> [Deductive Fact] "
               "the design separates ingestion, planning, and rendering -> [Rationale] the "
               "separation claim is directly visible\n";
        out += "[Visual Feature] throughput axis rising with batch size -> [Deductive Fact] "
               "throughput scales until planner saturation -> [Rationale] the measured trend "
               "supports the scaling claim\n";
        out += "[Visual Feature] legend naming deployment variants -> [Deductive Fact] several "
               "configurations were measured on one setup -> [Rationale] comparability across "
               "variants is established\n";
        return Result<std::string>::ok(out);
    }

    // --- final selection ---
    if (system.find("final call on which analyzed source figures") != std::string::npos) {
        auto candidates = candidates_json_in(user);
        json out = json::array();
        if (candidates) {
            double composite = 4.9;
            for (const auto& item : *candidates) {
                json entry;
                entry["image_id"] = item.value("image_id", "");
                entry["keep_decision"] = true;
                entry["composite_score"] = composite;
                entry["credibility"] = 4.0;
                entry["supported_claims"] =
                    "shows the labeled stage layout and the measured throughput trend";
                entry["integration_advice"] =
                    "place next to the paragraph that walks through the stages";
                out.push_back(entry);
                composite = std::max(1.0, composite - 0.05);
            }
        }
        return Result<std::string>::ok(out.dump(2));
    }

    // --- style guide ---
    if (system.find("professional documents that combine insightful analysis") != std::string::npos) {
        return Result<std::string>::ok(
            "<style_guide>\nAnalytical, source-grounded tone. One accent color (#2b6cb0) on a "
            "white background; every axis labeled with units; figure captions state the "
            "takeaway. Generated charts stay at 700px width.\n</style_guide>\n");
    }

    // --- section generation ---
    if (user.find("Write the full Markdown content for this section now.") != std::string::npos) {
        std::string title = quoted_value(user, "This section is titled: ");
        std::string summary = quoted_value(user, "Summary/Outline of this section: ");
        int number = first_int_after(summary, "#", 1);
        auto learnings_pos = user.find("routed research learnings");
        std::string learnings_block =
            learnings_pos == std::string::npos ? "" : user.substr(learnings_pos);
        auto urls = source_urls_in(learnings_block);
        std::string gap = line_value(user, "Known evidence gap for this section, if any:\n");
        if (gap.empty()) {
            auto gap_pos = user.find("Known evidence gap");
            if (gap_pos != std::string::npos) {
                auto nl = user.find('\n', gap_pos);
                if (nl != std::string::npos) gap = trim(line_value(user.substr(nl), ""));
            }
        }

        auto images_pos = user.find("Available Image Placeholders for this section:");
        std::vector<ImagePlaceholder> images;
        if (images_pos != std::string::npos) {
            auto rules_pos = user.find("Citation and verifiability rules:", images_pos);
            images = extract_image_placeholders(
                user.substr(images_pos, rules_pos == std::string::npos ? std::string::npos
                                                                       : rules_pos - images_pos));
        }

        std::string out = "## " + std::to_string(number) + ". " + title + "\n\n";
        out += "The collected evidence describes a staged design whose components scale "
               "independently";
        if (!urls.empty()) out += " ([source](" + urls.front() + "))";
        out += ". Operational measurements show throughput climbing with batch size until "
               "the planner saturates";
        if (urls.size() > 1) out += " ([measurements](" + urls[1] + "))";
        out += ".\n";

        if (!images.empty()) {
            const std::string& image_id = images.front().id;
            out += "\n[" + image_id + "]\n\n";
            out += "The figure's labeled module boxes and directed arrows make the stage "
                   "separation concrete; the throughput axis confirms the scaling claim.\n";
            if (number == 3 && options_.adversarial_section_refs) {
                out += "\nAs [Image_999: phantom telemetry view] would suggest, tail latency "
                       "stays bounded. The same layout appears again in [" + image_id + "].\n";
            }
        }
        if (number == 3) {
            out += "\n<visualization>\n";
            out += json{{"title", "Throughput by configuration"},
                        {"type", "bar"},
                        {"x_label", "configuration"},
                        {"y_label", "requests per second"},
                        {"data", json::array({json::array({"baseline", 112}),
                                              json::array({"staged", 187}),
                                              json::array({"staged+cache", 243})})}}
                       .dump(2);
            out += "\n</visualization>\n";
        }
        auto not_none = [](const std::string& s) { return !s.empty() && s != "none"; };
        if (not_none(gap))
            out += "\nEvidence on this aspect remains thin; the report treats the following as "
                   "open: " + gap + "\n";
        return Result<std::string>::ok(out);
    }

    // --- global one-pass report ---
    if (user.find("Write the full Markdown report now.") != std::string::npos) {
        auto outline_pos = user.find("Report outline:");
        auto style_pos = user.find("Use the Visualization Style Guide:");
        std::string outline_block =
            outline_pos != std::string::npos && style_pos != std::string::npos
                ? user.substr(outline_pos, style_pos - outline_pos)
                : "";
        auto images_pos = user.find("Available Image Placeholders:");
        std::vector<ImagePlaceholder> images;
        if (images_pos != std::string::npos)
            images = extract_image_placeholders(user.substr(images_pos));
        auto learnings_pos = user.find("research learnings as your knowledge base:");
        auto urls = source_urls_in(learnings_pos == std::string::npos ? user
                                                                      : user.substr(learnings_pos));

        std::string out;
        int section_number = 0;
        for (const auto& raw : split_lines(outline_block)) {
            std::string line = trim(raw);
            if (!starts_with(line, "# ")) continue;
            ++section_number;
            auto dot = line.find('.');
            std::string title = dot == std::string::npos ? line.substr(2) : trim(line.substr(dot + 1));
            out += "## " + std::to_string(section_number) + ". " + title + "\n\n";
            out += "Evidence-grounded discussion of " + title + ".";
            if (!urls.empty())
                out += " ([source](" + urls[(section_number - 1) % urls.size()] + "))";
            out += "\n\n";
            if (section_number == 2 && !images.empty())
                out += "[" + images.front().id + "]\n\nThe labeled stages in the figure anchor "
                       "this walkthrough.\n\n";
        }
        if (out.empty()) out = "## 1. Findings\n\nSummary of the collected evidence.\n";
        return Result<std::string>::ok(out);
    }

    // --- chart actor ---
    if (system.find("HTML/D3.js V7 implementation expert") != std::string::npos) {
        std::string title = "Generated chart";
        auto spec_pos = user.find("Design specification:");
        if (spec_pos != std::string::npos) {
            auto start = user.find('{', spec_pos);
            auto end = user.find("\n\n", spec_pos);
            if (start != std::string::npos) {
                try {
                    json spec = json::parse(user.substr(start, end == std::string::npos
                                                                   ? std::string::npos
                                                                   : end - start));
                    title = spec.value("title", title);
                } catch (const std::exception&) {
                }
            }
        }
        std::string html;
        html += "<!DOCTYPE html>\n<html>\n<head>\n";
        html += "<script src=\"https://d3js.org/d3.v7.min.js\"></script>\n";
        html += "</head>\n<body>\n";
        html += "<div id=\"chart\" style=\"width:700px\"></div>\n";
        html += "<script>\nconst width = 700;\nconst title = " + json(title).dump() + ";\n";
        html += "const svg = d3.select('#chart').append('svg').attr('width', width)"
                ".attr('height', 420);\n";
        html += "svg.append('text').attr('x', 350).attr('y', 24).attr('text-anchor', 'middle')"
                ".text(title);\n";
        html += "</script>\n</body>\n</html>\n";
        return Result<std::string>::ok(html);
    }

    // --- chart critic ---
    if (user.find("If no issues are found, end with \"No issues found.\"") != std::string::npos) {
        return Result<std::string>::ok("No issues found.");
    }

    // --- chart pairwise choice ---
    if (user.find("Reply with exactly \"A\"") != std::string::npos) {
        return Result<std::string>::ok("A");
    }

    // --- report refinement (echo, anchors preserved) ---
    if (system.find("expert research report rewriter") != std::string::npos) {
        auto pos = user.find("Current report with media anchors: ");
        if (pos == std::string::npos) return Result<std::string>::ok(user);
        return Result<std::string>::ok(user.substr(pos + 35));
    }

    // --- anchor repair ---
    if (system.find("media anchor tokens were damaged") != std::string::npos) {
        auto missing_pos = user.find("currently missing:");
        auto report_pos = user.find("\n\n", missing_pos);
        std::string report = report_pos == std::string::npos ? "" : user.substr(report_pos + 2);
        // Drop the instruction paragraph preceding the report body.
        auto body_pos = report.find("\n\n");
        if (body_pos != std::string::npos) report = report.substr(body_pos + 2);
        std::string missing = missing_pos == std::string::npos
                                  ? ""
                                  : user.substr(missing_pos + 18,
                                                user.find("\n\n", missing_pos) - missing_pos - 18);
        for (const auto& token : split_lines(missing)) {
            std::string t = trim(token);
            if (!t.empty()) report += "\n\n" + t + "\n";
        }
        return Result<std::string>::ok(report);
    }

    // --- judge ---
    if (system.find("expert evaluator of AI-generated reports") != std::string::npos) {
        std::string out = "<evaluation>\n  <report>\n";
        const char* tags[5] = {"informativeness_and_depth", "coherence_and_organization",
                               "verifiability", "visualization_quality",
                               "original_image_integration"};
        const char* values[5] = {"4.0", "4.0", "3.5", "4.0", "3.5"};
        for (int i = 0; i < 5; ++i) {
            out += std::string("    <") + tags[i] + "><score>" + values[i] +
                   "</score><justification>scripted evaluation</justification></" + tags[i] + ">\n";
        }
        out += "  </report>\n</evaluation>\n";
        return Result<std::string>::ok(out);
    }

    return Result<std::string>::ok("OK");
}

}  // namespace deepreport
