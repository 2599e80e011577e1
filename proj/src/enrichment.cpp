#include "deepreport/enrichment.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "deepreport/log.hpp"
#include "deepreport/prompts.hpp"

namespace deepreport {

using nlohmann::json;

namespace {

bool contains_any(const std::string& haystack, const std::vector<std::string>& needles,
                  std::string* hit = nullptr) {
    for (const auto& needle : needles) {
        if (!needle.empty() && contains_ci(haystack, needle)) {
            if (hit) *hit = needle;
            return true;
        }
    }
    return false;
}

void sort_by_relevance_then_id(std::vector<ImageCandidate>& candidates) {
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const ImageCandidate& a, const ImageCandidate& b) {
                         double ra = a.relevance.value_or(0.0);
                         double rb = b.relevance.value_or(0.0);
                         if (ra != rb) return ra > rb;
                         return candidate_id_less(a.id, b.id);
                     });
}

json candidate_summary_json(const ImageCandidate& c, bool include_analysis) {
    json j;
    j["image_id"] = c.id;
    j["alt"] = c.alt_text;
    j["context"] = c.surrounding_text;
    j["page_url"] = c.page_url;
    j["url"] = c.url;
    if (c.figure_type) j["figure_type"] = to_string(*c.figure_type);
    if (c.relevance) j["relevance"] = *c.relevance;
    if (include_analysis && c.ocr) {
        j["visible_title"] = c.ocr->visible_title;
        j["ocr_summary"] = c.ocr->summary;
        j["ocr_keywords"] = c.ocr->keywords;
        json atoms = json::array();
        for (const auto& atom : c.atoms)
            atoms.push_back(atom.visual_features + " -> " + atom.deductive_fact + " -> " +
                            atom.rationale);
        j["evidence_atoms"] = atoms;
        if (c.recommended_section) j["recommended_section"] = *c.recommended_section;
    }
    return j;
}

std::optional<json> parse_json_array_reply(const std::string& reply) {
    // The reply may wrap the array in prose or a code fence; find the array.
    auto start = reply.find('[');
    auto end = reply.rfind(']');
    if (start == std::string::npos || end == std::string::npos || end <= start) return std::nullopt;
    try {
        json j = json::parse(reply.substr(start, end - start + 1));
        if (!j.is_array()) return std::nullopt;
        return j;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

double clamp_score(double v) { return std::min(5.0, std::max(0.0, v)); }

// Lowercase alphanumeric tokens with a plural-insensitive tail
// ("Benchmarks" meets "benchmark"); pure numbers dropped so "4. Results"
// matches "Results".
std::set<std::string> normalized_title_tokens(const std::string& title) {
    std::set<std::string> tokens;
    std::string current;
    auto flush = [&]() {
        if (current.empty()) return;
        bool numeric = std::all_of(current.begin(), current.end(), [](char c) {
            return std::isdigit(static_cast<unsigned char>(c));
        });
        if (!numeric) {
            if (current.size() > 3 && current.back() == 's') current.pop_back();
            tokens.insert(current);
        }
        current.clear();
    };
    for (char ch : title) {
        if (std::isalnum(static_cast<unsigned char>(ch)))
            current += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        else
            flush();
    }
    flush();
    return tokens;
}

}  // namespace

PruneDecision heuristic_prune(const ImageCandidate& candidate, const SignalWords& signals) {
    const std::string haystack =
        candidate.alt_text + " " + url_filename(candidate.url) + " " + candidate.surrounding_text;
    std::string asset_hit;
    if (!contains_any(haystack, signals.asset, &asset_hit)) return {true, "no asset signal"};
    if (contains_any(haystack, signals.technical))
        return {true, "technical signal overrides '" + asset_hit + "'"};
    return {false, "asset signal: " + asset_hit};
}

std::string match_section_title(const std::string& recommended,
                                const std::vector<std::string>& titles) {
    auto recommended_tokens = normalized_title_tokens(recommended);
    if (recommended_tokens.empty()) return "unassigned";
    std::string best_title = "unassigned";
    double best_score = 0.0;
    for (const auto& title : titles) {
        auto title_tokens = normalized_title_tokens(title);
        if (title_tokens.empty()) continue;
        std::size_t common = 0;
        for (const auto& token : recommended_tokens)
            if (title_tokens.count(token)) ++common;
        double jaccard =
            static_cast<double>(common) /
            static_cast<double>(recommended_tokens.size() + title_tokens.size() - common);
        if (jaccard > best_score) {
            best_score = jaccard;
            best_title = title;
        }
    }
    return best_score >= 0.4 ? best_title : "unassigned";
}

std::vector<ImageCandidate> classify_context(const std::vector<ImageCandidate>& candidates,
                                             const std::string& topic, const FunnelCaps& caps,
                                             Gateway& gateway, int* calls) {
    if (calls) *calls = 0;
    if (candidates.empty()) return {};

    std::vector<std::vector<ImageCandidate>> batches;
    for (std::size_t i = 0; i < candidates.size();
         i += static_cast<std::size_t>(caps.classify_batch))
        batches.emplace_back(
            candidates.begin() + static_cast<std::ptrdiff_t>(i),
            candidates.begin() +
                static_cast<std::ptrdiff_t>(std::min(
                    candidates.size(), i + static_cast<std::size_t>(caps.classify_batch))));

    auto batch_results = parallel_map<std::vector<ImageCandidate>, std::vector<ImageCandidate>>(
        batches, caps.parallelism, [&](const std::vector<ImageCandidate>& batch) {
            json batch_json = json::array();
            for (const auto& c : batch) batch_json.push_back(candidate_summary_json(c, false));
            PromptSlots slots{{"topic", topic}, {"candidates_json", batch_json.dump(2)}};
            auto request = build_prompt(PromptTemplate::image_classification, slots);
            std::vector<ImageCandidate> kept;
            if (!request) {
                logging::error("classification prompt build failed: " + request.error());
                return kept;
            }
            auto reply = gateway.chat(request.value());
            if (!reply) {
                logging::warn("classification batch failed; whole batch dropped: " + reply.error());
                return kept;
            }
            auto parsed = parse_json_array_reply(reply.value());
            if (!parsed) {
                logging::warn("classification batch output unparseable; whole batch dropped");
                return kept;
            }
            std::map<std::string, Classification> by_id;
            for (const auto& item : *parsed) {
                if (!item.is_object()) continue;
                Classification c;
                c.image_id = item.value("image_id", "");
                c.keep = item.value("keep", false);
                c.relevance = clamp_score(item.value("relevance", 0.0));
                c.primary_source = item.value("primary_source", false);
                if (item.contains("figure_type") && item["figure_type"].is_string())
                    c.figure_type = figure_type_from_string(item["figure_type"].get<std::string>());
                if (!c.image_id.empty()) by_id[c.image_id] = c;
            }
            for (const auto& candidate : batch) {
                auto it = by_id.find(candidate.id);
                if (it == by_id.end() || !it->second.keep) continue;  // missing -> keep=false
                ImageCandidate annotated = candidate;
                annotated.figure_type = it->second.figure_type;
                annotated.relevance = it->second.relevance;
                annotated.primary_source = it->second.primary_source;
                kept.push_back(std::move(annotated));
            }
            return kept;
        });
    if (calls) *calls = static_cast<int>(batches.size());

    std::vector<ImageCandidate> survivors;
    for (auto& batch : batch_results)
        for (auto& candidate : batch) survivors.push_back(std::move(candidate));
    sort_by_relevance_then_id(survivors);
    if (static_cast<int>(survivors.size()) > caps.after_classification)
        survivors.resize(static_cast<std::size_t>(caps.after_classification));
    return survivors;
}

std::vector<ImageCandidate> rerank_by_topic(const std::vector<ImageCandidate>& candidates,
                                            const std::string& topic,
                                            const std::vector<Learning>& learnings,
                                            const AdaptiveOutline& outline, const FunnelCaps& caps,
                                            Gateway& gateway) {
    if (candidates.empty()) return {};

    std::vector<std::string> titles;
    for (const auto& node : outline.nodes) titles.push_back(node.title);

    json candidates_json = json::array();
    for (const auto& c : candidates) candidates_json.push_back(candidate_summary_json(c, false));
    PromptSlots slots{{"topic", topic},
                      {"outline_clean", render_outline(outline, OutlineMode::reader)},
                      {"trimmed_learnings", format_learnings_block(learnings, 20000)},
                      {"candidates_json", candidates_json.dump(2)}};
    auto request = build_prompt(PromptTemplate::image_rerank, slots);
    if (!request) {
        logging::error("rerank prompt build failed: " + request.error());
        return {};
    }

    std::optional<json> parsed;
    ChatRequest attempt = request.value();
    for (int tries = 0; tries < 2 && !parsed; ++tries) {
        auto reply = gateway.chat(attempt);
        if (reply) parsed = parse_json_array_reply(reply.value());
        if (!parsed && tries == 0) {
            logging::warn("rerank output invalid; retrying once");
            attempt.user +=
                "\n\nYour previous response was not a valid JSON array. "
                "Return only the JSON array.";
        }
    }
    std::vector<ImageCandidate> ranked;
    if (!parsed) {
        logging::warn("rerank output invalid after retry; keeping input order");
        ranked = candidates;
        if (static_cast<int>(ranked.size()) > caps.after_rerank)
            ranked.resize(static_cast<std::size_t>(caps.after_rerank));
        return ranked;
    }

    std::map<std::string, const ImageCandidate*> by_id;
    for (const auto& c : candidates) by_id[c.id] = &c;
    for (const auto& item : *parsed) {
        if (!item.is_object()) continue;
        std::string id = item.value("image_id", "");
        auto it = by_id.find(id);
        if (it == by_id.end()) continue;  // unknown ID: entry ignored
        if (!item.value("should_keep", false)) {
            by_id.erase(it);
            continue;
        }
        ImageCandidate annotated = *it->second;
        annotated.relevance = clamp_score(item.value("relevance_score", 0.0));
        annotated.recommended_section =
            match_section_title(item.value("recommended_section", ""), titles);
        ranked.push_back(std::move(annotated));
        by_id.erase(it);  // first entry per ID wins
    }
    sort_by_relevance_then_id(ranked);
    if (static_cast<int>(ranked.size()) > caps.after_rerank)
        ranked.resize(static_cast<std::size_t>(caps.after_rerank));
    return ranked;
}

ImageCandidate visual_analyze(const ImageCandidate& candidate, const std::string& topic,
                              Gateway& gateway) {
    ImageCandidate out = candidate;
    PromptSlots slots{{"topic", topic}};
    auto request = build_prompt(PromptTemplate::vlm_analysis, slots);
    if (!request) {
        logging::error("vlm prompt build failed: " + request.error());
        return out;
    }
    ChatRequest chat = request.take();
    ImagePayload payload;
    payload.url = candidate.url;
    payload.name = candidate.id;
    chat.images.push_back(std::move(payload));

    auto reply = gateway.chat(chat);
    if (!reply) {
        logging::warn("visual analysis failed for " + candidate.id +
                      "; flagged unanalyzed: " + reply.error());
        return out;
    }

    OcrResult ocr;
    std::vector<EvidenceAtom> atoms;
    bool in_atoms = false;
    bool any_field = false;
    for (const auto& raw : split_lines(reply.value())) {
        std::string line = trim(raw);
        if (line.empty()) continue;
        std::string lower = to_lower(line);
        if (starts_with(lower, "visible_title:")) {
            ocr.visible_title = trim(line.substr(14));
            any_field = true;
            in_atoms = false;
        } else if (starts_with(lower, "visible_text:")) {
            ocr.visible_text = trim(line.substr(13));
            any_field = true;
            in_atoms = false;
        } else if (starts_with(lower, "ocr_keywords:")) {
            std::set<std::string> seen;
            for (const auto& keyword : split(line.substr(13), ',')) {
                std::string k = to_lower(trim(keyword));
                if (!k.empty() && seen.insert(k).second) ocr.keywords.push_back(k);
            }
            any_field = true;
            in_atoms = false;
        } else if (starts_with(lower, "ocr_summary:")) {
            ocr.summary = trim(line.substr(12));
            any_field = true;
            in_atoms = false;
        } else if (starts_with(lower, "deductive_evidence_atoms:")) {
            in_atoms = true;
        } else if (in_atoms) {
            // "- [Visual Feature] ... -> [Deductive Fact] ... -> [Rationale] ..."
            std::string body = line;
            if (starts_with(body, "-") || starts_with(body, "*")) body = trim(body.substr(1));
            if (!body.empty() && std::isdigit(static_cast<unsigned char>(body[0]))) {
                auto dot = body.find('.');
                if (dot != std::string::npos && dot <= 2) body = trim(body.substr(dot + 1));
            }
            auto strip_label = [](std::string part) {
                part = trim(part);
                if (starts_with(part, "[")) {
                    auto close = part.find(']');
                    if (close != std::string::npos) {
                        std::string label = to_lower(part.substr(1, close - 1));
                        if (label == "visual feature" || label == "deductive fact" ||
                            label == "rationale")
                            part = trim(part.substr(close + 1));
                    }
                }
                if (starts_with(part, ":")) part = trim(part.substr(1));
                return part;
            };
            std::vector<std::string> parts;
            std::size_t pos = 0;
            while (parts.size() < 2) {
                auto arrow = body.find("->", pos);
                if (arrow == std::string::npos) break;
                parts.push_back(body.substr(pos, arrow - pos));
                pos = arrow + 2;
            }
            if (parts.size() == 2) {
                parts.push_back(body.substr(pos));
                EvidenceAtom atom;
                atom.visual_features = strip_label(parts[0]);
                atom.deductive_fact = strip_label(parts[1]);
                atom.rationale = strip_label(parts[2]);
                atom.image_id = candidate.id;
                if (!atom.visual_features.empty() && !atom.deductive_fact.empty() &&
                    !atom.rationale.empty())
                    atoms.push_back(std::move(atom));
            }
        }
    }
    if (!any_field) {
        logging::warn("visual analysis output unparseable for " + candidate.id +
                      "; flagged unanalyzed");
        return out;
    }
    out.ocr = std::move(ocr);
    out.atoms = std::move(atoms);
    out.analyzed = true;
    return out;
}

std::vector<SelectedFigure> final_select(const std::vector<ImageCandidate>& candidates,
                                         const std::string& topic,
                                         const std::vector<Learning>& learnings,
                                         const FunnelCaps& caps, Gateway& gateway) {
    (void)learnings;  // topical context is already folded into the analysis
    std::vector<ImageCandidate> analyzed;
    for (const auto& c : candidates)
        if (c.analyzed && c.ocr) analyzed.push_back(c);
    if (analyzed.empty()) return {};

    json candidates_json = json::array();
    for (const auto& c : analyzed) candidates_json.push_back(candidate_summary_json(c, true));
    PromptSlots slots{{"topic", topic}, {"candidates_json", candidates_json.dump(2)}};
    auto request = build_prompt(PromptTemplate::final_selection, slots);
    if (!request) {
        logging::error("final selection prompt build failed: " + request.error());
        return {};
    }

    std::map<std::string, std::string> advice_by_id;
    std::vector<ImageCandidate> chosen;
    auto reply = gateway.chat(request.value());
    std::optional<json> parsed;
    if (reply) parsed = parse_json_array_reply(reply.value());
    if (!parsed) {
        logging::warn("final selection output invalid; falling back to relevance order");
        chosen = analyzed;
        sort_by_relevance_then_id(chosen);
        for (auto& c : chosen) c.composite_score = c.relevance.value_or(0.0);
    } else {
        std::map<std::string, const ImageCandidate*> by_id;
        for (const auto& c : analyzed) by_id[c.id] = &c;
        for (const auto& item : *parsed) {
            if (!item.is_object()) continue;
            std::string id = item.value("image_id", "");
            auto it = by_id.find(id);
            if (it == by_id.end()) continue;
            if (!item.value("keep_decision", false)) {
                by_id.erase(it);
                continue;
            }
            ImageCandidate c = *it->second;
            c.keep_decision = true;
            c.composite_score = clamp_score(item.value("composite_score", 0.0));
            c.credibility = clamp_score(item.value("credibility", c.credibility));
            c.evidence_role = item.value("supported_claims", "");
            advice_by_id[id] = item.value("integration_advice", "");
            chosen.push_back(std::move(c));
            by_id.erase(id);
        }
    }

    std::stable_sort(chosen.begin(), chosen.end(),
                     [](const ImageCandidate& a, const ImageCandidate& b) {
                         double ca = a.composite_score.value_or(0.0);
                         double cb = b.composite_score.value_or(0.0);
                         if (ca != cb) return ca > cb;
                         return candidate_id_less(a.id, b.id);
                     });

    std::vector<SelectedFigure> selected;
    std::set<std::string> used_keys;
    for (auto& c : chosen) {
        if (static_cast<int>(selected.size()) >= caps.final_cap) break;
        if (!used_keys.insert(c.dedup_key).second) continue;
        SelectedFigure figure;
        figure.brief.image_id = c.id;
        figure.brief.figure_type = c.figure_type;
        figure.brief.atoms = c.atoms;
        figure.brief.recommended_section = c.recommended_section.value_or("unassigned");
        auto advice_it = advice_by_id.find(c.id);
        figure.brief.integration_advice = advice_it == advice_by_id.end() ? "" : advice_it->second;
        figure.brief.composite_score = c.composite_score.value_or(0.0);
        figure.candidate = std::move(c);
        selected.push_back(std::move(figure));
    }
    return selected;
}

EnrichmentResult run_enrichment(const EvidencePool& pool, const AdaptiveOutline& outline,
                                const std::string& topic, const FunnelCaps& caps,
                                const SignalWords& signals, Gateway& gateway) {
    EnrichmentResult result;
    json drops = json::array();

    // Stage 1: heuristic pruning.
    std::vector<ImageCandidate> pruned;
    for (const auto& candidate : pool.images) {
        auto decision = heuristic_prune(candidate, signals);
        if (decision.keep) {
            pruned.push_back(candidate);
        } else {
            drops.push_back(
                {{"id", candidate.id}, {"stage", "heuristic_prune"}, {"reason", decision.reason}});
        }
    }

    // Stage 2: context classification.
    int classify_calls = 0;
    auto classified = classify_context(pruned, topic, caps, gateway, &classify_calls);
    {
        std::set<std::string> kept;
        for (const auto& c : classified) kept.insert(c.id);
        for (const auto& c : pruned)
            if (!kept.count(c.id))
                drops.push_back({{"id", c.id}, {"stage", "classification"}, {"reason", "not kept"}});
    }

    // Stage 3: topic reranking (needs a nonempty outline).
    std::vector<ImageCandidate> ranked;
    if (outline.empty()) {
        logging::warn("empty outline; skipping topic reranking");
        ranked = classified;
        if (static_cast<int>(ranked.size()) > caps.after_rerank)
            ranked.resize(static_cast<std::size_t>(caps.after_rerank));
    } else {
        ranked = rerank_by_topic(classified, topic, pool.learnings, outline, caps, gateway);
    }
    {
        std::set<std::string> kept;
        for (const auto& c : ranked) kept.insert(c.id);
        for (const auto& c : classified)
            if (!kept.count(c.id))
                drops.push_back({{"id", c.id}, {"stage", "rerank"}, {"reason", "not kept"}});
    }

    // Stage 4: visual analysis of the top-ranked candidates.
    std::vector<ImageCandidate> to_analyze(
        ranked.begin(),
        ranked.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(
                             ranked.size(), static_cast<std::size_t>(caps.vlm_budget))));
    auto analyzed = parallel_map<ImageCandidate, ImageCandidate>(
        to_analyze, caps.parallelism,
        [&](const ImageCandidate& c) { return visual_analyze(c, topic, gateway); });

    // Stage 5: final selection and score merging.
    result.selected = final_select(analyzed, topic, pool.learnings, caps, gateway);

    json briefs = json::array();
    for (const auto& figure : result.selected) briefs.push_back(figure.brief);
    result.audit = json{{"bypass", nullptr},
                        {"counts",
                         {{"initial", pool.images.size()},
                          {"after_prune", pruned.size()},
                          {"after_classification", classified.size()},
                          {"after_rerank", ranked.size()},
                          {"analyzed", analyzed.size()},
                          {"selected", result.selected.size()}}},
                        {"classification_calls", classify_calls},
                        {"drops", drops},
                        {"briefs", briefs}};
    return result;
}

EnrichmentResult metadata_only_select(const EvidencePool& pool, const FunnelCaps& caps,
                                      const SignalWords& signals) {
    EnrichmentResult result;

    struct Scored {
        const ImageCandidate* candidate;
        int signal_hits;
    };
    std::vector<Scored> scored;
    for (const auto& candidate : pool.images) {
        if (!heuristic_prune(candidate, signals).keep) continue;
        const std::string haystack = candidate.alt_text + " " + candidate.surrounding_text;
        int hits = 0;
        for (const auto& word : signals.technical)
            if (contains_ci(haystack, word)) ++hits;
        scored.push_back({&candidate, hits});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.signal_hits != b.signal_hits) return a.signal_hits > b.signal_hits;
        return candidate_id_less(a.candidate->id, b.candidate->id);
    });

    std::set<std::string> used_keys;
    for (const auto& entry : scored) {
        if (static_cast<int>(result.selected.size()) >= caps.final_cap) break;
        if (entry.signal_hits == 0) break;  // no textual signal at all
        if (!used_keys.insert(entry.candidate->dedup_key).second) continue;
        SelectedFigure figure;
        figure.candidate = *entry.candidate;
        figure.candidate.credibility = 2.5;  // neutral: no model-reported signal
        figure.candidate.composite_score = std::min(5.0, static_cast<double>(entry.signal_hits));
        figure.candidate.evidence_role = figure.candidate.alt_text;
        figure.brief.image_id = figure.candidate.id;
        figure.brief.figure_type = figure.candidate.figure_type;
        figure.brief.recommended_section = "unassigned";
        figure.brief.composite_score = *figure.candidate.composite_score;
        result.selected.push_back(std::move(figure));
    }

    json briefs = json::array();
    for (const auto& figure : result.selected) briefs.push_back(figure.brief);
    result.audit = json{{"bypass", "metadata_only"},
                        {"counts",
                         {{"initial", pool.images.size()}, {"selected", result.selected.size()}}},
                        {"briefs", briefs}};
    return result;
}

void to_json(json& j, const PlanningBrief& b) {
    j = json{{"image_id", b.image_id},
             {"atoms", b.atoms},
             {"recommended_section", b.recommended_section},
             {"integration_advice", b.integration_advice},
             {"composite_score", b.composite_score}};
    if (b.figure_type) j["figure_type"] = to_string(*b.figure_type);
}

void from_json(const json& j, PlanningBrief& b) {
    b.image_id = j.value("image_id", "");
    b.atoms = j.value("atoms", std::vector<EvidenceAtom>{});
    b.recommended_section = j.value("recommended_section", "unassigned");
    b.integration_advice = j.value("integration_advice", "");
    b.composite_score = j.value("composite_score", 0.0);
    if (j.contains("figure_type"))
        b.figure_type = figure_type_from_string(j.at("figure_type").get<std::string>());
}

}  // namespace deepreport
