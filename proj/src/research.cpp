#include "deepreport/research.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "deepreport/log.hpp"
#include "deepreport/prompts.hpp"

namespace deepreport {

using nlohmann::json;

namespace {

bool matches_excluded_format(const RawImageMeta& meta, const std::vector<std::string>& formats,
                             std::string* hit) {
    std::string url = to_lower(meta.url);
    std::string path = url;
    if (auto q = path.find('?'); q != std::string::npos) path = path.substr(0, q);
    for (const auto& format : formats) {
        std::string f = to_lower(format);
        bool matched = starts_with(f, ".") ? ends_with(path, f) : starts_with(url, f);
        if (!matched && meta.content_type && f == ".svg")
            matched = contains_ci(*meta.content_type, "svg");
        if (matched) {
            *hit = format;
            return true;
        }
    }
    return false;
}

std::string host_of(const std::string& url) {
    auto parts = parse_url(url);
    return parts ? parts->host : "";
}

std::vector<std::string> parse_query_lines(const std::string& text, int n,
                                           const std::vector<std::string>& prev_queries) {
    std::set<std::string> seen(prev_queries.begin(), prev_queries.end());
    std::vector<std::string> out;
    for (const auto& raw : split_lines(text)) {
        std::string line = trim(raw);
        if (line.empty()) continue;
        // Tolerate "1. query" / "- query" list decorations.
        if (line.size() > 2 && (line[0] == '-' || line[0] == '*') && line[1] == ' ')
            line = trim(line.substr(2));
        else if (std::isdigit(static_cast<unsigned char>(line[0]))) {
            auto dot = line.find_first_of(".)");
            if (dot != std::string::npos && dot <= 2) line = trim(line.substr(dot + 1));
        }
        if (line.empty() || !seen.insert(line).second) continue;
        out.push_back(line);
        if (static_cast<int>(out.size()) >= n) break;
    }
    return out;
}

std::optional<EvidenceAtom> parse_atom_block(const TagBlock& block) {
    EvidenceAtom atom;
    std::string image_id = tag_attr(block.attrs, "image_id");
    if (!image_id.empty()) atom.image_id = image_id;
    for (const auto& raw : split_lines(block.inner)) {
        std::string line = trim(raw);
        auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string key = to_lower(trim(line.substr(0, colon)));
        std::string value = trim(line.substr(colon + 1));
        if (key == "visual_features") atom.visual_features = value;
        else if (key == "deductive_fact") atom.deductive_fact = value;
        else if (key == "rationale") atom.rationale = value;
    }
    if (atom.visual_features.empty() || atom.deductive_fact.empty() || atom.rationale.empty())
        return std::nullopt;
    return atom;
}

}  // namespace

PrefilterDecision prefilter_image(const RawImageMeta& meta, const ResearchConfig& cfg) {
    if (meta.file_size_bytes && *meta.file_size_bytes < cfg.min_image_bytes)
        return {false, "min size " + std::to_string(cfg.min_image_bytes / 1024) + "KB"};

    std::string hit;
    if (matches_excluded_format(meta, cfg.excluded_formats, &hit))
        return {false, "excluded format " + hit};

    if (meta.content_type && !starts_with(to_lower(*meta.content_type), "image/"))
        return {false, "content type " + *meta.content_type};

    const std::string filename = url_filename(meta.url);
    for (const auto& blocked : cfg.blocklists.filename_substrings)
        if (!blocked.empty() && filename.find(to_lower(blocked)) != std::string::npos)
            return {false, "filename blocklist: " + blocked};

    for (const auto& blocked : cfg.blocklists.alt_substrings)
        if (!blocked.empty() && contains_ci(meta.alt, blocked))
            return {false, "alt blocklist: " + blocked};

    const std::string host = host_of(meta.url);
    for (const auto& blocked : cfg.blocklists.domains)
        if (!blocked.empty() && (host == to_lower(blocked) || ends_with(host, "." + to_lower(blocked)) ||
                                 host.find(to_lower(blocked)) != std::string::npos))
            return {false, "domain blocklist: " + blocked};

    return {true, "ok"};
}

PageImages collect_page_images(const ScrapedPage& page, const ResearchConfig& cfg,
                               EvidencePool& pool) {
    PageImages out;
    int survivors = 0;
    for (const auto& meta : page.images) {
        auto decision = prefilter_image(meta, cfg);
        if (!decision.keep) {
            out.dropped.emplace_back(meta.url, decision.reason);
            continue;
        }
        if (survivors >= cfg.per_page_image_cap) break;
        ++survivors;

        ImageCandidate fresh;
        fresh.url = meta.url;
        fresh.page_url = page.url;
        fresh.alt_text = meta.alt;
        fresh.surrounding_text =
            clip(meta.surrounding_text, 2 * static_cast<std::size_t>(cfg.context_window));
        fresh.file_size_bytes = meta.file_size_bytes;
        fresh.content_type = meta.content_type;
        fresh.dedup_key = normalize_dedup_key(meta.url);

        const ImageCandidate* existing = pool.find_image_by_dedup_key(fresh.dedup_key);
        if (existing == nullptr) {
            fresh.id = "Image_" + std::to_string(pool.images.size() + 1);
            existing = &pool.insert_or_get(std::move(fresh));
        }
        out.candidates.push_back(*existing);
        out.offsets.push_back(meta.markdown_offset);
    }
    return out;
}

std::vector<std::string> generate_queries(const std::string& topic,
                                          const std::vector<Learning>& learnings,
                                          const std::optional<AdaptiveOutline>& outline,
                                          const std::vector<std::string>& prev_queries, int n,
                                          Gateway& gateway) {
    PromptSlots slots;
    PromptTemplate tmpl;
    if (outline && !outline->empty()) {
        tmpl = PromptTemplate::outline_guided_query;
        slots["queries_num"] = std::to_string(n);
        slots["topic"] = topic;
        slots["current_outline"] = render_outline(*outline, OutlineMode::internal);
        slots["prev_queries"] = prev_queries.empty() ? "(none)" : join(prev_queries, "\n");
        slots["learning_str"] = format_learnings_block(learnings, 20000);
    } else {
        tmpl = PromptTemplate::initial_query;
        slots["queries_num"] = std::to_string(n);
        slots["query"] = topic;
        slots["learning_str"] = format_learnings_block(learnings, 20000);
    }
    auto request = build_prompt(tmpl, slots);
    if (!request) {
        logging::error("query prompt build failed: " + request.error());
        return {};
    }
    auto reply = gateway.chat(request.value());
    if (!reply) {
        logging::warn("query generation failed: " + reply.error());
        return {};
    }
    return parse_query_lines(reply.value(), n, prev_queries);
}

std::string inject_placeholders(const std::string& markdown, const PageImages& images) {
    // Insert back-to-front so earlier offsets stay valid.
    std::vector<std::size_t> order(images.candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return images.offsets[a] > images.offsets[b]; });
    std::string out = markdown;
    for (std::size_t i : order) {
        std::size_t offset = images.offsets[i];
        if (offset > out.size()) continue;  // beyond the truncation boundary
        const ImageCandidate& candidate = images.candidates[i];
        std::string alt = candidate.alt_text.empty() ? "image" : candidate.alt_text;
        std::string placeholder = "[" + candidate.id + ": " + replace_all(alt, "]", ")") + "]";
        out.insert(offset, placeholder);
    }
    return out;
}

ExtractionResult extract_learnings(const ScrapedPage& page, const std::string& query,
                                   const PageImages& images, const ResearchConfig& cfg,
                                   Gateway& gateway, int& next_learning_id, int round) {
    ExtractionResult result;
    if (trim(page.markdown).empty()) return result;

    PromptSlots slots;
    slots["query"] = query;
    slots["learning_num"] = std::to_string(cfg.learnings_per_page);
    slots["question_num"] = std::to_string(cfg.follow_up_questions);
    slots["contents"] = inject_placeholders(page.markdown, images);
    auto request = build_prompt(PromptTemplate::learning_extraction, slots);
    if (!request) {
        logging::error("extraction prompt build failed: " + request.error());
        return result;
    }
    auto reply = gateway.chat(request.value());
    if (!reply) {
        logging::warn("learning extraction failed for " + page.url + ": " + reply.error());
        return result;
    }

    std::set<std::string> known_ids;
    for (const auto& candidate : images.candidates) known_ids.insert(candidate.id);

    auto blocks = extract_tag_blocks(reply.value(), "learning");
    if (blocks.empty()) {
        logging::warn("unparseable extraction output for " + page.url + "; zero learnings kept");
        return result;
    }
    for (const auto& block : blocks) {
        if (static_cast<int>(result.learnings.size()) >= cfg.learnings_per_page) break;
        Learning learning;
        std::string text = block.inner;

        for (const auto& atom_block : extract_tag_blocks(text, "evidence_atom")) {
            if (auto atom = parse_atom_block(atom_block)) {
                if (atom->image_id && !known_ids.count(*atom->image_id)) atom->image_id.reset();
                learning.evidence_atoms.push_back(std::move(*atom));
            } else {
                logging::warn("incomplete evidence atom dropped for " + page.url);
            }
        }
        // Erase atom blocks from the learning text (recompute offsets after
        // each erase).
        for (;;) {
            auto atom_blocks = extract_tag_blocks(text, "evidence_atom");
            if (atom_blocks.empty()) break;
            text.erase(atom_blocks.front().begin, atom_blocks.front().end - atom_blocks.front().begin);
        }

        // Strip placeholders that reference unknown candidates.
        for (;;) {
            bool changed = false;
            for (const auto& placeholder : extract_image_placeholders(text)) {
                if (known_ids.count(placeholder.id)) continue;
                text.erase(placeholder.position, placeholder.length);
                logging::warn("placeholder " + placeholder.id + " not among page candidates; stripped");
                changed = true;
                break;
            }
            if (!changed) break;
        }

        learning.text = trim(text);
        if (learning.text.empty()) continue;
        for (const auto& placeholder : extract_image_placeholders(learning.text))
            if (std::find(learning.image_refs.begin(), learning.image_refs.end(), placeholder.id) ==
                learning.image_refs.end())
                learning.image_refs.push_back(placeholder.id);
        learning.source_url = page.url;
        learning.round = round;
        learning.id = next_learning_id++;
        result.learnings.push_back(std::move(learning));
    }

    for (const auto& question : extract_tag_blocks(reply.value(), "follow_up_question")) {
        if (static_cast<int>(result.follow_up_questions.size()) >= cfg.follow_up_questions) break;
        if (!question.inner.empty()) result.follow_up_questions.push_back(question.inner);
    }
    return result;
}

AdaptiveOutline update_outline(const std::string& topic,
                               const std::optional<AdaptiveOutline>& current,
                               const std::vector<Learning>& new_learnings,
                               const std::vector<Learning>& all_learnings, int round,
                               Gateway& gateway) {
    AdaptiveOutline previous = current.value_or(AdaptiveOutline{});
    PromptSlots slots;
    slots["topic"] = topic;
    slots["current_outline"] =
        previous.empty() ? "(none yet)" : render_outline(previous, OutlineMode::internal);
    slots["round_num"] = std::to_string(round);
    slots["new_learnings_str"] = format_learnings_block(new_learnings, 45000);
    slots["all_learnings_str"] = format_learnings_block(all_learnings, 45000);
    auto request = build_prompt(PromptTemplate::outline_update, slots);
    if (!request) {
        logging::error("outline prompt build failed: " + request.error());
        return previous;
    }
    auto reply = gateway.chat(request.value());
    if (!reply) {
        logging::warn("outline update failed: " + reply.error());
        return previous;
    }
    auto block = first_tag_block(reply.value(), "adaptive_outline");
    if (!block) {
        logging::warn("outline reply missing <adaptive_outline> block; keeping previous outline");
        return previous;
    }
    AdaptiveOutline updated;
    try {
        updated = parse_outline(*block);
    } catch (const OutlineParseError& e) {
        logging::warn(std::string("outline reply malformed (") + e.what() +
                      "); keeping previous outline");
        return previous;
    }
    std::vector<int> known;
    known.reserve(all_learnings.size());
    for (const auto& learning : all_learnings) known.push_back(learning.id);
    prune_unknown_citations(updated, known);
    return updated;
}

Result<ResearchOutput> run_research(const std::string& topic, const ResearchConfig& cfg,
                                    Gateway& gateway,
                                    const std::optional<std::filesystem::path>& run_dir) {
    ResearchOutput output;
    std::vector<std::string> issued_queries;
    std::set<std::string> fetched_urls;
    int next_learning_id = 1;

    if (run_dir) std::filesystem::create_directories(*run_dir / "rounds");

    for (int round = 1; round <= cfg.rounds; ++round) {
        std::optional<AdaptiveOutline> outline_opt;
        if (!output.outline.empty()) outline_opt = output.outline;
        auto queries = generate_queries(topic, output.pool.learnings, outline_opt, issued_queries,
                                        cfg.queries_per_round, gateway);
        if (queries.empty()) {
            logging::warn("round " + std::to_string(round) + " produced no queries; continuing");
            continue;
        }
        issued_queries.insert(issued_queries.end(), queries.begin(), queries.end());

        // Search runs sequentially (provider order is the determinism
        // anchor); page fetches run concurrently.
        struct PageTask {
            std::size_t query_index = 0;
            std::string query;
            std::string url;
        };
        std::vector<PageTask> tasks;
        for (std::size_t qi = 0; qi < queries.size(); ++qi) {
            auto results = gateway.search(queries[qi], cfg.pages_per_query);
            if (results.size() > static_cast<std::size_t>(cfg.pages_per_query))
                results.resize(static_cast<std::size_t>(cfg.pages_per_query));
            for (const auto& result : results) {
                if (result.url.empty() || !fetched_urls.insert(result.url).second) continue;
                tasks.push_back({qi, queries[qi], result.url});
            }
        }
        output.pages_attempted += static_cast<int>(tasks.size());

        auto pages = parallel_map<PageTask, Result<ScrapedPage>>(
            tasks, cfg.parallelism,
            [&](const PageTask& task) { return gateway.fetch_page(task.url); });

        // Sequential merge in (query, result) order: candidate IDs are
        // assigned here, before any extraction prompt is built.
        struct Extraction {
            std::string query;
            ScrapedPage page;
            PageImages images;
        };
        std::vector<Extraction> extractions;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (!pages[i]) {
                logging::warn("skipping page " + tasks[i].url + ": " + pages[i].error());
                continue;
            }
            Extraction extraction;
            extraction.query = tasks[i].query;
            extraction.page = pages[i].take();
            extraction.images = collect_page_images(extraction.page, cfg, output.pool);
            extractions.push_back(std::move(extraction));
        }

        // Extraction calls run concurrently; learning IDs are assigned in
        // merge order below.
        std::vector<std::size_t> indices(extractions.size());
        for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
        auto extracted = parallel_map<std::size_t, ExtractionResult>(
            indices, cfg.parallelism, [&](std::size_t i) {
                int local_id = 0;
                return extract_learnings(extractions[i].page, extractions[i].query,
                                         extractions[i].images, cfg, gateway, local_id, round);
            });

        RoundState state;
        state.round = round;
        state.issued_queries = issued_queries;
        for (auto& result : extracted) {
            for (auto& learning : result.learnings) {
                learning.id = next_learning_id++;
                state.new_learnings.push_back(learning);
                output.pool.add_learning(std::move(learning));
            }
        }

        if (!output.pool.learnings.empty()) {
            output.outline = update_outline(topic, outline_opt, state.new_learnings,
                                            output.pool.learnings, round, gateway);
        }
        state.outline = output.outline;

        if (run_dir) {
            json round_json;
            round_json["round"] = round;
            round_json["queries"] = queries;
            json urls = json::array();
            for (const auto& task : tasks) urls.push_back(task.url);
            round_json["urls"] = urls;
            round_json["new_learnings"] = static_cast<int>(state.new_learnings.size());
            round_json["pool_learnings"] = static_cast<int>(output.pool.learnings.size());
            round_json["pool_images"] = static_cast<int>(output.pool.images.size());
            json follow_ups = json::array();
            for (const auto& result : extracted)
                for (const auto& question : result.follow_up_questions)
                    follow_ups.push_back(question);
            round_json["follow_up_questions"] = follow_ups;
            std::ofstream out(*run_dir / "rounds" / ("round_" + std::to_string(round) + ".json"));
            out << round_json.dump(2) << "\n";
        }
        output.rounds.push_back(std::move(state));
    }

    if (output.pool.learnings.empty())
        return Result<ResearchOutput>::fail("empty evidence pool after all rounds");

    if (run_dir) {
        std::ofstream learnings_out(*run_dir / "learnings.json");
        learnings_out << pool_to_json(output.pool).dump(2) << "\n";
        std::ofstream outline_out(*run_dir / "outline.md");
        outline_out << render_outline(output.outline, OutlineMode::internal);
    }
    return Result<ResearchOutput>::ok(std::move(output));
}

}  // namespace deepreport
