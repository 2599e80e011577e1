#include "deepreport/gateway.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "deepreport/log.hpp"

namespace deepreport {

using nlohmann::json;

void to_json(json& j, const SearchResult& r) {
    j = json{{"url", r.url}, {"title", r.title}, {"snippet", r.snippet}};
}

void from_json(const json& j, SearchResult& r) {
    r.url = j.value("url", "");
    r.title = j.value("title", "");
    r.snippet = j.value("snippet", "");
}

void to_json(json& j, const RawImageMeta& m) {
    j = json{{"url", m.url},
             {"alt", m.alt},
             {"surrounding_text", m.surrounding_text},
             {"markdown_offset", m.markdown_offset}};
    if (m.content_type) j["content_type"] = *m.content_type;
    if (m.file_size_bytes) j["file_size_bytes"] = *m.file_size_bytes;
}

void from_json(const json& j, RawImageMeta& m) {
    m.url = j.value("url", "");
    m.alt = j.value("alt", "");
    m.surrounding_text = j.value("surrounding_text", "");
    m.markdown_offset = j.value("markdown_offset", std::size_t{0});
    if (j.contains("content_type")) m.content_type = j.at("content_type").get<std::string>();
    if (j.contains("file_size_bytes")) m.file_size_bytes = j.at("file_size_bytes").get<std::int64_t>();
}

void to_json(json& j, const ScrapedPage& p) {
    j = json{{"url", p.url}, {"markdown", p.markdown}, {"images", p.images}};
}

void from_json(const json& j, ScrapedPage& p) {
    p.url = j.value("url", "");
    p.markdown = j.value("markdown", "");
    p.images = j.value("images", std::vector<RawImageMeta>{});
}

std::string chat_request_hash(const ChatRequest& request) {
    std::uint64_t h = fnv1a64(request.system);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(request.user, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(format_fixed(request.temperature, 3), h);
    h = fnv1a64(request.role == ModelRole::visual ? "visual" : "generation", h);
    for (const auto& image : request.images) {
        h = fnv1a64("\x1e", h);
        h = fnv1a64(image.url, h);
        h = fnv1a64(image.bytes_b64, h);
    }
    return hex64(h);
}

std::string search_request_hash(const std::string& query, int top_k) {
    std::uint64_t h = fnv1a64(query);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(std::to_string(top_k), h);
    return hex64(h);
}

TranscriptGateway::TranscriptGateway(std::shared_ptr<Gateway> inner, std::filesystem::path transcript_path)
    : inner_(std::move(inner)), path_(std::move(transcript_path)) {
    std::ifstream in(path_);
    if (!in.good()) return;
    try {
        json j = json::parse(in);
        for (const auto& [key, value] : j.value("chat", json::object()).items())
            chat_[key] = value.get<std::string>();
        for (const auto& [key, value] : j.value("search", json::object()).items())
            search_[key] = value.get<std::vector<SearchResult>>();
        for (const auto& [key, value] : j.value("pages", json::object()).items())
            pages_[key] = value.get<ScrapedPage>();
    } catch (const std::exception& e) {
        throw std::runtime_error("unreadable transcript " + path_.string() + ": " + e.what());
    }
}

TranscriptGateway::~TranscriptGateway() {
    if (dirty_) save();
}

Result<std::string> TranscriptGateway::chat(const ChatRequest& request) {
    const std::string key = chat_request_hash(request);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = chat_.find(key);
        if (it != chat_.end()) return Result<std::string>::ok(it->second);
        ++misses_;
    }
    if (!inner_) return Result<std::string>::fail("transcript miss for chat request " + key);
    auto result = inner_->chat(request);
    if (result) {
        std::lock_guard<std::mutex> lock(mutex_);
        chat_[key] = result.value();
        dirty_ = true;
    }
    return result;
}

std::vector<SearchResult> TranscriptGateway::search(const std::string& query, int top_k) {
    const std::string key = search_request_hash(query, top_k);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = search_.find(key);
        if (it != search_.end()) return it->second;
        ++misses_;
    }
    if (!inner_) {
        logging::warn("transcript miss for search '" + query + "'");
        return {};
    }
    auto results = inner_->search(query, top_k);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        search_[key] = results;
        dirty_ = true;
    }
    return results;
}

Result<ScrapedPage> TranscriptGateway::fetch_page(const std::string& url) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = pages_.find(url);
        if (it != pages_.end()) return Result<ScrapedPage>::ok(it->second);
        ++misses_;
    }
    if (!inner_) return Result<ScrapedPage>::fail("transcript miss for page " + url);
    auto page = inner_->fetch_page(url);
    if (page) {
        std::lock_guard<std::mutex> lock(mutex_);
        pages_[url] = page.value();
        dirty_ = true;
    }
    return page;
}

void TranscriptGateway::save() const {
    std::lock_guard<std::mutex> lock(mutex_);
    json j;
    j["schema"] = 1;
    j["chat"] = chat_;
    j["search"] = search_;
    j["pages"] = pages_;
    if (!path_.parent_path().empty()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_);
    out << j.dump(2) << "\n";
}

int TranscriptGateway::miss_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return misses_;
}

void TranscriptGateway::merge_files(const std::vector<std::filesystem::path>& inputs,
                                    const std::filesystem::path& output) {
    json merged;
    merged["schema"] = 1;
    merged["chat"] = json::object();
    merged["search"] = json::object();
    merged["pages"] = json::object();
    for (const auto& input : inputs) {
        std::ifstream in(input);
        if (!in.good()) continue;
        json j = json::parse(in);
        for (const auto& section : {"chat", "search", "pages"})
            for (const auto& [key, value] : j.value(section, json::object()).items())
                merged[section][key] = value;
    }
    if (!output.parent_path().empty()) std::filesystem::create_directories(output.parent_path());
    std::ofstream out(output);
    out << merged.dump(2) << "\n";
}

}  // namespace deepreport
