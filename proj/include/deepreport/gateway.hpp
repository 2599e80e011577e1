#pragma once
// Uniform contracts for the four external capabilities: chat completion,
// vision analysis (chat with image payloads), web search, and page scraping.
// A transcript-backed gateway provides deterministic record/replay for tests
// and doubles as the call cache.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "deepreport/util.hpp"

namespace deepreport {

enum class ModelRole { generation, visual };

struct ImagePayload {
    std::string url;        // remote reference, or empty when bytes are inline
    std::string bytes_b64;  // base64 content for local files/screenshots
    std::string mime = "image/png";
    std::string name;
};

struct ChatRequest {
    std::string system;
    std::string user;
    double temperature = 0.7;
    int timeout_seconds = 300;
    std::vector<ImagePayload> images;
    ModelRole role = ModelRole::generation;
};

struct SearchResult {
    std::string url;  // nonempty
    std::string title;
    std::string snippet;

    bool operator==(const SearchResult&) const = default;
};

// Raw per-<img> metadata captured while scraping, before any filtering.
struct RawImageMeta {
    std::string url;
    std::string alt;
    std::optional<std::string> content_type;
    std::optional<std::int64_t> file_size_bytes;
    std::string surrounding_text;             // window around the tag
    std::size_t markdown_offset = 0;          // position in the page markdown

    bool operator==(const RawImageMeta&) const = default;
};

struct ScrapedPage {
    std::string url;
    std::string markdown;  // truncated to the configured page limit
    std::vector<RawImageMeta> images;

    bool operator==(const ScrapedPage&) const = default;
};

void to_json(nlohmann::json& j, const SearchResult& r);
void from_json(const nlohmann::json& j, SearchResult& r);
void to_json(nlohmann::json& j, const RawImageMeta& m);
void from_json(const nlohmann::json& j, RawImageMeta& m);
void to_json(nlohmann::json& j, const ScrapedPage& p);
void from_json(const nlohmann::json& j, ScrapedPage& p);

// Stable key for a chat request: covers system, user, temperature, role and
// image payloads; excludes the timeout (it does not change the answer).
std::string chat_request_hash(const ChatRequest& request);
std::string search_request_hash(const std::string& query, int top_k);

class Gateway {
public:
    virtual ~Gateway() = default;

    // Model text, or a recoverable error (timeout after retries, malformed
    // provider response). Fatal auth failures throw.
    virtual Result<std::string> chat(const ChatRequest& request) = 0;

    // At most top_k results, provider order preserved. Provider errors
    // degrade to an empty list with a warning; no exception escapes.
    virtual std::vector<SearchResult> search(const std::string& query, int top_k) = 0;

    virtual Result<ScrapedPage> fetch_page(const std::string& url) = 0;
};

// Transcript-backed gateway. With an inner gateway it records every
// response (write-through cache); without one it strictly replays and a
// miss is an error. The on-disk format is a JSON object with hash-keyed
// maps for chat/search plus URL-keyed pages.
class TranscriptGateway : public Gateway {
public:
    // `inner` may be null (pure replay). The transcript file is loaded when
    // it exists; save() persists merged contents with sorted keys.
    TranscriptGateway(std::shared_ptr<Gateway> inner, std::filesystem::path transcript_path);
    ~TranscriptGateway() override;

    Result<std::string> chat(const ChatRequest& request) override;
    std::vector<SearchResult> search(const std::string& query, int top_k) override;
    Result<ScrapedPage> fetch_page(const std::string& url) override;

    void save() const;
    int miss_count() const;

    static void merge_files(const std::vector<std::filesystem::path>& inputs,
                            const std::filesystem::path& output);

private:
    std::shared_ptr<Gateway> inner_;
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::map<std::string, std::string> chat_;
    std::map<std::string, std::vector<SearchResult>> search_;
    std::map<std::string, ScrapedPage> pages_;
    int misses_ = 0;
    bool dirty_ = false;
};

}  // namespace deepreport
