#pragma once
// Live gateway: OpenAI-compatible chat endpoints (one per model role), a
// configurable SERP endpoint, and a static page fetcher with HTML-to-Markdown
// conversion. Transient provider failures retry with exponential backoff; a
// global semaphore bounds concurrent requests.

#include <memory>
#include <string>

#include "deepreport/gateway.hpp"

namespace deepreport {

struct ModelEndpoint {
    std::string base_url;                      // "https://api.example.com"
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env;                   // env var holding the key
};

struct SerpEndpoint {
    std::string base_url;
    std::string path = "/search";
    std::string api_key_env;
};

struct HttpGatewayConfig {
    ModelEndpoint generation;
    ModelEndpoint visual;
    SerpEndpoint serp;
    int max_attempts = 3;          // 1 initial + retries
    int backoff_initial_ms = 1000; // doubled per retry
    int max_concurrent = 8;
    int page_truncate_chars = 8000;
    int context_window = 140;      // chars each side of an <img>
    bool probe_image_metadata = true;  // HEAD request per image
    int page_timeout_seconds = 30;
};

class HttpGateway : public Gateway {
public:
    explicit HttpGateway(HttpGatewayConfig config);
    ~HttpGateway() override;

    Result<std::string> chat(const ChatRequest& request) override;
    std::vector<SearchResult> search(const std::string& query, int top_k) override;
    Result<ScrapedPage> fetch_page(const std::string& url) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Shared with tests and the scripted gateway: clamp a page's markdown and
// derive per-image surrounding-text windows.
ScrapedPage finalize_scraped_page(std::string url, std::string markdown,
                                  std::vector<RawImageMeta> images,
                                  int truncate_chars, int context_window);

}  // namespace deepreport
