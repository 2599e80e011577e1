#include "deepreport/http_gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "deepreport/html_markdown.hpp"
#include "deepreport/log.hpp"

namespace deepreport {

using nlohmann::json;

namespace {

std::string env_or_empty(const std::string& name) {
    if (name.empty()) return "";
    const char* value = std::getenv(name.c_str());
    return value ? value : "";
}

// One window per image: up to `window` characters on each side of the tag
// position, newlines flattened.
std::string surrounding_window(const std::string& markdown, std::size_t offset, int window) {
    const std::size_t w = static_cast<std::size_t>(std::max(window, 0));
    const std::size_t begin = offset > w ? offset - w : 0;
    const std::size_t end = std::min(markdown.size(), offset + w);
    std::string out = markdown.substr(begin, offset - begin) + markdown.substr(offset, end - offset);
    for (char& c : out)
        if (c == '\n' || c == '\r' || c == '\t') c = ' ';
    return trim(out);
}

bool looks_like_html(const std::string& content_type, const std::string& body) {
    if (contains_ci(content_type, "text/html") || contains_ci(content_type, "application/xhtml")) return true;
    if (!content_type.empty()) return false;
    return contains_ci(body.substr(0, 512), "<html") || contains_ci(body.substr(0, 512), "<!doctype html");
}

}  // namespace

ScrapedPage finalize_scraped_page(std::string url, std::string markdown,
                                  std::vector<RawImageMeta> images,
                                  int truncate_chars, int context_window) {
    ScrapedPage page;
    page.url = std::move(url);
    page.markdown = clip(markdown, static_cast<std::size_t>(truncate_chars));
    for (auto& image : images) {
        if (image.markdown_offset > markdown.size()) image.markdown_offset = markdown.size();
        if (image.surrounding_text.empty())
            image.surrounding_text = surrounding_window(markdown, image.markdown_offset, context_window);
        else
            image.surrounding_text = clip(image.surrounding_text, 2 * static_cast<std::size_t>(context_window));
        page.images.push_back(std::move(image));
    }
    return page;
}

struct HttpGateway::Impl {
    explicit Impl(HttpGatewayConfig cfg)
        : config(std::move(cfg)), semaphore(std::max(1, config.max_concurrent)) {}

    HttpGatewayConfig config;
    std::counting_semaphore<1024> semaphore;

    struct Slot {
        std::counting_semaphore<1024>& s;
        explicit Slot(std::counting_semaphore<1024>& sem) : s(sem) { s.acquire(); }
        ~Slot() { s.release(); }
    };

    httplib::Client make_client(const std::string& base_url, int timeout_seconds) {
        httplib::Client client(base_url);
        client.set_connection_timeout(timeout_seconds, 0);
        client.set_read_timeout(timeout_seconds, 0);
        client.set_write_timeout(timeout_seconds, 0);
        client.set_follow_location(true);
        return client;
    }

    // POST with retry on transient failures. 401/403 throw (fatal), other
    // errors surface as Result failures after the attempts run out.
    Result<std::string> post_with_retries(const std::string& base_url, const std::string& path,
                                          const httplib::Headers& headers, const std::string& body,
                                          int timeout_seconds) {
        std::string last_error = "no attempts made";
        int backoff_ms = config.backoff_initial_ms;
        for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
            auto client = make_client(base_url, timeout_seconds);
            auto response = client.Post(path, headers, body, "application/json");
            if (response) {
                if (response->status == 401 || response->status == 403)
                    throw std::runtime_error("authentication failed (HTTP " +
                                             std::to_string(response->status) + ") for " + base_url);
                if (response->status >= 200 && response->status < 300)
                    return Result<std::string>::ok(response->body);
                last_error = "HTTP " + std::to_string(response->status);
                if (response->status != 429 && response->status < 500)
                    return Result<std::string>::fail(last_error + " from " + base_url + path);
            } else {
                last_error = "transport error: " + httplib::to_string(response.error());
            }
            if (attempt < config.max_attempts) {
                logging::warn("attempt " + std::to_string(attempt) + " failed (" + last_error +
                              "), retrying in " + std::to_string(backoff_ms) + " ms");
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
                backoff_ms *= 2;
            }
        }
        return Result<std::string>::fail(last_error + " after " + std::to_string(config.max_attempts) +
                                         " attempts to " + base_url + path);
    }
};

HttpGateway::HttpGateway(HttpGatewayConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpGateway::~HttpGateway() = default;

Result<std::string> HttpGateway::chat(const ChatRequest& request) {
    Impl::Slot slot(impl_->semaphore);
    const ModelEndpoint& endpoint =
        request.role == ModelRole::visual ? impl_->config.visual : impl_->config.generation;
    if (endpoint.base_url.empty())
        throw std::runtime_error("no endpoint configured for requested model role");

    json body;
    body["model"] = endpoint.model;
    body["temperature"] = request.temperature;
    json messages = json::array();
    if (!request.system.empty())
        messages.push_back({{"role", "system"}, {"content", request.system}});
    if (request.images.empty()) {
        messages.push_back({{"role", "user"}, {"content", request.user}});
    } else {
        json parts = json::array();
        parts.push_back({{"type", "text"}, {"text", request.user}});
        for (const auto& image : request.images) {
            std::string ref = image.url.empty()
                                  ? "data:" + image.mime + ";base64," + image.bytes_b64
                                  : image.url;
            parts.push_back({{"type", "image_url"}, {"image_url", {{"url", ref}}}});
        }
        messages.push_back({{"role", "user"}, {"content", parts}});
    }
    body["messages"] = messages;

    httplib::Headers headers;
    std::string key = env_or_empty(endpoint.api_key_env);
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

    auto response = impl_->post_with_retries(endpoint.base_url, endpoint.path, headers,
                                             body.dump(), request.timeout_seconds);
    if (!response) return Result<std::string>::fail(response.error());
    try {
        json j = json::parse(response.value());
        return Result<std::string>::ok(j.at("choices").at(0).at("message").at("content").get<std::string>());
    } catch (const std::exception& e) {
        return Result<std::string>::fail(std::string("malformed provider response: ") + e.what());
    }
}

std::vector<SearchResult> HttpGateway::search(const std::string& query, int top_k) {
    Impl::Slot slot(impl_->semaphore);
    const SerpEndpoint& endpoint = impl_->config.serp;
    if (endpoint.base_url.empty()) {
        logging::warn("search provider not configured; returning no results");
        return {};
    }
    json body;
    body["q"] = query;
    body["num"] = top_k;
    httplib::Headers headers;
    std::string key = env_or_empty(endpoint.api_key_env);
    if (!key.empty()) headers.emplace("X-API-KEY", key);
    auto response =
        impl_->post_with_retries(endpoint.base_url, endpoint.path, headers, body.dump(), 30);
    if (!response) {
        logging::warn("search failed for '" + query + "': " + response.error());
        return {};
    }
    std::vector<SearchResult> results;
    try {
        json j = json::parse(response.value());
        const json& items = j.contains("results") ? j["results"]
                           : j.contains("organic") ? j["organic"]
                                                   : json::array();
        for (const auto& item : items) {
            SearchResult r;
            r.url = item.value("url", item.value("link", ""));
            r.title = item.value("title", "");
            r.snippet = item.value("snippet", "");
            if (!r.url.empty()) results.push_back(std::move(r));
            if (static_cast<int>(results.size()) >= top_k) break;
        }
    } catch (const std::exception& e) {
        logging::warn("search response unparseable for '" + query + "': " + e.what());
        return {};
    }
    return results;
}

Result<ScrapedPage> HttpGateway::fetch_page(const std::string& url) {
    Impl::Slot slot(impl_->semaphore);
    auto parts = parse_url(url);
    if (!parts || (parts->scheme != "http" && parts->scheme != "https"))
        return Result<ScrapedPage>::fail("not an absolute http(s) URL: " + url);

    auto client = impl_->make_client(parts->scheme + "://" + parts->host,
                                     impl_->config.page_timeout_seconds);
    std::string target = parts->path.empty() ? "/" : parts->path;
    if (!parts->query.empty()) target += "?" + parts->query;
    auto response = client.Get(target);
    if (!response)
        return Result<ScrapedPage>::fail("fetch failed: " + httplib::to_string(response.error()));
    if (response->status < 200 || response->status >= 300)
        return Result<ScrapedPage>::fail("HTTP " + std::to_string(response->status) + " for " + url);
    std::string content_type = response->get_header_value("Content-Type");
    if (!looks_like_html(content_type, response->body))
        return Result<ScrapedPage>::fail("non-HTML content (" + content_type + ") at " + url);

    auto conversion = html_to_markdown(response->body, url);
    std::vector<RawImageMeta> images;
    images.reserve(conversion.images.size());
    for (const auto& html_image : conversion.images) {
        RawImageMeta meta;
        meta.url = html_image.src;
        meta.alt = html_image.alt;
        meta.markdown_offset = html_image.markdown_offset;
        if (impl_->config.probe_image_metadata && !starts_with(meta.url, "data:")) {
            if (auto image_parts = parse_url(meta.url)) {
                auto head_client = impl_->make_client(image_parts->scheme + "://" + image_parts->host, 10);
                std::string head_target = image_parts->path.empty() ? "/" : image_parts->path;
                if (!image_parts->query.empty()) head_target += "?" + image_parts->query;
                if (auto head = head_client.Head(head_target); head && head->status < 300) {
                    std::string type = head->get_header_value("Content-Type");
                    if (!type.empty()) meta.content_type = type;
                    std::string length = head->get_header_value("Content-Length");
                    if (auto bytes = parse_int(length)) meta.file_size_bytes = *bytes;
                }
            }
        }
        images.push_back(std::move(meta));
    }
    return Result<ScrapedPage>::ok(finalize_scraped_page(url, std::move(conversion.markdown),
                                                         std::move(images),
                                                         impl_->config.page_truncate_chars,
                                                         impl_->config.context_window));
}

}  // namespace deepreport
