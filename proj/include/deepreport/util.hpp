#pragma once
// Small shared helpers: string handling, hashing, Result<T>, URL splitting,
// and an order-preserving parallel map.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deepreport {

// ---------------------------------------------------------------------------
// Result<T>: value-or-error for recoverable failures (network, parsing).
// Fatal misconfiguration throws instead.
// ---------------------------------------------------------------------------
template <typename T>
class Result {
public:
    static Result ok(T value) {
        Result r;
        r.value_ = std::move(value);
        return r;
    }
    static Result fail(std::string message) {
        Result r;
        r.error_ = std::move(message);
        return r;
    }

    bool ok_value() const { return value_.has_value(); }
    explicit operator bool() const { return value_.has_value(); }

    const T& value() const { return *value_; }
    T& value() { return *value_; }
    T take() { return std::move(*value_); }
    const std::string& error() const { return error_; }

private:
    std::optional<T> value_;
    std::string error_;
};

// ---------------------------------------------------------------------------
// Strings
// ---------------------------------------------------------------------------
std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);
bool contains_ci(std::string_view haystack, std::string_view needle);
std::vector<std::string> split(std::string_view s, char delim);
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string replace_all(std::string s, std::string_view from, std::string_view to);

// Clip a UTF-8-agnostic byte string to at most n bytes.
std::string clip(std::string_view s, std::size_t n);

// Parse a non-negative integer; nullopt on any non-digit content.
std::optional<int> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);

// Format a double with fixed decimals (locale-independent).
std::string format_fixed(double value, int decimals);

// ---------------------------------------------------------------------------
// Lightweight tag-block extraction for model output ("<tag attr=..>inner</tag>").
// Unterminated blocks are not returned.
// ---------------------------------------------------------------------------
struct TagBlock {
    std::string attrs;  // raw text between the tag name and '>'
    std::string inner;
    std::size_t begin = 0;  // offset of '<'
    std::size_t end = 0;    // offset one past the closing tag
};

std::vector<TagBlock> extract_tag_blocks(std::string_view text, std::string_view tag);
std::optional<std::string> first_tag_block(std::string_view text, std::string_view tag);
// Value of `name="..."` inside an attribute string; empty when absent.
std::string tag_attr(std::string_view attrs, std::string_view name);

// ---------------------------------------------------------------------------
// Hashing (FNV-1a 64): stable across platforms, used for request keys.
// ---------------------------------------------------------------------------
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

std::string base64_encode(const std::uint8_t* data, std::size_t size);
inline std::string base64_encode(const std::vector<std::uint8_t>& data) {
    return base64_encode(data.data(), data.size());
}

// ---------------------------------------------------------------------------
// URLs
// ---------------------------------------------------------------------------
struct UrlParts {
    std::string scheme;  // "https"
    std::string host;    // "example.com:8080"
    std::string path;    // "/a/b" (leading slash, may be empty)
    std::string query;   // without '?'
    std::string fragment;
};

std::optional<UrlParts> parse_url(std::string_view url);

// Resolve a possibly-relative reference against a base URL. Returns the
// reference unchanged when it already carries a scheme.
std::string resolve_url(const std::string& base, const std::string& ref);

// Last path segment, lowercased ("/img/Logo.PNG" -> "logo.png").
std::string url_filename(std::string_view url);

// ---------------------------------------------------------------------------
// Order-preserving parallel map. Results land at the index of their input;
// worker count is capped, 1 means sequential.
// ---------------------------------------------------------------------------
template <typename In, typename Out, typename Fn>
std::vector<Out> parallel_map(const std::vector<In>& inputs, int max_workers, Fn fn) {
    std::vector<Out> out(inputs.size());
    if (inputs.empty()) return out;
    if (max_workers <= 1 || inputs.size() == 1) {
        for (std::size_t i = 0; i < inputs.size(); ++i) out[i] = fn(inputs[i]);
        return out;
    }
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(max_workers), inputs.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= inputs.size()) return;
                out[i] = fn(inputs[i]);
            }
        }));
    }
    for (auto& f : futures) f.get();
    return out;
}

}  // namespace deepreport
