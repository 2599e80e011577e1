#include "deepreport/util.hpp"

#include <array>
#include <cstdio>

namespace deepreport {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    if (haystack.size() < needle.size()) return false;
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                          [](char a, char b) {
                              return std::tolower(static_cast<unsigned char>(a)) ==
                                     std::tolower(static_cast<unsigned char>(b));
                          });
    return it != haystack.end();
}

std::vector<std::string> split(std::string_view s, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == delim) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size()) {
            if (start < i) out.emplace_back(s.substr(start, i - start));
        } else if (s[i] == '\n') {
            std::size_t end = i;
            if (end > start && s[end - 1] == '\r') --end;
            out.emplace_back(s.substr(start, end - start));
            start = i + 1;
        }
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    if (from.empty()) return s;
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

std::string clip(std::string_view s, std::size_t n) {
    return std::string(s.substr(0, n));
}

std::optional<int> parse_int(std::string_view s) {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    long value = 0;
    for (char c : t) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        value = value * 10 + (c - '0');
        if (value > INT32_MAX) return std::nullopt;
    }
    return static_cast<int>(value);
}

std::optional<double> parse_double(std::string_view s) {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) return std::nullopt;
    return v;
}

std::string format_fixed(double value, int decimals) {
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.*f", decimals, value);
    return std::string(buf.data());
}

std::vector<TagBlock> extract_tag_blocks(std::string_view text, std::string_view tag) {
    std::vector<TagBlock> out;
    const std::string open = "<" + std::string(tag);
    const std::string close = "</" + std::string(tag) + ">";
    std::size_t pos = 0;
    while ((pos = text.find(open, pos)) != std::string_view::npos) {
        std::size_t attr_start = pos + open.size();
        if (attr_start < text.size() && text[attr_start] != '>' && text[attr_start] != ' ' &&
            text[attr_start] != '\n' && text[attr_start] != '\t') {
            // Different tag sharing the prefix (e.g. <learnings> vs <learning>).
            pos = attr_start;
            continue;
        }
        std::size_t gt = text.find('>', attr_start);
        if (gt == std::string_view::npos) break;
        std::size_t close_pos = text.find(close, gt + 1);
        if (close_pos == std::string_view::npos) {
            pos = gt + 1;
            continue;  // unterminated
        }
        TagBlock block;
        block.attrs = trim(text.substr(attr_start, gt - attr_start));
        block.inner = trim(text.substr(gt + 1, close_pos - gt - 1));
        block.begin = pos;
        block.end = close_pos + close.size();
        pos = block.end;
        out.push_back(std::move(block));
    }
    return out;
}

std::optional<std::string> first_tag_block(std::string_view text, std::string_view tag) {
    auto blocks = extract_tag_blocks(text, tag);
    if (blocks.empty()) return std::nullopt;
    return blocks.front().inner;
}

std::string tag_attr(std::string_view attrs, std::string_view name) {
    const std::string needle = std::string(name) + "=\"";
    auto pos = attrs.find(needle);
    if (pos == std::string_view::npos) return "";
    std::size_t start = pos + needle.size();
    auto end = attrs.find('"', start);
    if (end == std::string_view::npos) return "";
    return std::string(attrs.substr(start, end - start));
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf.data());
}

std::string base64_encode(const std::uint8_t* data, std::size_t size) {
    static constexpr char kAlphabet[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((size + 2) / 3 * 4);
    for (std::size_t i = 0; i < size; i += 3) {
        std::uint32_t chunk = static_cast<std::uint32_t>(data[i]) << 16;
        if (i + 1 < size) chunk |= static_cast<std::uint32_t>(data[i + 1]) << 8;
        if (i + 2 < size) chunk |= data[i + 2];
        out += kAlphabet[(chunk >> 18) & 0x3f];
        out += kAlphabet[(chunk >> 12) & 0x3f];
        out += i + 1 < size ? kAlphabet[(chunk >> 6) & 0x3f] : '=';
        out += i + 2 < size ? kAlphabet[chunk & 0x3f] : '=';
    }
    return out;
}

std::optional<UrlParts> parse_url(std::string_view url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos || scheme_end == 0) return std::nullopt;
    UrlParts parts;
    parts.scheme = to_lower(url.substr(0, scheme_end));
    std::string_view rest = url.substr(scheme_end + 3);

    auto frag = rest.find('#');
    if (frag != std::string_view::npos) {
        parts.fragment = std::string(rest.substr(frag + 1));
        rest = rest.substr(0, frag);
    }
    auto q = rest.find('?');
    if (q != std::string_view::npos) {
        parts.query = std::string(rest.substr(q + 1));
        rest = rest.substr(0, q);
    }
    auto slash = rest.find('/');
    if (slash == std::string_view::npos) {
        parts.host = to_lower(rest);
    } else {
        parts.host = to_lower(rest.substr(0, slash));
        parts.path = std::string(rest.substr(slash));
    }
    if (parts.host.empty()) return std::nullopt;
    return parts;
}

std::string resolve_url(const std::string& base, const std::string& ref) {
    if (ref.empty()) return base;
    if (ref.find("://") != std::string::npos || starts_with(ref, "data:")) return ref;
    auto parts = parse_url(base);
    if (!parts) return ref;
    if (starts_with(ref, "//")) return parts->scheme + ":" + ref;
    if (starts_with(ref, "/")) return parts->scheme + "://" + parts->host + ref;
    // Relative to base directory.
    std::string dir = parts->path;
    auto slash = dir.rfind('/');
    dir = (slash == std::string::npos) ? "/" : dir.substr(0, slash + 1);
    return parts->scheme + "://" + parts->host + dir + ref;
}

std::string url_filename(std::string_view url) {
    auto parts = parse_url(url);
    std::string path = parts ? parts->path : std::string(url);
    auto q = path.find('?');
    if (q != std::string::npos) path = path.substr(0, q);
    auto slash = path.rfind('/');
    if (slash != std::string::npos) path = path.substr(slash + 1);
    return to_lower(path);
}

}  // namespace deepreport
