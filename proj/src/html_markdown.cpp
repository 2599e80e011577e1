#include "deepreport/html_markdown.hpp"

#include <cctype>
#include <map>

#include "deepreport/util.hpp"

namespace deepreport {

namespace {

struct Tag {
    std::string name;        // lowercase
    bool closing = false;
    bool self_closing = false;
    std::map<std::string, std::string> attrs;
};

std::string decode_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '&') {
            out += text[i];
            continue;
        }
        std::size_t semi = text.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += text[i];
            continue;
        }
        std::string_view entity = text.substr(i + 1, semi - i - 1);
        if (entity == "amp") out += '&';
        else if (entity == "lt") out += '<';
        else if (entity == "gt") out += '>';
        else if (entity == "quot") out += '"';
        else if (entity == "apos" || entity == "#39") out += '\'';
        else if (entity == "nbsp") out += ' ';
        else if (entity.size() > 1 && entity[0] == '#') {
            auto code = parse_int(entity.substr(1));
            if (code && *code >= 32 && *code < 127) out += static_cast<char>(*code);
            else out += ' ';
        } else {
            out += text[i];
            continue;
        }
        i = semi;
    }
    return out;
}

// Parses the tag starting at html[pos] (pointing at '<'); advances pos past it.
Tag parse_tag(const std::string& html, std::size_t& pos) {
    Tag tag;
    std::size_t end = html.find('>', pos);
    if (end == std::string::npos) {
        pos = html.size();
        return tag;
    }
    std::string inner = html.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    std::string_view view = inner;
    if (!view.empty() && view.front() == '/') {
        tag.closing = true;
        view.remove_prefix(1);
    }
    if (!view.empty() && view.back() == '/') {
        tag.self_closing = true;
        view.remove_suffix(1);
    }
    std::size_t i = 0;
    while (i < view.size() && !std::isspace(static_cast<unsigned char>(view[i]))) ++i;
    tag.name = to_lower(view.substr(0, i));
    // Attributes: name="value" | name='value' | name=value | bare name.
    while (i < view.size()) {
        while (i < view.size() && std::isspace(static_cast<unsigned char>(view[i]))) ++i;
        std::size_t name_start = i;
        while (i < view.size() && view[i] != '=' && !std::isspace(static_cast<unsigned char>(view[i]))) ++i;
        if (i == name_start) break;
        std::string name = to_lower(view.substr(name_start, i - name_start));
        std::string value;
        if (i < view.size() && view[i] == '=') {
            ++i;
            if (i < view.size() && (view[i] == '"' || view[i] == '\'')) {
                char quote = view[i++];
                std::size_t value_start = i;
                while (i < view.size() && view[i] != quote) ++i;
                value = std::string(view.substr(value_start, i - value_start));
                if (i < view.size()) ++i;
            } else {
                std::size_t value_start = i;
                while (i < view.size() && !std::isspace(static_cast<unsigned char>(view[i]))) ++i;
                value = std::string(view.substr(value_start, i - value_start));
            }
        }
        if (!name.empty()) tag.attrs[name] = decode_entities(value);
    }
    return tag;
}

bool is_block_tag(const std::string& name) {
    static const char* kBlocks[] = {"p",  "div",     "section", "article", "header", "footer",
                                    "ul", "ol",      "table",   "blockquote", "figure", "main",
                                    "tr", "figcaption", "aside", "nav"};
    for (const char* b : kBlocks)
        if (name == b) return true;
    return false;
}

class Converter {
public:
    explicit Converter(std::string base_url) : base_url_(std::move(base_url)) {}

    HtmlConversion run(const std::string& html) {
        std::size_t pos = 0;
        while (pos < html.size()) {
            if (html[pos] == '<') {
                if (starts_with(std::string_view(html).substr(pos), "<!--")) {
                    auto end = html.find("-->", pos);
                    pos = end == std::string::npos ? html.size() : end + 3;
                    continue;
                }
                handle_tag(html, pos);
            } else {
                std::size_t next = html.find('<', pos);
                if (next == std::string::npos) next = html.size();
                if (skip_depth_ == 0) emit_text(decode_entities(std::string_view(html).substr(pos, next - pos)));
                pos = next;
            }
        }
        flush_pending_newlines();
        HtmlConversion out;
        out.markdown = std::move(markdown_);
        out.images = std::move(images_);
        return out;
    }

private:
    void handle_tag(const std::string& html, std::size_t& pos) {
        Tag tag = parse_tag(html, pos);
        if (tag.name.empty()) return;

        static const char* kSkip[] = {"script", "style", "noscript", "template", "head", "svg", "iframe"};
        for (const char* name : kSkip) {
            if (tag.name == name) {
                if (tag.self_closing) return;
                if (tag.closing) {
                    if (skip_depth_ > 0) --skip_depth_;
                } else {
                    ++skip_depth_;
                }
                return;
            }
        }
        if (skip_depth_ > 0) return;

        if (tag.name == "img") {
            flush_pending_newlines();
            HtmlImage image;
            image.src = resolve_url(base_url_, attr(tag, "src"));
            image.alt = trim(attr(tag, "alt"));
            image.markdown_offset = markdown_.size();
            if (!image.src.empty()) images_.push_back(std::move(image));
            return;
        }
        if (tag.name == "br") {
            newline(1);
            return;
        }
        if (tag.name == "hr") {
            newline(2);
            emit_raw("---");
            newline(2);
            return;
        }
        if (tag.name.size() == 2 && tag.name[0] == 'h' && tag.name[1] >= '1' && tag.name[1] <= '6') {
            if (!tag.closing) {
                newline(2);
                emit_raw(std::string(static_cast<std::size_t>(tag.name[1] - '0'), '#') + " ");
            } else {
                newline(2);
            }
            return;
        }
        if (tag.name == "a") {
            if (!tag.closing) {
                link_targets_.push_back(resolve_url(base_url_, attr(tag, "href")));
                link_starts_.push_back(markdown_.size());
                flush_pending_newlines();
            } else if (!link_targets_.empty()) {
                std::string href = link_targets_.back();
                std::size_t start = link_starts_.back();
                link_targets_.pop_back();
                link_starts_.pop_back();
                if (!href.empty() && !starts_with(href, "javascript:") && markdown_.size() > start) {
                    std::string text = markdown_.substr(start);
                    markdown_.resize(start);
                    markdown_ += "[" + text + "](" + href + ")";
                }
            }
            return;
        }
        if (tag.name == "strong" || tag.name == "b") {
            emit_raw("**");
            return;
        }
        if (tag.name == "em" || tag.name == "i") {
            emit_raw("*");
            return;
        }
        if (tag.name == "code") {
            emit_raw("`");
            return;
        }
        if (tag.name == "pre") {
            newline(2);
            emit_raw("```");
            newline(1);
            return;
        }
        if (tag.name == "li") {
            if (!tag.closing) {
                newline(1);
                if (!list_stack_.empty() && list_stack_.back() > 0) {
                    emit_raw(std::to_string(list_stack_.back()++) + ". ");
                } else {
                    emit_raw("- ");
                }
            }
            return;
        }
        if (tag.name == "ul" || tag.name == "ol") {
            if (!tag.closing) {
                list_stack_.push_back(tag.name == "ol" ? 1 : 0);
            } else if (!list_stack_.empty()) {
                list_stack_.pop_back();
            }
            newline(tag.closing ? 2 : 1);
            return;
        }
        if (tag.name == "td" || tag.name == "th") {
            if (!tag.closing) {
                emit_raw(cell_open_ ? " | " : "| ");
                cell_open_ = true;
                if (tag.name == "th") header_row_ = true;
            }
            return;
        }
        if (tag.name == "tr") {
            if (tag.closing) {
                if (cell_open_) emit_raw(" |");
                cell_open_ = false;
                newline(1);
                if (header_row_) {
                    // Separator sized by the header cell count just emitted.
                    std::size_t line_start = markdown_.find_last_of('\n', markdown_.size() - 2);
                    std::string last_line = markdown_.substr(line_start == std::string::npos ? 0 : line_start + 1);
                    int cells = 0;
                    for (std::size_t i = 0; i + 1 < last_line.size(); ++i)
                        if (last_line[i] == '|') ++cells;
                    for (int i = 0; i < cells; ++i) emit_raw("|---");
                    if (cells > 0) emit_raw("|");
                    newline(1);
                    header_row_ = false;
                }
            }
            return;
        }
        if (is_block_tag(tag.name)) {
            newline(tag.name == "p" ? 2 : 1);
            return;
        }
        // Unknown tags are stripped, their text kept.
    }

    static std::string attr(const Tag& tag, const std::string& name) {
        auto it = tag.attrs.find(name);
        return it == tag.attrs.end() ? "" : it->second;
    }

    void emit_text(const std::string& text) {
        std::string collapsed;
        collapsed.reserve(text.size());
        for (char c : text) {
            if (c == '\n' || c == '\r' || c == '\t') c = ' ';
            if (c == ' ' && (collapsed.empty() ? last_was_space() : collapsed.back() == ' ')) continue;
            collapsed += c;
        }
        if (collapsed.empty() || collapsed == " ") return;
        flush_pending_newlines();
        if (markdown_.empty() || markdown_.back() == '\n') {
            // No leading space at line start.
            std::size_t b = 0;
            while (b < collapsed.size() && collapsed[b] == ' ') ++b;
            markdown_ += collapsed.substr(b);
        } else {
            markdown_ += collapsed;
        }
    }

    void emit_raw(const std::string& text) {
        flush_pending_newlines();
        markdown_ += text;
    }

    bool last_was_space() const {
        return markdown_.empty() || markdown_.back() == ' ' || markdown_.back() == '\n' ||
               pending_newlines_ > 0;
    }

    void newline(int count) { pending_newlines_ = std::max(pending_newlines_, count); }

    void flush_pending_newlines() {
        if (pending_newlines_ == 0) return;
        while (!markdown_.empty() && markdown_.back() == ' ') markdown_.pop_back();
        int have = 0;
        for (auto it = markdown_.rbegin(); it != markdown_.rend() && *it == '\n'; ++it) ++have;
        if (!markdown_.empty()) {
            for (int i = have; i < pending_newlines_; ++i) markdown_ += '\n';
        }
        pending_newlines_ = 0;
    }

    std::string base_url_;
    std::string markdown_;
    std::vector<HtmlImage> images_;
    std::vector<std::string> link_targets_;
    std::vector<std::size_t> link_starts_;
    std::vector<int> list_stack_;
    int skip_depth_ = 0;
    int pending_newlines_ = 0;
    bool cell_open_ = false;
    bool header_row_ = false;
};

}  // namespace

HtmlConversion html_to_markdown(const std::string& html, const std::string& base_url) {
    return Converter(base_url).run(html);
}

}  // namespace deepreport
