#include "deepreport/outline.hpp"

#include <algorithm>
#include <set>

#include "deepreport/log.hpp"
#include "deepreport/util.hpp"

namespace deepreport {

namespace {

constexpr std::string_view kCitationOpen = "<citation>";
constexpr std::string_view kCitationClose = "</citation>";
constexpr std::string_view kGapPrefix = "Gap:";

// "1.2.3" -> {1,2,3}; nullopt when any component is not a positive integer.
std::optional<std::vector<int>> parse_number_components(std::string_view number) {
    std::vector<int> out;
    for (const auto& part : split(number, '.')) {
        auto v = parse_int(part);
        if (!v || *v <= 0) return std::nullopt;
        out.push_back(*v);
    }
    if (out.empty()) return std::nullopt;
    return out;
}

// Extracts citation IDs from a line and returns the line with tags removed.
std::pair<std::string, std::vector<int>> strip_citations(const std::string& line) {
    std::string text;
    std::vector<int> ids;
    std::size_t pos = 0;
    while (pos < line.size()) {
        auto open = line.find(kCitationOpen, pos);
        if (open == std::string::npos) {
            text += line.substr(pos);
            break;
        }
        auto close = line.find(kCitationClose, open);
        if (close == std::string::npos) {
            // Unterminated tag: drop it and everything after, keep prior text.
            text += line.substr(pos, open - pos);
            logging::warn("unterminated <citation> tag dropped: " + line);
            break;
        }
        text += line.substr(pos, open - pos);
        std::string body = line.substr(open + kCitationOpen.size(), close - open - kCitationOpen.size());
        for (const auto& raw_token : split(body, ',')) {
            std::string token = trim(raw_token);
            if (token.empty()) continue;
            if (starts_with(token, "id")) token = trim(token.substr(2));
            auto id = parse_int(token);
            if (id) {
                ids.push_back(*id);
            } else {
                logging::warn("non-numeric citation token ignored: '" + trim(raw_token) + "'");
            }
        }
        pos = close + kCitationClose.size();
    }
    return {trim(text), ids};
}

// "a." / "aa."-style bullet label before the first space.
bool is_bullet_line(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && i < 2 && std::islower(static_cast<unsigned char>(line[i]))) ++i;
    return i > 0 && i < line.size() && line[i] == '.' &&
           (i + 1 == line.size() || line[i + 1] == ' ');
}

std::string bullet_label(std::size_t index) {
    // a..z, then aa, ab, ... (bijective base 26)
    std::string label;
    std::size_t n = index + 1;
    while (n > 0) {
        n -= 1;
        label.insert(label.begin(), static_cast<char>('a' + (n % 26)));
        n /= 26;
    }
    return label;
}

void render_node(const OutlineNode& node, OutlineMode mode, int depth, std::string& out) {
    out.append(static_cast<std::size_t>(depth), '#');
    out += ' ';
    out += node.number;
    if (depth == 1) out += '.';
    out += ' ';
    out += node.title;
    out += '\n';
    std::size_t label_index = 0;
    for (const auto& bullet : node.bullets) {
        if (bullet.is_gap) {
            if (mode == OutlineMode::internal) {
                out += "Gap: ";
                out += bullet.text;
                out += '\n';
            }
            continue;
        }
        out += bullet_label(label_index++);
        out += ". ";
        out += bullet.text;
        if (mode == OutlineMode::internal && !bullet.citations.empty()) {
            out += " <citation>";
            for (std::size_t i = 0; i < bullet.citations.size(); ++i) {
                if (i) out += ", ";
                out += "id " + std::to_string(bullet.citations[i]);
            }
            out += "</citation>";
        }
        out += '\n';
    }
    for (const auto& child : node.children) render_node(child, mode, depth + 1, out);
}

void collect_ids(const OutlineNode& node, std::vector<int>& out, std::set<int>& seen) {
    for (const auto& bullet : node.bullets)
        for (int id : bullet.citations)
            if (seen.insert(id).second) out.push_back(id);
    for (const auto& child : node.children) collect_ids(child, out, seen);
}

int prune_node(OutlineNode& node, const std::set<int>& known) {
    int removed = 0;
    for (auto& bullet : node.bullets) {
        auto it = std::remove_if(bullet.citations.begin(), bullet.citations.end(), [&](int id) {
            if (known.count(id)) return false;
            logging::warn("citation to unknown learning id " + std::to_string(id) + " removed");
            return true;
        });
        removed += static_cast<int>(bullet.citations.end() - it);
        bullet.citations.erase(it, bullet.citations.end());
    }
    for (auto& child : node.children) removed += prune_node(child, known);
    return removed;
}

}  // namespace

OutlineParseError::OutlineParseError(int line_number_in, std::string line_in, const std::string& reason)
    : std::runtime_error("outline parse error at line " + std::to_string(line_number_in) + ": " +
                         reason + " -- '" + line_in + "'"),
      line_number(line_number_in),
      line(std::move(line_in)) {}

AdaptiveOutline parse_outline(const std::string& markdown) {
    AdaptiveOutline outline;
    // Stack of open nodes by depth; stack[0] is a top-level node.
    std::vector<OutlineNode*> stack;
    std::set<std::string> seen_numbers;

    const auto lines = split_lines(markdown);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const int line_no = static_cast<int>(i) + 1;
        std::string line = trim(lines[i]);
        if (line.empty()) continue;

        if (line[0] == '#') {
            std::size_t level = 0;
            while (level < line.size() && line[level] == '#') ++level;
            std::string rest = trim(line.substr(level));
            auto space = rest.find(' ');
            std::string number_token = space == std::string::npos ? rest : rest.substr(0, space);
            while (ends_with(number_token, ".")) number_token.pop_back();
            auto components = parse_number_components(number_token);
            if (!components)
                throw OutlineParseError(line_no, lines[i], "heading has no dotted number");
            if (components->size() != level)
                throw OutlineParseError(line_no, lines[i],
                                        "heading level does not match number depth");
            if (!seen_numbers.insert(number_token).second)
                throw OutlineParseError(line_no, lines[i], "duplicate heading number");

            OutlineNode node;
            node.number = number_token;
            node.title = space == std::string::npos ? "" : trim(rest.substr(space + 1));

            if (level == 1) {
                outline.nodes.push_back(std::move(node));
                stack.assign(1, &outline.nodes.back());
            } else {
                if (stack.size() < level - 1)
                    throw OutlineParseError(line_no, lines[i], "heading has no parent section");
                stack.resize(level - 1);
                OutlineNode* parent = stack.back();
                if (!starts_with(number_token, parent->number + "."))
                    throw OutlineParseError(line_no, lines[i],
                                            "heading number not nested under " + parent->number);
                parent->children.push_back(std::move(node));
                stack.push_back(&parent->children.back());
            }
            continue;
        }

        if (starts_with(line, kGapPrefix)) {
            if (stack.empty()) {
                logging::warn("gap entry outside any section ignored: " + line);
                continue;
            }
            auto [text, ids] = strip_citations(trim(line.substr(kGapPrefix.size())));
            if (!ids.empty()) logging::warn("citations inside a Gap entry are ignored");
            OutlineBullet bullet;
            bullet.text = text;
            bullet.is_gap = true;
            stack.back()->bullets.push_back(std::move(bullet));
            continue;
        }

        if (is_bullet_line(line)) {
            if (stack.empty()) {
                logging::warn("bullet outside any section ignored: " + line);
                continue;
            }
            auto dot = line.find('.');
            auto [text, ids] = strip_citations(trim(line.substr(dot + 1)));
            OutlineBullet bullet;
            bullet.text = text;
            bullet.citations = std::move(ids);
            stack.back()->bullets.push_back(std::move(bullet));
            continue;
        }

        logging::debug("outline line ignored: " + line);
    }
    return outline;
}

std::string render_outline(const AdaptiveOutline& outline, OutlineMode mode) {
    std::string out;
    for (const auto& node : outline.nodes) render_node(node, mode, 1, out);
    return out;
}

std::string render_branch(const OutlineNode& node, OutlineMode mode) {
    std::string out;
    int depth = static_cast<int>(std::count(node.number.begin(), node.number.end(), '.')) + 1;
    render_node(node, mode, depth, out);
    return out;
}

std::vector<int> collect_citation_ids(const AdaptiveOutline& outline) {
    std::vector<int> out;
    std::set<int> seen;
    for (const auto& node : outline.nodes) collect_ids(node, out, seen);
    return out;
}

std::vector<int> collect_citation_ids(const OutlineNode& node) {
    std::vector<int> out;
    std::set<int> seen;
    collect_ids(node, out, seen);
    return out;
}

int prune_unknown_citations(AdaptiveOutline& outline, const std::vector<int>& known_ids) {
    std::set<int> known(known_ids.begin(), known_ids.end());
    int removed = 0;
    for (auto& node : outline.nodes) removed += prune_node(node, known);
    return removed;
}

}  // namespace deepreport
