#pragma once
// The adaptive outline: a numbered hierarchical skeleton whose leaf bullets
// cite learning IDs through <citation> tags and whose unsupported regions
// carry Gap entries. Doubles as search controller and report plan.

#include <stdexcept>
#include <string>
#include <vector>

namespace deepreport {

struct OutlineBullet {
    std::string text;
    std::vector<int> citations;  // parsed only from <citation> tags
    bool is_gap = false;         // is_gap implies citations empty

    bool operator==(const OutlineBullet&) const = default;
};

struct OutlineNode {
    std::string number;  // "1", "1.1", "1.1.2"
    std::string title;
    std::vector<OutlineBullet> bullets;
    std::vector<OutlineNode> children;

    bool operator==(const OutlineNode&) const = default;
};

struct AdaptiveOutline {
    std::vector<OutlineNode> nodes;  // top-level nodes are the generation units

    bool empty() const { return nodes.empty(); }
    bool operator==(const AdaptiveOutline&) const = default;
};

enum class OutlineMode { internal, reader };

class OutlineParseError : public std::runtime_error {
public:
    OutlineParseError(int line_number, std::string line, const std::string& reason);
    int line_number;
    std::string line;
};

// Parses the numbered-heading outline format. Heading levels carry dotted
// numbers matching their depth; `a.`-style lines become bullets on the most
// recent heading; lines starting with "Gap:" become gap bullets. Citation
// tags accept `id N` tokens separated by commas; non-numeric tokens are
// dropped with a warning. Malformed heading numbering throws
// OutlineParseError naming the offending line. An empty input parses to an
// empty outline.
AdaptiveOutline parse_outline(const std::string& markdown);

// internal mode re-emits citation tags and Gap lines; reader mode emits the
// identical structure with all citation and Gap metadata removed.
// parse_outline(render_outline(o, internal)) == o for valid outlines.
std::string render_outline(const AdaptiveOutline& outline, OutlineMode mode);

// Render one branch (node + descendants) on its own, e.g. for section
// summaries handed to the writer.
std::string render_branch(const OutlineNode& node, OutlineMode mode);

// All citation IDs in the outline, first-occurrence order, no duplicates.
std::vector<int> collect_citation_ids(const AdaptiveOutline& outline);
std::vector<int> collect_citation_ids(const OutlineNode& node);

// Removes citations not present in `known_ids`, warning per removal.
// Returns the number of citations removed.
int prune_unknown_citations(AdaptiveOutline& outline, const std::vector<int>& known_ids);

}  // namespace deepreport
