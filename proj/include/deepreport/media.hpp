#pragma once
// Stage D media machinery: visualization-spec extraction, the bounded chart
// actor-critic loop with template rejection, source-figure URL resolution,
// media-anchor-preserving report refinement with bijection validation and
// repair, and reference-section extraction.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "deepreport/enrichment.hpp"
#include "deepreport/gateway.hpp"
#include "deepreport/section_writer.hpp"

namespace deepreport {

struct VisualizationSpec {
    int section_index = 0;
    std::string id;         // "viz_<section>_<n>"
    std::string spec_json;  // well-formed JSON design spec
};

struct ChartArtifact {
    std::string spec_id;
    std::string html;                 // self-contained, 700px root, pinned runtime
    std::vector<std::uint8_t> png;
    int iterations_used = 0;          // <= 3
    std::vector<std::string> critic_log;
};

// Ordered anchor token -> original media markup; tokens are sequential
// zero-padded [[MEDIA_ANCHOR_nnn]] starting at 001.
struct MediaAnchorMap {
    std::vector<std::pair<std::string, std::string>> entries;

    bool empty() const { return entries.empty(); }
    const std::string* find(const std::string& token) const;
};

// External headless renderer: `command` runs with {input}/{output}
// placeholders expanded to the HTML and PNG paths; stdout+stderr are the
// captured console text. An empty command means no renderer is available.
struct ChartRenderer {
    std::string command;
    std::filesystem::path workdir;

    bool available() const { return !command.empty(); }
};

struct RenderOutput {
    std::vector<std::uint8_t> png;
    std::string console;
};

Result<RenderOutput> render_chart_html(const ChartRenderer& renderer, const std::string& html,
                                       const std::string& name);

// Replaces well-formed <visualization> blocks with pending-chart markers and
// returns the specs; unterminated or non-JSON blocks are deleted with a
// warning.
std::vector<VisualizationSpec> extract_visualizations(std::vector<SectionDraft>& drafts);

std::string pending_chart_marker(const std::string& spec_id);

// True iff the HTML carries placeholder signals: "monthly performance",
// "sample data" (case-insensitive), or at least 4 distinct month names.
bool detect_template_chart(const std::string& html);

// Actor-critic refinement, at most `max_iterations` actor passes. Template
// detection forces regeneration; the critic stops the loop with "No issues
// found."; with several rendered candidates the last two go through one
// pairwise comparison call. Renderer failure drops the chart.
Result<ChartArtifact> refine_chart(const VisualizationSpec& spec, const std::string& style_guide,
                                   Gateway& gateway, const ChartRenderer& renderer,
                                   int max_iterations = 3);

// Embedded-chart markup as written into the report.
struct ChartRef {
    std::string png_path;   // relative, e.g. "media/chart_1.png"
    std::string html_path;  // relative
    std::string title;
};

// [Image_X] placeholders become Markdown images pointing at the source URL
// with a caption built from the brief; pending-chart markers become embedded
// chart markup; unresolved markers are removed.
std::string resolve_media(const std::string& report, const std::vector<SelectedFigure>& figures,
                          const std::map<std::string, ChartRef>& charts);

// Caption text for a resolved source figure (title plus the brief's leading
// visual landmark).
std::string figure_caption(const SelectedFigure& figure);

// Every media element (Markdown image, embedded-chart markup) replaced by a
// sequential anchor token. deanchorize(anchorize(r)) == r byte-exactly.
std::pair<std::string, MediaAnchorMap> anchorize(const std::string& report);
std::string deanchorize(const std::string& report, const MediaAnchorMap& map);

struct RefineLimits {
    int report_chars = 90000;
    int learnings_chars = 45000;
};

// Report-level polish. The prompt payload is truncated per `limits`; on
// model failure the anchored input passes through. Deterministic post-passes
// strip code-fence wrapping and renormalize heading numbers.
std::string refine_report(const std::string& anchored, const std::string& learnings_text,
                          const MediaAnchorMap& map, const std::string& topic, Gateway& gateway,
                          const RefineLimits& limits = {});

// Enforces the anchor bijection: duplicates collapse to the first
// occurrence, unknown anchor tokens are dropped, missing anchors go through
// a targeted repair prompt (up to 2 attempts) and finally re-append at the
// document end. Returns the final report with anchors substituted back.
std::string validate_anchors(const std::string& refined, const MediaAnchorMap& map,
                             Gateway& gateway);

// "## References" section from Markdown links and arXiv identifiers in the
// report and learnings, deduplicated by URL/ID. Empty when no links exist.
std::string extract_references(const std::string& report, const std::string& learnings_text);

// Deterministic heading renumbering: numbered headings become consecutive
// per level, unnumbered headings untouched. Exposed for tests.
std::string renumber_headings(const std::string& markdown);

}  // namespace deepreport
