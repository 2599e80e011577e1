#pragma once
// Small tag-level HTML to Markdown converter for scraped pages. Headings,
// links, emphasis, lists, and tables are preserved; scripts, styles, and
// other non-content machinery are dropped. <img> tags emit no markup but
// their position, src, and alt are captured for the image pipeline.

#include <cstddef>
#include <string>
#include <vector>

namespace deepreport {

struct HtmlImage {
    std::string src;              // resolved against the page URL
    std::string alt;
    std::size_t markdown_offset;  // position in the emitted markdown
};

struct HtmlConversion {
    std::string markdown;
    std::vector<HtmlImage> images;
};

// `base_url` resolves relative hrefs/srcs; pass "" to keep them as-is.
HtmlConversion html_to_markdown(const std::string& html, const std::string& base_url);

}  // namespace deepreport
