#pragma once
// Fully deterministic offline gateway: synthesizes search results, scraped
// pages, and model replies as pure functions of the request. Backs the demo
// subcommand and the end-to-end fixtures; recording it through a
// TranscriptGateway yields a replayable transcript.

#include "deepreport/gateway.hpp"

namespace deepreport {

struct ScriptedGatewayOptions {
    // Section 3 drafts exercise the validator: a hallucinated placeholder
    // plus a repeated reference that must be collapsed.
    bool adversarial_section_refs = true;
};

class ScriptedGateway : public Gateway {
public:
    explicit ScriptedGateway(ScriptedGatewayOptions options = {});

    Result<std::string> chat(const ChatRequest& request) override;
    std::vector<SearchResult> search(const std::string& query, int top_k) override;
    Result<ScrapedPage> fetch_page(const std::string& url) override;

private:
    ScriptedGatewayOptions options_;
};

}  // namespace deepreport
