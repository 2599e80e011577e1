#pragma once
// Prompt builders for every model-mediated step. Each template is a fixed
// system/user pair with {slot} placeholders; build_prompt substitutes slots
// and guarantees no placeholder of the template remains unresolved.

#include <map>
#include <string>

#include "deepreport/gateway.hpp"
#include "deepreport/util.hpp"

namespace deepreport {

enum class PromptTemplate {
    initial_query,
    outline_guided_query,
    learning_extraction,
    outline_update,
    image_classification,
    image_rerank,
    vlm_analysis,
    final_selection,
    style_guide,
    section_generation,
    global_report,
    chart_actor,
    chart_critic,
    chart_pairwise,
    report_refine,
    anchor_repair,
    judge_single,
};

using PromptSlots = std::map<std::string, std::string>;

// Builds the request for a template. Fails with "missing slot: <name>" when
// a placeholder has no value. Temperature and timeout keep their defaults;
// callers attach image payloads where the step needs them.
Result<ChatRequest> build_prompt(PromptTemplate tmpl, const PromptSlots& slots);

// Slot names a template requires, in first-appearance order.
std::vector<std::string> prompt_required_slots(PromptTemplate tmpl);

const char* prompt_template_name(PromptTemplate tmpl);

}  // namespace deepreport
