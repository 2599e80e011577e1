#include "deepreport/prompts.hpp"

#include <array>
#include <set>

namespace deepreport {

namespace {

struct TemplateText {
    const char* name;
    const char* system;
    const char* user;
    ModelRole role;
};

constexpr const char* kResearcherSystem =
    "You are an expert researcher. Be detailed, value good arguments over authority,\n"
    "and consider recent or emerging developments when the user asks about them.";

constexpr const char* kInitialQueryUser =
    R"(Given the following prompt from the user, generate a list of SERP queries to
research the topic. Return a maximum of {queries_num} queries.
Make sure each query is unique and not similar to the others.

To find high-quality visual evidence, include visual-focused keywords such as
"architecture diagram", "performance benchmark chart", "comparison table", or
"visual schematic" in at least half of the generated queries.

OUTPUT FORMAT: Return only the queries, one per line.

<prompt>{query}</prompt>
Previous learnings:
{learning_str})";

constexpr const char* kGuidedQueryUser =
    R"(Given the current outline with evidence coverage and gaps, generate
{queries_num} targeted search queries for the next research round. Prioritize
Gap entries and weakly supported sections, avoid previously used queries, and
include visual-focused keywords in at least half of the queries.

Topic: {topic}
Current outline:
{current_outline}
Previously issued queries:
{prev_queries}
Latest learnings:
{learning_str}

OUTPUT FORMAT: Return only the queries, one per line.)";

constexpr const char* kLearningExtractionUser =
    R"(Given the following contents from a SERP search for <query>{query}</query>,
generate up to {learning_num} concise, detailed, information-dense learnings.
Include Markdown hyperlinks, named entities, exact metrics, dates, and useful
tables or lists.

If the contents contain image placeholders in the format [Image_X: description],
strictly preserve them in the extracted learnings. For each referenced image,
produce a deductive_evidence_atom with:
1. Visual Features: what is explicitly visible in the image.
2. Deductive Fact: the factual or quantitative claim supported by the image.
3. Rationale: how the image acts as evidence for the broader topic.

Also return up to {question_num} follow-up questions for further research.

OUTPUT FORMAT: Return one <learning> block per learning. Keep the learning
text inside the block and attach its atoms as tagged sub-blocks:
<learning>
learning text with preserved [Image_X: description] placeholders
<evidence_atom image_id="Image_X">
visual_features: ...
deductive_fact: ...
rationale: ...
</evidence_atom>
</learning>
<follow_up_question>question text</follow_up_question>

<contents>{contents}</contents>)";

constexpr const char* kOutlineUpdateSystem =
    "You are an expert research planner. Maintain a living Markdown outline that\n"
    "evolves as new evidence arrives. Update it by assigning new learning IDs to\n"
    "claims via <citation> tags, restructuring sections when new subtopics appear,\n"
    "and recording remaining evidence gaps.";

constexpr const char* kOutlineUpdateUser =
    R"(Topic: {topic}
Current outline:
{current_outline}
New learnings from round {round_num}:
{new_learnings_str}
All learnings so far:
{all_learnings_str}

Return only:
<adaptive_outline>
# 1. Section Title
## 1.1 Subsection Title
### 1.1.1 Sub-subsection Title
a. Specific point <citation>id 1, id 3</citation>
Gap: evidence still needed, if applicable
</adaptive_outline>)";

constexpr const char* kClassificationSystem =
    "You are an expert research assistant triaging web images using only their\n"
    "surrounding webpage context and metadata. Return strict JSON only.";

constexpr const char* kClassificationUser =
    R"(Topic:
{topic}

For each candidate image below, decide from its alt text, surrounding context,
and page URL whether it is worth keeping as potential source evidence for the
topic. Assign a figure type from: architecture, pipeline, hardware, schematic,
result_chart, benchmark, ablation_table, photo, map, other. Estimate contextual
relevance from 0 to 5 and flag images that look like primary-source figures.

Return a JSON array. Each item must be:
{
  "image_id": "...",
  "keep": true,
  "figure_type": "...",
  "relevance": 0-5,
  "primary_source": false
}

Candidates:
{candidates_json})";

constexpr const char* kRerankSystem =
    "You are an expert research assistant selecting source images for a report topic.\n"
    "Use the topic and learnings to decide which candidate images are worth keeping.\n"
    "Return strict JSON only.";

constexpr const char* kRerankUser =
    R"(Topic:
{topic}

Report Outline:
{outline_clean}

Learnings:
{trimmed_learnings}

Rank these image candidates for relevance to the topic and align each useful
candidate with an actual section title from the outline.

Return a JSON array. Each item must be:
{
  "image_id": "...",
  "relevance_score": 0-5,
  "should_keep": true,
  "recommended_section": "...",
  "why_relevant": "..."
}

Candidates:
{candidates_json})";

constexpr const char* kVlmSystem =
    R"(You are an OCR and technical-figure understanding assistant.
Read visible text from the figure and extract structured visual evidence.
Return plain text with exactly these fields:
visible_title: ...
visible_text: ...
ocr_keywords: keyword1, keyword2, ...
ocr_summary: one sentence
deductive_evidence_atoms: Extract 3-5 key evidence atoms. For each atom, provide
[Visual Feature] -> [Deductive Fact] -> [Rationale].)";

constexpr const char* kVlmUser =
    "Topic: {topic}\n"
    "Read this image carefully and extract OCR-like signals and evidence atoms.";

constexpr const char* kFinalSelectionSystem =
    "You are an expert research editor making the final call on which analyzed\n"
    "source figures belong in a research report. Aggregate every available signal:\n"
    "context relevance, visual analysis, evidence atoms, and source credibility.\n"
    "Return strict JSON only.";

constexpr const char* kFinalSelectionUser =
    R"(Topic:
{topic}

For each analyzed candidate below, decide whether to use it, give a composite
quality score and a source credibility score (both 0-5), state the claims the
figure can support, and give one sentence of integration advice for the writer.

Return a JSON array. Each item must be:
{
  "image_id": "...",
  "keep_decision": true,
  "composite_score": 0-5,
  "credibility": 0-5,
  "supported_claims": "...",
  "integration_advice": "..."
}

Candidates:
{candidates_json})";

constexpr const char* kStyleGuideSystem =
    "You are an expert report-generation assistant specialized in creating\n"
    "professional documents that combine insightful analysis with visualizations.";

constexpr const char* kStyleGuideUser =
    R"(Using the provided topic and previous learnings, produce a visualization style
guide for downstream section generation. In the default pipeline, the report
structure is inherited from the adaptive research outline; this prompt mainly
provides chart tone, color usage, information hierarchy, and figure style.

Topic: {topic}
Previous learnings: {learning_str}
Candidate figure evidence, if available: {figure_plan_text}

Return:
<style_guide>
[visualization style guide here]
</style_guide>)";

constexpr const char* kSectionUser =
    R"(You are writing a section for a research report on the topic: "{topic}".
This section is titled: "{section_title}".
Summary/Outline of this section: "{section_summary}".

Use the Visualization Style Guide:
{style_guide}

Use the following routed research learnings as your knowledge base:
{sec_learnings}

Known evidence gap for this section, if any:
{evidence_gap}

Available Image Placeholders for this section:
{sec_images}

Citation and verifiability rules:
- For every important quantitative claim, benchmark, chronology, causal
  explanation, comparison, or empirical judgment, attach a supporting Markdown
  hyperlink in the same sentence or immediately following sentence.
- Prefer source links already present in the routed learnings, especially primary
  or directly relevant sources.
- Do not rely on a single citation at the end of a long paragraph to support many
  distinct claims.
- If a claim is only partially supported, narrow or soften it instead of stating
  it strongly.
- If you compare systems, methods, periods, or regions, make sure each side of
  the comparison has nearby evidence.
- Keep the section auditable on its own.

Image grounding rules:
- Only insert an image if it directly supports a concrete claim in this section.
- Do not use weakly related or decorative images.
- Use only the provided image IDs; never make up fake image IDs.
- Do not use the same image multiple times in the report.
- Every inserted image must be explicitly explained in the surrounding text.
- If you insert an source figure, reference 1-2 concrete visual landmarks such
  as labels, trends, module names, colors, or spatial layout.
- Usually insert no more than 1-2 source figures in a section.

Generated visualization rules:
- Generate a <visualization> block only when real data or a grounded mechanism
  from the routed learnings supports it.
- Every visual element must come from the routed learnings or section context.
- Do not use dummy or fake data such as "Alpha", "Beta", or "Sample Bar Chart".
- If prose or available original source images already communicate the point
  clearly, do not generate an additional chart.
- A <visualization> block must contain a complete JSON design specification and
  must be closed immediately with </visualization>.

Write the full Markdown content for this section now.)";

constexpr const char* kGlobalReportUser =
    R"(You are writing a complete research report on the topic: "{topic}".

Report outline:
{outline}

Use the Visualization Style Guide:
{style_guide}

Use the following research learnings as your knowledge base:
{learnings}

Available Image Placeholders:
{images}

Follow the same citation, image grounding, and generated visualization rules as
sectionwise writing: support claims with Markdown hyperlinks from the learnings,
insert an image only where it directly supports a concrete claim, reference
concrete visual landmarks for every inserted source figure, never invent image
IDs, never reuse an image, and emit a <visualization> block only for real data,
closed immediately with </visualization>.

Write the full Markdown report now.)";

constexpr const char* kChartActorSystem =
    "You are a HTML/D3.js V7 implementation expert who transforms visualization\n"
    "designs into working code.";

constexpr const char* kChartActorUser =
    R"(Implement the visualization design specification with HTML and D3.js.
Treat the specification as binding. Do not replace it with a generic template.
Use titles, labels, data, captions, and semantic structure from the specification.
Import D3.js using <script src="https://d3js.org/d3.v7.min.js"></script>.
Set the root SVG/container width to exactly 700px, use sufficient margins, and
return a complete self-contained HTML file in a ```html code block.

Design specification:
{design_spec}

Visualization style guide:
{style_guide}

Revision notes from the previous iteration, if any:
{revision_notes})";

constexpr const char* kChartCriticUser =
    R"(Given a screenshot of the rendered HTML and console messages, check for:
design-spec mismatch, placeholder content, excessive annotations, overlapping
elements, sizing problems, excessive margins, and unreadable labels. For each
issue, describe the problem, its location, and the relevant elements. If no
issues are found, end with "No issues found."

Design specification:
{design_spec}

Console messages:
{console_text})";

constexpr const char* kChartPairwiseUser =
    R"(Two rendered candidates for the same chart specification are attached in
order. Compare them for faithfulness to the specification, readability, and
visual quality.

Design specification:
{design_spec}

Reply with exactly "A" if the first candidate is better, or "B" if the second
candidate is better.)";

constexpr const char* kRefineSystem =
    R"(You are an expert research report rewriter. Rewrite an existing Markdown report
into a clearer, better-organized, and better-supported research report.

Goals:
1. Improve structure, expression, analytical presentation, and readability.
2. Improve evidential support, precision, credibility, and verifiability.

Important rules:
- Use only information already present in the report, supplied learnings, and
  media inventory. Do not invent facts, data, sources, or claims.
- Preserve every [[MEDIA_ANCHOR_xxx]] token exactly once.
- Keep links, source names, citations, footnote-style references, and media anchors.
- Place source support near important quantitative claims, comparisons,
  mechanism explanations, and empirical judgments.
- If a claim is only partially supported, narrow it or add a caveat.
- Return only the final rewritten Markdown.)";

constexpr const char* kRefineUser =
    R"(Rewrite the following report into a stronger research report while preserving
all media anchors exactly once.

Topic: {topic_hint}
Media inventory: {media_inventory}
Learnings: {learnings_text}
Current report with media anchors: {report_with_anchors})";

constexpr const char* kAnchorRepairSystem =
    "You are repairing a rewritten Markdown report whose media anchor tokens were\n"
    "damaged. Make minimal textual changes.";

constexpr const char* kAnchorRepairUser =
    R"(The following media anchor tokens must each appear exactly once in the report
but are currently missing:
{missing_anchors}

Reinsert each listed token exactly once at the most contextually appropriate
position. Do not remove or duplicate any other [[MEDIA_ANCHOR_xxx]] token.
Return the full repaired Markdown report.

{report})";

constexpr const char* kJudgeSystem =
    R"(You are an expert evaluator of AI-generated reports with advanced knowledge of data visualization and information analysis.
Your role is to provide fair, impartial assessments of report quality based strictly on objective criteria.

## Evaluation Task
You will evaluate one AI-generated report based on:
- The overarching topic
- The report itself
- The provided visual inputs, if any

For each criterion below, assign a score from 1 to 5 (1=poor, 5=excellent) with half-point increments allowed (e.g., 3.5).
Provide a concise, evidence-based justification for each score. Be cautious with extreme scores (1 and 5).

## Additional Scoring Rules
- You must score visual dimensions primarily based on actually visible image content provided to you.
- Do not treat figure titles, captions, image placeholders, Markdown tables, Mermaid source code, or textual descriptions as equivalent to real rendered images.
- If a report does not contain real visible images, Visualization Quality should be scored conservatively and usually should not exceed 2.
- In these reports, <HTMLRenderer htmlFile="..."/> is a valid embedded-figure marker used by the report system. The corresponding rendered chart images may be provided separately in the evaluation input. Do not treat these tags by themselves as broken placeholders, missing content, or unfinished report artifacts.
- If the evaluation input already provides the corresponding real visible images, do not penalize Coherence and Organization merely because the markdown text contains <HTMLRenderer htmlFile="..."/> tags.
- When judging repetition, distinguish between harmful repetition and necessary analytical reinforcement. Briefly restating a key limitation, uncertainty, or methodological caveat in a later section should not be penalized unless it becomes near-duplicate, verbose, or materially disrupts flow.

## Mandatory Rule for Source-Figure Integration
- When scoring Source-Figure Integration, you must rely only on the images explicitly provided as source images in the evaluation input.
- Do not infer the existence of original/source images from report text alone.
- Do not treat figure titles, captions, links, citations, textual descriptions, Markdown image placeholders, Mermaid code, Mermaid renderings, generated charts, rendered screenshots, HTML screenshots, or model-generated diagrams as source/original images for this criterion.
- If no source/original images are explicitly provided in the evaluation input, Source-Figure Integration must be scored as 1.
- If the report claims to use source figures but no corresponding source/original images are actually provided, treat this as lack of visible evidence rather than successful integration.

## Evaluation Criteria
### Informativeness and Depth: Does the report deliver comprehensive, substantive and thorough information?
Score 1: Extremely superficial content with minimal information. Contains only basic facts without context or explanation.
Score 2: Limited content with some relevant information but significant gaps. Lacks necessary depth on key aspects.
Score 3: Adequate information covering main points with some supporting details, but missing opportunities for deeper analysis.
Score 4: Comprehensive information with substantive details, examples, and insights across most sections.
Score 5: Exceptionally thorough coverage with rich, nuanced details, expert-level insights, and well-contextualized information throughout.

### Coherence and Organization: Is the report well-organized with visualizations that connect meaningfully to the text?
Score 1: Disorganized; lacks logical structure and coherence. Visualizations appear random and unconnected to text.
Score 2: Basic structure is present but transitions are awkward, sections feel loosely assembled, or visuals are only weakly connected to the surrounding discussion.
Score 3: Clear overall organization with occasional flow issues, local repetition, or uneven transitions. Visualizations generally support the text, though integration or explanation could be tighter.
Score 4: Well-structured with smooth transitions between sections. Visualizations are meaningfully integrated with the text, and minor repetition or system-specific rendering markers do not materially disrupt reading.
Score 5: Impeccable organization with seamless progression of sections. Visualizations are tightly woven into the narrative, and the report maintains strong flow without unnecessary redundancy.

### Verifiability: Are the report's claims well supported with citations, references, or source annotations?
Score 1: Rarely supported with evidence; many claims are unsubstantiated.
Score 2: Inconsistently verified; some claims are supported; evidence is occasionally provided.
Score 3: Generally verified; claims are usually supported with evidence; however, there might be a few instances where verification is lacking.
Score 4: Well-supported; claims are very well supported with credible evidence, and instances of unsupported claims are rare.
Score 5: Very well-supported; almost every claim is substantiated with credible evidence, showing a high level of thorough verification.

### Visualization Quality: Is the visualization quality high? Score this mainly based on real visible image content, not chart titles, captions, placeholders, Markdown tables, Mermaid source code, or textual descriptions alone.
Score 1: No real visible images are provided, or visualization is severely missing; only placeholders, code, tables, or textual descriptions are present; or the charts are poor, confusing, misleading, badly labeled, or inappropriate.
Score 2: Visualization is extremely limited, or only a few simple or low-quality charts are provided; annotations and explanations are limited; axis, color, clarity, or layout problems clearly hinder understanding. If there are no real images and only tables or captions, the score should usually fall here.
Score 3: The charts are basically clear, have labels and annotations, and communicate information, but are not refined or miss opportunities for better expression. A score of 3 should only be given when real visible images exist and their quality is at least acceptable.
Score 4: The charts are well executed, visually effective, clearly labeled, reasonably annotated, thoughtfully designed, and the real visible images work well with the text.
Score 5: The charts are expert-level, highly polished, visually excellent, and reveal insights effectively. A score of 5 requires multiple high-quality, real visible, well-rendered images.

### Source-Figure Integration: Are the inserted original/source images (for example original paper figures, original charts, official diagrams, or source screenshots) selected appropriately, from credible sources, and effectively integrated with the text?
Score this criterion only based on the source/original images explicitly provided in the evaluation input.
Score 1: No source/original images are explicitly provided; or the provided source/original images are clearly irrelevant, unclear, low-quality, from questionable sources, or not meaningfully explained in the text.
Score 2: A small number of source/original images are provided, but their relevance is limited, their quality or source value is modest, or the text mentions them only briefly without forming meaningful support.
Score 3: The provided source/original images are basically relevant and reasonably credible, and the report offers some explanation, but the image selection or integration remains ordinary.
Score 4: The provided source/original images are well chosen, credible, and representative; the text explicitly cites and explains them, and they clearly support important points in the report.
Score 5: Multiple highly relevant, authoritative, and representative source/original images are provided; the report interprets them accurately and deeply, and they are tightly integrated into the argument in a way that substantially strengthens the report's persuasiveness.

## Response Format
Return valid XML using exactly this structure:
<evaluation>
  <report>
    <informativeness_and_depth><score>X</score><justification>...</justification></informativeness_and_depth>
    <coherence_and_organization><score>X</score><justification>...</justification></coherence_and_organization>
    <verifiability><score>X</score><justification>...</justification></verifiability>
    <visualization_quality><score>X</score><justification>...</justification></visualization_quality>
    <original_image_integration><score>X</score><justification>...</justification></original_image_integration>
  </report>
</evaluation>)";

constexpr const char* kJudgeUser =
    R"(## Topic
{topic}

<report>
{report}
</report>

The following images are original/source images inserted into the report.
{source_images}

The following images are generated charts or rendered report visuals, not original/source images.
{generated_images})";

const TemplateText& template_text(PromptTemplate tmpl) {
    static const std::array<TemplateText, 17> kTemplates = {{
        {"initial_query", kResearcherSystem, kInitialQueryUser, ModelRole::generation},
        {"outline_guided_query", kResearcherSystem, kGuidedQueryUser, ModelRole::generation},
        {"learning_extraction", "You are an expert researcher extracting information from web pages.",
         kLearningExtractionUser, ModelRole::generation},
        {"outline_update", kOutlineUpdateSystem, kOutlineUpdateUser, ModelRole::generation},
        {"image_classification", kClassificationSystem, kClassificationUser, ModelRole::generation},
        {"image_rerank", kRerankSystem, kRerankUser, ModelRole::generation},
        {"vlm_analysis", kVlmSystem, kVlmUser, ModelRole::visual},
        {"final_selection", kFinalSelectionSystem, kFinalSelectionUser, ModelRole::generation},
        {"style_guide", kStyleGuideSystem, kStyleGuideUser, ModelRole::generation},
        {"section_generation", "", kSectionUser, ModelRole::generation},
        {"global_report", "", kGlobalReportUser, ModelRole::generation},
        {"chart_actor", kChartActorSystem, kChartActorUser, ModelRole::visual},
        {"chart_critic", "", kChartCriticUser, ModelRole::visual},
        {"chart_pairwise", "", kChartPairwiseUser, ModelRole::visual},
        {"report_refine", kRefineSystem, kRefineUser, ModelRole::generation},
        {"anchor_repair", kAnchorRepairSystem, kAnchorRepairUser, ModelRole::generation},
        {"judge_single", kJudgeSystem, kJudgeUser, ModelRole::generation},
    }};
    return kTemplates[static_cast<std::size_t>(tmpl)];
}

// {lowercase_identifier} placeholders, first-appearance order.
std::vector<std::string> scan_slots(std::string_view text, std::vector<std::string> acc = {}) {
    std::set<std::string> seen(acc.begin(), acc.end());
    for (std::size_t i = 0; i + 1 < text.size(); ++i) {
        if (text[i] != '{') continue;
        std::size_t j = i + 1;
        while (j < text.size() &&
               (std::islower(static_cast<unsigned char>(text[j])) || text[j] == '_'))
            ++j;
        if (j > i + 1 && j < text.size() && text[j] == '}') {
            std::string name(text.substr(i + 1, j - i - 1));
            if (seen.insert(name).second) acc.push_back(name);
            i = j;
        }
    }
    return acc;
}

// Single pass: placeholders in the template are substituted, text arriving
// through slot values is never rescanned.
Result<std::string> substitute(std::string_view text, const PromptSlots& slots) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '{') {
            std::size_t j = i + 1;
            while (j < text.size() &&
                   (std::islower(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                ++j;
            if (j > i + 1 && j < text.size() && text[j] == '}') {
                std::string name(text.substr(i + 1, j - i - 1));
                auto it = slots.find(name);
                if (it == slots.end())
                    return Result<std::string>::fail("missing slot: " + name);
                out += it->second;
                i = j;
                continue;
            }
        }
        out += text[i];
    }
    return Result<std::string>::ok(std::move(out));
}

}  // namespace

Result<ChatRequest> build_prompt(PromptTemplate tmpl, const PromptSlots& slots) {
    const TemplateText& text = template_text(tmpl);
    auto system = substitute(text.system, slots);
    if (!system) return Result<ChatRequest>::fail(system.error());
    auto user = substitute(text.user, slots);
    if (!user) return Result<ChatRequest>::fail(user.error());
    ChatRequest request;
    request.system = system.take();
    request.user = user.take();
    request.role = text.role;
    return Result<ChatRequest>::ok(std::move(request));
}

std::vector<std::string> prompt_required_slots(PromptTemplate tmpl) {
    const TemplateText& text = template_text(tmpl);
    return scan_slots(text.user, scan_slots(text.system));
}

const char* prompt_template_name(PromptTemplate tmpl) {
    return template_text(tmpl).name;
}

}  // namespace deepreport
