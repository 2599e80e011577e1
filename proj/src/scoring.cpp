#include "deepreport/scoring.hpp"

#include "deepreport/util.hpp"

namespace deepreport {

namespace {

const std::vector<std::string>& default_stopwords() {
    static const std::vector<std::string> kStopwords = {
        "the",   "and",   "for",   "with",  "that",   "this",  "from",  "are",
        "was",   "were",  "has",   "have",  "had",    "not",   "but",   "its",
        "can",   "will",  "into",  "over",  "about",  "their", "they",  "them",
        "these", "those", "than",  "then",  "when",   "where", "which", "while",
        "also",  "such",  "all",   "any",   "per",    "via",   "between", "within",
        "both",  "each",  "more",  "most",  "some",   "how",   "why",   "what",
        "who",   "using", "use",   "used",  "upon",   "onto",  "our",   "out",
    };
    return kStopwords;
}

}  // namespace

const std::vector<std::string>& ScoringParams::effective_stopwords() const {
    return stopwords.empty() ? default_stopwords() : stopwords;
}

std::set<std::string> tokenize(const std::string& text,
                               const std::vector<std::string>& stopwords) {
    std::set<std::string> tokens;
    std::string current;
    auto flush = [&]() {
        if (current.size() >= 3) {
            bool stopped = false;
            for (const auto& stopword : stopwords) {
                if (current == stopword) {
                    stopped = true;
                    break;
                }
            }
            if (!stopped) tokens.insert(current);
        }
        current.clear();
    };
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch)))
            current += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        else
            flush();
    }
    flush();
    return tokens;
}

std::set<std::string> tokenize(const std::string& text) {
    return tokenize(text, default_stopwords());
}

double type_bonus(std::optional<FigureType> type, const ScoringParams& params) {
    if (!type) return 0.0;
    switch (*type) {
        case FigureType::architecture:
        case FigureType::pipeline:
        case FigureType::hardware:
        case FigureType::schematic:
            return params.type_bonus_major;
        case FigureType::result_chart:
        case FigureType::benchmark:
        case FigureType::ablation_table:
            return params.type_bonus_minor;
        default:
            return 0.0;
    }
}

std::optional<double> score_image(const ImageCandidate& candidate, const SectionPlan& section,
                                  const ScoringParams& params) {
    const auto& stopwords = params.effective_stopwords();
    std::set<std::string> section_tokens = tokenize(section.title + " " + section.summary, stopwords);

    std::string image_text = candidate.alt_text;
    if (candidate.ocr)
        for (const auto& keyword : candidate.ocr->keywords) image_text += " " + keyword;
    image_text += " " + candidate.evidence_role;
    std::set<std::string> image_tokens = tokenize(image_text, stopwords);

    int matches = 0;
    for (const auto& token : section_tokens)
        if (image_tokens.count(token)) ++matches;
    if (matches < params.min_matches) return std::nullopt;

    double score = params.alpha * matches + candidate.credibility +
                   type_bonus(candidate.figure_type, params) +
                   params.gamma *
                       (static_cast<int>(candidate.evidence_role.size()) > params.tau ? 1.0 : 0.0);
    return score;
}

}  // namespace deepreport
