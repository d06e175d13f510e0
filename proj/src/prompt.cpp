#include "proofread/prompt.hpp"

#include "proofread/error.hpp"

#include <cstdio>

namespace proofread {

std::string_view to_string(InferenceStrategy s) { return s == InferenceStrategy::Staged ? "STAGED" : "END_TO_END"; }

std::string_view to_string(KnowledgeMode k) {
    switch (k) {
        case KnowledgeMode::None: return "NONE";
        case KnowledgeMode::MkgdOnly: return "MKGD_ONLY";
        case KnowledgeMode::ExkrOnly: return "EXKR_ONLY";
        case KnowledgeMode::MkgdAndExkr: return "MKGD_AND_EXKR";
        case KnowledgeMode::SimpleRag: return "SIMPLE_RAG";
    }
    return "NONE";
}

std::optional<InferenceStrategy> inference_strategy_from_string(std::string_view s) {
    if (s == "STAGED") return InferenceStrategy::Staged;
    if (s == "END_TO_END") return InferenceStrategy::EndToEnd;
    return std::nullopt;
}

std::optional<KnowledgeMode> knowledge_mode_from_string(std::string_view s) {
    for (auto k : {KnowledgeMode::None, KnowledgeMode::MkgdOnly, KnowledgeMode::ExkrOnly, KnowledgeMode::MkgdAndExkr,
                   KnowledgeMode::SimpleRag}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

std::string PipelineMode::label() const { return std::string(to_string(strategy)) + "/" + std::string(to_string(knowledge)); }

std::optional<PipelineMode> PipelineMode::parse(std::string_view label) {
    const auto slash = label.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    const auto s = inference_strategy_from_string(label.substr(0, slash));
    const auto k = knowledge_mode_from_string(label.substr(slash + 1));
    if (!s || !k) return std::nullopt;
    return PipelineMode{*s, *k};
}

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::Detect: return "DETECT";
        case Stage::Localize: return "LOCALIZE";
        case Stage::Correct: return "CORRECT";
        case Stage::EndToEnd: return "END_TO_END";
    }
    return "DETECT";
}

std::optional<Stage> stage_from_string(std::string_view s) {
    for (auto st : {Stage::Detect, Stage::Localize, Stage::Correct, Stage::EndToEnd}) {
        if (to_string(st) == s) return st;
    }
    return std::nullopt;
}

namespace {

constexpr std::string_view kRoleHeader = "### ROLE\n";
constexpr std::string_view kTaskHeader = "\n### TASK\n";
constexpr std::string_view kKnowledgeHeader = "\n### KNOWLEDGE\n";
constexpr std::string_view kFormatHeader = "\n### OUTPUT FORMAT\n";

constexpr std::string_view kRole =
    "You are a board-certified radiologist specializing in chest radiography. You review draft chest X-ray "
    "reports for documentation errors such as flipped negations, misrecognized terms, and findings that "
    "contradict the rest of the report.";

std::string task_text(Stage stage, const RadiologyReport& report, const PriorOutputs& prior, bool has_knowledge) {
    std::string t;
    const std::string_view use_knowledge =
        has_knowledge ? " Use the knowledge section to check each finding against standardized clinical statements."
                      : "";
    switch (stage) {
        case Stage::Detect:
            t = "Decide whether the report below contains a clinical documentation error in its FINDINGS or "
                "IMPRESSION section. Answer with a single yes or no.";
            break;
        case Stage::Localize:
            t = "The report below contains one documentation error. Name the exact erroneous term or phrase as it "
                "appears in the report.";
            break;
        case Stage::Correct:
            t = "The report below contains one documentation error. Rewrite the full report with the erroneous "
                "term replaced by the clinically correct wording. Change nothing else.";
            break;
        case Stage::EndToEnd:
            t = "Review the report below. If it contains a documentation error, rewrite the full report with the "
                "error corrected; otherwise reproduce the report unchanged.";
            break;
    }
    t += use_knowledge;
    if (prior.detection) t += "\nStage 1 result: " + *prior.detection;
    if (prior.span) t += "\nStage 2 erroneous span: " + *prior.span;
    t += "\n\nREPORT:\n";
    t += report.text();
    return t;
}

std::string format_text(Stage stage) {
    switch (stage) {
        case Stage::Detect:
            return "Reply with exactly one first line of the form:\nANSWER: YES\nor\nANSWER: NO";
        case Stage::Localize:
            return "Reply with exactly one first line of the form:\nSPAN: <erroneous term or phrase>";
        case Stage::Correct:
        case Stage::EndToEnd:
            return "Reply with a first line containing only:\nCORRECTED_REPORT:\nfollowed by the complete report text.";
    }
    return {};
}

std::string knowledge_text(const PipelineMode& mode, const KnowledgeInputs& in) {
    std::string k;
    auto section = [&](std::string_view heading) {
        if (!k.empty()) k += "\n\n";
        k += heading;
    };
    if (mode.uses_mkgd()) {
        section(kMkgdHeading);
        if (in.mkgd_sentences->empty()) k += "\n- (no findings extracted)";
        for (const auto& s : *in.mkgd_sentences) k += "\n- " + s;
    }
    char buf[64];
    if (mode.uses_exkr()) {
        section(kReferenceHeading);
        if (in.references->empty()) k += "\n(none retrieved)";
        std::size_t n = 0;
        for (const auto& r : *in.references) {
            std::snprintf(buf, sizeof buf, "%.4f", r.score);
            k += "\n[" + std::to_string(++n) + "] " + r.report_id + " (similarity " + buf + ")";
            if (r.sentences.empty()) k += "\n- (no findings extracted)";
            for (const auto& s : r.sentences) k += "\n- " + s;
        }
    }
    if (mode.uses_chunks()) {
        section(kChunkHeading);
        if (in.chunks->empty()) k += "\n(none retrieved)";
        std::size_t n = 0;
        for (const auto& c : *in.chunks) {
            std::snprintf(buf, sizeof buf, "%.4f", c.score);
            k += "\n[" + std::to_string(++n) + "] " + c.report_id + "#" + std::to_string(c.ordinal) +
                 " (similarity " + buf + ")\n" + c.text;
        }
    }
    return k;
}

}  // namespace

std::string PromptBundle::render() const {
    std::string out;
    out.reserve(role_preamble.size() + task_instructions.size() + knowledge_block.size() +
                output_format_spec.size() + 64);
    out += kRoleHeader;
    out += role_preamble;
    out += kTaskHeader;
    out += task_instructions;
    out += kKnowledgeHeader;
    out += knowledge_block;
    out += kFormatHeader;
    out += output_format_spec;
    return out;
}

PromptBundle build_prompt(Stage stage, const RadiologyReport& report, const PipelineMode& mode,
                          const KnowledgeInputs& knowledge, const PriorOutputs& prior) {
    auto check = [&](bool wanted, bool given, std::string_view what) {
        if (wanted != given) {
            fail(ErrorKind::InconsistentKnowledgeInputs,
                 std::string(what) + (wanted ? " required" : " not allowed") + " in mode " + mode.label());
        }
    };
    check(mode.uses_mkgd(), knowledge.mkgd_sentences.has_value(), "knowledge graph sentences");
    check(mode.uses_exkr(), knowledge.references.has_value(), "reference summaries");
    check(mode.uses_chunks(), knowledge.chunks.has_value(), "retrieved chunks");

    PromptBundle p;
    p.role_preamble = kRole;
    p.task_instructions = task_text(stage, report, prior, mode.knowledge != KnowledgeMode::None);
    p.knowledge_block = knowledge_text(mode, knowledge);
    p.output_format_spec = format_text(stage);
    return p;
}

PromptBundle parse_prompt(std::string_view s) {
    if (!s.starts_with(kRoleHeader)) fail(ErrorKind::SchemaMismatch, "prompt does not start with the role header");
    const auto task = s.find(kTaskHeader, kRoleHeader.size());
    if (task == s.npos) fail(ErrorKind::SchemaMismatch, "prompt lacks the task header");
    const auto format = s.rfind(kFormatHeader);
    if (format == s.npos || format < task) fail(ErrorKind::SchemaMismatch, "prompt lacks the output format header");
    // The report inside the task part may contain anything, so the knowledge
    // header is located from the right as well.
    const auto knowledge = s.substr(0, format).rfind(kKnowledgeHeader);
    if (knowledge == s.npos || knowledge < task) fail(ErrorKind::SchemaMismatch, "prompt lacks the knowledge header");

    PromptBundle p;
    p.role_preamble = std::string(s.substr(kRoleHeader.size(), task - kRoleHeader.size()));
    const auto task_body = task + kTaskHeader.size();
    p.task_instructions = std::string(s.substr(task_body, knowledge - task_body));
    const auto knowledge_body = knowledge + kKnowledgeHeader.size();
    p.knowledge_block = std::string(s.substr(knowledge_body, format - knowledge_body));
    p.output_format_spec = std::string(s.substr(format + kFormatHeader.size()));
    return p;
}

std::string reminder_suffix(Stage stage) {
    switch (stage) {
        case Stage::Detect: return "\n\nREMINDER: your first line must be exactly \"ANSWER: YES\" or \"ANSWER: NO\".";
        case Stage::Localize: return "\n\nREMINDER: your first line must be \"SPAN: \" followed by the erroneous term.";
        case Stage::Correct:
        case Stage::EndToEnd:
            return "\n\nREMINDER: start with a line containing only \"CORRECTED_REPORT:\" and then the full report.";
    }
    return {};
}

}  // namespace proofread
