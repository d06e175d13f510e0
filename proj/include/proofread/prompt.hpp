#pragma once

#include "proofread/report.hpp"

#include <optional>
#include <string>
#include <vector>

namespace proofread {

enum class InferenceStrategy { EndToEnd, Staged };
enum class KnowledgeMode { None, MkgdOnly, ExkrOnly, MkgdAndExkr, SimpleRag };

std::string_view to_string(InferenceStrategy s);
std::string_view to_string(KnowledgeMode k);
std::optional<InferenceStrategy> inference_strategy_from_string(std::string_view s);
std::optional<KnowledgeMode> knowledge_mode_from_string(std::string_view s);

struct PipelineMode {
    InferenceStrategy strategy = InferenceStrategy::Staged;
    KnowledgeMode knowledge = KnowledgeMode::MkgdAndExkr;

    bool uses_mkgd() const { return knowledge == KnowledgeMode::MkgdOnly || knowledge == KnowledgeMode::MkgdAndExkr; }
    bool uses_exkr() const { return knowledge == KnowledgeMode::ExkrOnly || knowledge == KnowledgeMode::MkgdAndExkr; }
    bool uses_chunks() const { return knowledge == KnowledgeMode::SimpleRag; }

    // "STAGED/MKGD_AND_EXKR"
    std::string label() const;
    static std::optional<PipelineMode> parse(std::string_view label);
    bool operator==(const PipelineMode&) const = default;
};

enum class Stage { Detect, Localize, Correct, EndToEnd };

std::string_view to_string(Stage s);
std::optional<Stage> stage_from_string(std::string_view s);

struct ReferenceSummary {
    std::string report_id;
    double score = 0.0;
    std::vector<std::string> sentences;
};

struct ChunkExcerpt {
    std::string report_id;
    std::size_t ordinal = 0;
    double score = 0.0;
    std::string text;
};

// Each field is present exactly when the mode asks for that knowledge source.
struct KnowledgeInputs {
    std::optional<std::vector<std::string>> mkgd_sentences;
    std::optional<std::vector<ReferenceSummary>> references;
    std::optional<std::vector<ChunkExcerpt>> chunks;
};

// Outputs of earlier stages, carried into later prompts.
struct PriorOutputs {
    std::optional<std::string> detection;
    std::optional<std::string> span;
};

struct PromptBundle {
    std::string role_preamble;
    std::string task_instructions;
    std::string knowledge_block;
    std::string output_format_spec;

    // The four parts under fixed "### " headers, always in this order.
    std::string render() const;
    bool operator==(const PromptBundle&) const = default;
};

inline constexpr std::string_view kMkgdHeading = "Knowledge graph summary of this report:";
inline constexpr std::string_view kReferenceHeading = "Similar error-free reference reports:";
inline constexpr std::string_view kChunkHeading = "Retrieved report excerpts:";

// Throws InconsistentKnowledgeInputs when inputs do not match the mode.
PromptBundle build_prompt(Stage stage, const RadiologyReport& report, const PipelineMode& mode,
                          const KnowledgeInputs& knowledge, const PriorOutputs& prior = {});

// Inverse of render(); throws SchemaMismatch.
PromptBundle parse_prompt(std::string_view rendered);

// Appended to the user turn when a response must be re-requested.
std::string reminder_suffix(Stage stage);

}  // namespace proofread
