#pragma once

#include "proofread/annotate.hpp"
#include "proofread/chat_backend.hpp"
#include "proofread/embedding.hpp"
#include "proofread/knowledge_index.hpp"
#include "proofread/prompt.hpp"
#include "proofread/report.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace proofread {

enum class Detection { Error, NoError };

std::string_view to_string(Detection d);
std::optional<Detection> detection_from_string(std::string_view s);

// Wall measures real elapsed time. Simulated charges a fixed cost per call
// plus a per-character cost, so mock runs are reproducible to the byte.
struct TimingModel {
    enum class Kind { Wall, Simulated };
    Kind kind = Kind::Wall;
    double call_overhead_s = 0.2;
    double per_char_s = 2.5e-4;
    double knowledge_per_char_s = 1e-5;

    static TimingModel wall() { return {}; }
    static TimingModel simulated() { return {Kind::Simulated}; }
};

struct TranscriptRecord {
    std::string case_id;
    Stage stage = Stage::Detect;
    int call = 0;
    std::string prompt;
    std::string response;
    std::vector<ChatAttempt> attempts;
    double seconds = 0.0;
    std::string error;  // empty on success
};

struct StageTimings {
    double knowledge = 0.0;
    std::optional<double> detect;
    std::optional<double> localize;
    std::optional<double> correct;
    std::optional<double> end_to_end;
    double total = 0.0;
};

struct StagedVerdict {
    std::string case_id;
    std::string report_id;
    std::string mode;
    std::optional<Detection> detection;  // absent if stage 1 failed
    std::optional<std::string> localized_span;
    std::optional<std::string> corrected_text;
    StageTimings timings;
    std::vector<Stage> unparseable;  // stages whose output missed the contract twice
    std::optional<std::string> failed_stage;
    std::string failure;
    std::vector<std::string> events;
    std::vector<TranscriptRecord> transcripts;

    bool unparseable_at(Stage s) const;
};

// Output contracts. Parsers return nullopt when the first non-empty line
// does not follow the stage's format.
std::optional<Detection> parse_detection(std::string_view response);
Detection keyword_detection(std::string_view response);
std::optional<std::string> parse_span(std::string_view response);
std::optional<std::string> parse_correction(std::string_view response);
std::string longest_block(std::string_view response);

// Lower-cased, whitespace-collapsed, surrounding quotes removed.
std::string normalize_span(std::string_view span);

// Differing token region between the input and a rewritten report; empty
// when they match token for token.
std::string diff_span(std::string_view input, std::string_view rewritten);

struct PipelineContext {
    const KnowledgeIndex* index = nullptr;
    const EmbeddingProvider* embedder = nullptr;
    const GraphProvider* annotator = nullptr;
    std::size_t k = kDefaultTopK;
    ScanMode scan = ScanMode::Parallel;
    TimingModel timing;
};

// Knowledge inputs for `mode`, computed once per report. Throws InvalidConfig
// when the context lacks what the mode needs.
KnowledgeInputs gather_knowledge(const RadiologyReport& report, const PipelineMode& mode, const PipelineContext& ctx);

// Never throws for backend or provider failures: they are recorded on the
// verdict and later stages are skipped for this report.
StagedVerdict run_pipeline(const std::string& case_id, const RadiologyReport& report, const PipelineMode& mode,
                           const ChatBackend& backend, const PipelineContext& ctx, const GenerationParams& params = {});

nlohmann::json verdict_to_json(const StagedVerdict& v);  // transcripts excluded
StagedVerdict verdict_from_json(const nlohmann::json& j);
nlohmann::json transcript_to_json(const TranscriptRecord& t);

}  // namespace proofread
