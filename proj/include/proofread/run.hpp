#pragma once

#include "proofread/chat_backend.hpp"
#include "proofread/embedding.hpp"
#include "proofread/injection.hpp"
#include "proofread/knowledge_index.hpp"
#include "proofread/metrics.hpp"
#include "proofread/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace proofread {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kArtifactVersion = 1;

struct BackendSpec {
    std::string kind = "oracle";  // oracle | echo | fuzz | scripted | http
    std::string endpoint;
    std::string model;
    std::string api_key_env = "PROOFREAD_API_KEY";  // the key itself is never stored
    std::string script;                             // JSON array of responses, for "scripted"
    std::uint64_t fuzz_seed = 0;
    double fuzz_failure_rate = 0.02;
    int timeout_ms = 60000;
    int max_attempts = 4;
};

struct EmbedderSpec {
    std::string kind = "hashing";  // hashing | http
    std::size_t dim = 256;
    std::string endpoint;
    std::string api_key_env = "PROOFREAD_EMBED_API_KEY";
};

struct RunConfig {
    std::string evaluation_corpus;
    std::string manifest;
    std::string reference_corpus;  // indexed on the fly when no index is given
    std::string index;
    std::string annotations;
    PipelineMode mode;
    BackendSpec backend;
    EmbedderSpec embedder;
    GenerationParams params;
    SimilarityBasis basis = SimilarityBasis::RawText;
    std::size_t k = kDefaultTopK;
    std::uint64_t seed = 0;
    std::size_t concurrency = 1;
    std::string timing = "auto";  // auto | wall | simulated
    std::string output_dir;       // not part of the snapshot

    void validate() const;  // throws InvalidConfig / Io naming the offending field
};

// Declarative form; unknown keys are rejected.
nlohmann::json config_to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

// A directory of *.txt files (id = file stem) or a JSONL file of
// {"report_id", "text"} records.
std::vector<RadiologyReport> load_corpus(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view body);

// First line of every artifact file.
nlohmann::json artifact_header(std::string_view kind);

std::unique_ptr<EmbeddingProvider> make_embedder(const EmbedderSpec& spec);
std::unique_ptr<GraphProvider> make_annotator(const std::string& annotations_path);

struct RunOptions {
    bool resume = false;
    std::optional<std::size_t> stop_after;  // write this many new verdicts, then stop
    std::ostream* log = nullptr;
};

struct RunOutcome {
    std::filesystem::path dir;
    std::size_t written = 0;  // verdicts produced by this invocation
    std::size_t total = 0;
    bool complete = false;
    std::optional<MetricReport> metrics;
};

// Artifact files in the output directory: config.jsonl, verdicts.jsonl,
// transcripts.jsonl, metrics.jsonl, artifact.jsonl.
RunOutcome run_experiment(const RunConfig& config, const RunOptions& options = {});

// Recomputes the metric report of a finished run directory.
MetricReport evaluate_artifact(const std::filesystem::path& dir);

// Exit status per error family.
int exit_code_for(ErrorKind kind);

}  // namespace proofread
