#pragma once

#include "proofread/embedding.hpp"
#include "proofread/injection.hpp"
#include "proofread/knowledge_index.hpp"
#include "proofread/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace proofread {

// Case-folded report_model tokens.
std::vector<std::string> metric_tokens(std::string_view text);

// Unigram F1 with clipped counts. 1 when both are empty, 0 when one is.
double rouge1_f(std::span<const std::string> candidate, std::span<const std::string> reference);

inline constexpr double kBleuEpsilon = 1e-9;

// Sentence BLEU up to 4-grams: geometric mean of clipped n-gram precisions
// (zero match counts replaced by kBleuEpsilon) times the brevity penalty.
// The maximum order drops to the candidate length for candidates shorter
// than four tokens.
double bleu(std::span<const std::string> candidate, std::span<const std::string> reference);

// Greedy matching F1 over token vectors: each token takes its best cosine
// on the other side. No idf weighting, no baseline rescaling.
double bertscore_like(std::span<const std::string> candidate, std::span<const std::string> reference,
                      const TokenEmbedder& embedder, ScanMode mode = ScanMode::Parallel);

struct CorrectionScores {
    std::optional<double> rouge1;
    std::optional<double> bertscore_like;
    std::optional<double> bleu;
    std::optional<double> agg_nlg;  // mean of the three over the same subset
    std::size_t n_scored = 0;
};

// Throws MissingVerdict naming the uncovered case_ids.
double score_detection(std::span<const StagedVerdict> verdicts, std::span<const BenchmarkCase> cases);
double score_localization(std::span<const StagedVerdict> verdicts, std::span<const BenchmarkCase> cases);
CorrectionScores score_correction(std::span<const StagedVerdict> verdicts, std::span<const BenchmarkCase> cases,
                                  const TokenEmbedder& embedder);

bool localization_matches(std::string_view predicted, std::string_view truth);

struct TimingStats {
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
    double p90 = 0.0;
    double p95 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

// Linear interpolation between closest ranks; nullopt for no samples.
std::optional<TimingStats> timing_stats(std::span<const double> seconds);
double percentile(std::vector<double> sorted_values, double q);
// Relative reduction from a to b, (a - b) / a.
double reduction(double a, double b);

struct CaseRow {
    std::string case_id;
    bool has_error = false;
    std::optional<Detection> predicted;
    bool detection_correct = false;
    std::optional<bool> localization_correct;  // corrupted cases only
    std::optional<double> rouge1;
    std::optional<double> bertscore_like;
    std::optional<double> bleu;
    double seconds = 0.0;
};

struct MetricReport {
    std::string label;
    std::size_t n_cases = 0;
    std::size_t n_corrupted = 0;
    double detection_accuracy = 0.0;
    std::optional<double> localization_accuracy;
    CorrectionScores correction;
    std::optional<TimingStats> total_time;
    std::optional<TimingStats> detect_time;
    std::optional<TimingStats> localize_time;
    std::optional<TimingStats> correct_time;
    std::optional<TimingStats> knowledge_time;
    std::vector<CaseRow> rows;
    std::vector<std::string> flags;  // e.g. empty correction subset
};

MetricReport evaluate(std::span<const StagedVerdict> verdicts, std::span<const BenchmarkCase> cases,
                      const TokenEmbedder& embedder, std::string label = {});

nlohmann::json report_to_json(const MetricReport& r, bool with_rows = true);

// Table with one column per report. Later columns get a delta against the
// first one.
std::string format_table(std::span<const MetricReport> reports);

}  // namespace proofread
