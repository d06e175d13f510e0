#pragma once

#include "proofread/annotate.hpp"
#include "proofread/report.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace proofread {

enum class Strategy { NegationFlip, EntitySubstitution };
enum class SubstitutionCategory { SpeechConfusion, TerminologyAmbiguity, TemplateTerm, OtherCondition };

std::string_view to_string(Strategy s);
std::string_view to_string(SubstitutionCategory c);
std::optional<Strategy> strategy_from_string(std::string_view s);
std::optional<SubstitutionCategory> category_from_string(std::string_view s);

// One contiguous edit. begin/end address the corrupted text; writing
// original_span over [begin, end) restores the source report.
struct ErrorDescriptor {
    Strategy strategy = Strategy::NegationFlip;
    std::optional<SubstitutionCategory> category;  // iff EntitySubstitution
    SectionKind section = SectionKind::Findings;
    std::string original_span;
    std::string corrupted_span;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::uint64_t seed = 0;

    bool operator==(const ErrorDescriptor&) const = default;
};

class SubstitutionLexicon {
public:
    static constexpr std::array<std::string_view, 12> kFindings = {
        "Atelectasis",  "Cardiomegaly",  "Consolidation", "Edema",         "Enlarged Cardiomediastinum",
        "Fracture",     "Lung Lesion",   "Lung Opacity",  "Pleural Effusion", "Pleural Other",
        "Pneumonia",    "Pneumothorax",
    };

    struct Row {
        std::string finding;
        std::string term;  // lower-case
        SubstitutionCategory category;
        std::string replacement;
    };

    // "[Finding]" block headers, then term<TAB>category<TAB>replacement rows.
    // Every one of the 12 findings must appear; throws SchemaMismatch.
    static SubstitutionLexicon parse(std::string_view body);
    static SubstitutionLexicon load(const std::filesystem::path& path);
    static const SubstitutionLexicon& builtin();

    const std::vector<Row>& rows() const { return rows_; }
    std::vector<std::string> terms() const;  // distinct, sorted
    std::map<SubstitutionCategory, std::vector<std::string>> alternatives(std::string_view term) const;
    // Case-insensitive membership of (term, category, replacement).
    bool contains(std::string_view term, SubstitutionCategory category, std::string_view replacement) const;
    std::string digest() const;

private:
    std::vector<Row> rows_;
};

struct BenchmarkCase {
    std::string case_id;
    RadiologyReport original;
    RadiologyReport corrupted;
    std::optional<ErrorDescriptor> descriptor;
};

// Deletes/neutralizes a negation marker scoping a finding, or inserts "no "
// before a positive finding's noun phrase. Throws NoEligibleSite.
BenchmarkCase flip_negation(const RadiologyReport& report, std::uint64_t seed,
                            const GraphLexicon& lexicon = GraphLexicon::builtin());

// Replaces one mention of a lexicon term. Throws NoEligibleSite.
BenchmarkCase substitute_entity(const RadiologyReport& report, const SubstitutionLexicon& lexicon,
                                std::uint64_t seed);

// Reverses the descriptor on the corrupted text.
std::string restore_original(const BenchmarkCase& c);

struct BenchmarkConfig {
    std::size_t n_clean = 512;
    std::size_t n_corrupt = 1110;
    double negation_share = 0.5;
    std::uint64_t master_seed = 0;
};

enum class ExecMode { Serial, Parallel };

struct Benchmark {
    BenchmarkConfig config;
    std::string lexicon_digest;
    std::vector<BenchmarkCase> cases;  // case_id order
    std::vector<std::string> skip_log;
};

// Reports in `excluded_ids` (the reference set) and reports without FINDINGS
// or IMPRESSION never enter either pool. Throws InsufficientCorpus.
Benchmark build_benchmark(std::span<const RadiologyReport> corpus, const SubstitutionLexicon& lexicon,
                          const BenchmarkConfig& config, const std::set<std::string>& excluded_ids = {},
                          ExecMode mode = ExecMode::Parallel, const GraphLexicon& graph_lexicon = GraphLexicon::builtin());

// Line-delimited manifest: version header, then one record per case.
std::string manifest_jsonl(const Benchmark& benchmark);

// Rebuilds cases from a manifest and the corpus it was drawn from.
Benchmark load_manifest(std::string_view manifest, std::span<const RadiologyReport> corpus);

}  // namespace proofread
