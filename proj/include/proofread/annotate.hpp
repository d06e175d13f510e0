#pragma once

#include "proofread/graph.hpp"
#include "proofread/report.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace proofread {

// Term tables for the rule-based fallback extractor. Each term is stored as
// its token sequence so multi-word entries ("absence of") match greedily.
struct GraphLexicon {
    std::vector<std::vector<std::string>> anatomy;
    std::vector<std::vector<std::string>> observations;
    std::vector<std::vector<std::string>> modifiers;
    std::vector<std::vector<std::string>> negation;
    std::vector<std::vector<std::string>> hedging;
    std::vector<std::vector<std::string>> suggestive;

    // Plain text: "[anatomy]" / "[observation]" / "[modifier]" / "[negation]" /
    // "[hedge]" / "[suggestive]" headers, one term per line, '#' comments.
    static GraphLexicon parse(std::string_view text);
    static GraphLexicon load(const std::filesystem::path& path);
    static const GraphLexicon& builtin();
};

// Rule-based extraction over FINDINGS/IMPRESSION bodies (all sections when
// neither exists). Certainty comes from the nearest preceding negation or
// hedging marker in the same sentence.
EntityGraph extract_graph_lexicon(const RadiologyReport& report, const GraphLexicon& lexicon);

struct IngestResult {
    EntityGraph graph;
    std::vector<std::string> unresolved;  // entities whose token text did not match the report
};

// RadGraph-style record: {"entities": {"<id>": {"tokens", "label", "start_ix",
// "end_ix", "relations": [[kind, target], ...]}}}, optionally wrapped in a
// single document key. Token indices address report.document_tokens().
// Throws SchemaMismatch / DanglingRelation.
IngestResult ingest_annotations(const nlohmann::json& record, const RadiologyReport& report);

class GraphProvider {
public:
    virtual ~GraphProvider() = default;
    virtual std::string id() const = 0;
    virtual EntityGraph annotate(const RadiologyReport& report) const = 0;
};

class LexiconGraphProvider final : public GraphProvider {
public:
    LexiconGraphProvider() : lexicon_(GraphLexicon::builtin()) {}
    explicit LexiconGraphProvider(GraphLexicon lexicon) : lexicon_(std::move(lexicon)) {}

    std::string id() const override { return "lexicon"; }
    EntityGraph annotate(const RadiologyReport& report) const override {
        return extract_graph_lexicon(report, lexicon_);
    }

private:
    GraphLexicon lexicon_;
};

// Serves pre-computed annotator output keyed by report_id; reports without
// a record go to the fallback provider, or fail with SchemaMismatch.
class AnnotationStoreProvider final : public GraphProvider {
public:
    AnnotationStoreProvider(std::map<std::string, nlohmann::json> records,
                            std::shared_ptr<const GraphProvider> fallback = nullptr)
        : records_(std::move(records)), fallback_(std::move(fallback)) {}

    // JSON object keyed by report_id, or JSONL of {"report_id", "annotation"}.
    static AnnotationStoreProvider load(const std::filesystem::path& path,
                                        std::shared_ptr<const GraphProvider> fallback = nullptr);

    std::string id() const override { return "annotations"; }
    EntityGraph annotate(const RadiologyReport& report) const override;

private:
    std::map<std::string, nlohmann::json> records_;
    std::shared_ptr<const GraphProvider> fallback_;
};

}  // namespace proofread
