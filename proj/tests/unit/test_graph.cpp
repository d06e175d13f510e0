#include "proofread/annotate.hpp"
#include "proofread/error.hpp"
#include "proofread/graph.hpp"
#include "proofread/graph_text.hpp"

#include "testkit.hpp"

#include <gtest/gtest.h>

using namespace proofread;

namespace {

ErrorKind build_error(GraphBuilder b) {
    try {
        std::move(b).build();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Io;  // sentinel: no error
}

nlohmann::json rels(const char* kind, const char* target) {
    return nlohmann::json::array({nlohmann::json::array({kind, target})});
}

Entity ent(std::string id, std::string text, EntityCategory c, Certainty k, std::size_t at = 0) {
    return {std::move(id), text, at, at + text.size(), c, k};
}

}  // namespace

TEST(Graph, LabelsRoundTrip) {
    for (const char* l : {"ANAT-DP", "OBS-DP", "OBS-U", "OBS-DA"}) {
        const auto p = parse_label(l);
        ASSERT_TRUE(p);
        EXPECT_EQ(label_of(p->first, p->second), l);
    }
    EXPECT_FALSE(parse_label("ANAT-DA"));
    EXPECT_FALSE(parse_label("OBS"));
}

TEST(Graph, BuilderRejectsDanglingRelation) {
    GraphBuilder b;
    b.add_entity(ent("1", "opacity", EntityCategory::Obs, Certainty::DP));
    b.add_relation({"1", "9", RelationKind::LocatedAt});
    EXPECT_EQ(build_error(std::move(b)), ErrorKind::DanglingRelation);
}

TEST(Graph, BuilderRejectsUncertainAnatomy) {
    GraphBuilder b;
    b.add_entity(ent("1", "lung", EntityCategory::Anat, Certainty::U));
    EXPECT_EQ(build_error(std::move(b)), ErrorKind::InvalidGraph);
}

TEST(Graph, BuilderRejectsLocatedAtIntoObservation) {
    GraphBuilder b;
    b.add_entity(ent("1", "opacity", EntityCategory::Obs, Certainty::DP));
    b.add_entity(ent("2", "effusion", EntityCategory::Obs, Certainty::DP, 8));
    b.add_relation({"1", "2", RelationKind::LocatedAt});
    EXPECT_EQ(build_error(std::move(b)), ErrorKind::InvalidGraph);
}

TEST(Graph, BuilderRejectsModifyCycleAndSelfLoop) {
    GraphBuilder a;
    a.add_entity(ent("1", "mild", EntityCategory::Obs, Certainty::DP));
    a.add_entity(ent("2", "edema", EntityCategory::Obs, Certainty::DP, 5));
    a.add_relation({"1", "2", RelationKind::Modify});
    a.add_relation({"2", "1", RelationKind::Modify});
    EXPECT_EQ(build_error(std::move(a)), ErrorKind::InvalidGraph);

    GraphBuilder s;
    s.add_entity(ent("1", "edema", EntityCategory::Obs, Certainty::DP));
    s.add_relation({"1", "1", RelationKind::SuggestiveOf});
    EXPECT_EQ(build_error(std::move(s)), ErrorKind::InvalidGraph);
}

TEST(Graph, DuplicateTriplesCollapse) {
    GraphBuilder b;
    b.add_entity(ent("1", "lobe", EntityCategory::Anat, Certainty::DP));
    b.add_entity(ent("2", "opacity", EntityCategory::Obs, Certainty::DP, 5));
    b.add_relation({"2", "1", RelationKind::LocatedAt});
    b.add_relation({"2", "1", RelationKind::LocatedAt});
    const auto g = std::move(b).build();
    EXPECT_EQ(g.relations().size(), 1u);
    EXPECT_EQ(g.outgoing("2", RelationKind::LocatedAt).size(), 1u);
    EXPECT_EQ(g.incoming("1", RelationKind::LocatedAt).size(), 1u);
}

TEST(Extraction, NegatedFinding) {
    const auto r = parse_report("FINDINGS: No pleural effusion.");
    const auto g = extract_graph_lexicon(r, GraphLexicon::builtin());
    EXPECT_EQ(graph_to_text(g), (std::vector<std::string>{"no pleural effusion"}));
    const auto* eff = &g.entities().back();
    EXPECT_EQ(eff->text, "effusion");
    EXPECT_EQ(eff->certainty, Certainty::DA);
    EXPECT_EQ(r.slice(eff->start, eff->end), "effusion");
}

TEST(Extraction, LocatedOpacity) {
    const auto r = parse_report("FINDINGS: Left lower lobe opacity.");
    EXPECT_EQ(graph_to_text(extract_graph_lexicon(r, GraphLexicon::builtin())),
              (std::vector<std::string>{"left lower lobe opacity"}));
}

TEST(Extraction, HedgedFinding) {
    const auto r = parse_report("IMPRESSION: Possible pneumonia.");
    EXPECT_EQ(graph_to_text(extract_graph_lexicon(r, GraphLexicon::builtin())),
              (std::vector<std::string>{"possible pneumonia"}));
}

TEST(Extraction, OtherSectionsIgnoredWhenFindingsExist) {
    const auto r = parse_report("INDICATION: Pneumonia?\nFINDINGS: No pneumothorax.");
    const auto g = extract_graph_lexicon(r, GraphLexicon::builtin());
    ASSERT_EQ(g.entities().size(), 1u);
    EXPECT_EQ(g.entities()[0].text, "pneumothorax");
}

TEST(Extraction, LexiconParse) {
    const auto lex = GraphLexicon::parse("# c\n[anatomy]\nlung\n[observation]\nair bronchogram\n[negation]\nno\n");
    ASSERT_EQ(lex.observations.size(), 1u);
    EXPECT_EQ(lex.observations[0], (std::vector<std::string>{"air", "bronchogram"}));
    const auto r = parse_report("FINDINGS: No air bronchogram in the lung.");
    const auto g = extract_graph_lexicon(r, lex);
    ASSERT_GE(g.entities().size(), 1u);
    EXPECT_EQ(g.entities()[0].text, "air bronchogram");
    EXPECT_EQ(g.entities()[0].certainty, Certainty::DA);
}

TEST(Ingest, RadGraphRecord) {
    const auto r = parse_report("FINDINGS: Lower lobe opacity.");
    // document tokens: findings : lower lobe opacity .
    const nlohmann::json rec = {
        {"doc", {{"entities", {
            {"1", {{"tokens", "Lower"}, {"label", "ANAT-DP"}, {"start_ix", 2}, {"end_ix", 2},
                   {"relations", rels("modify", "2")}}},
            {"2", {{"tokens", "lobe"}, {"label", "ANAT-DP"}, {"start_ix", 3}, {"end_ix", 3},
                   {"relations", nlohmann::json::array()}}},
            {"3", {{"tokens", "opacity"}, {"label", "OBS-DP"}, {"start_ix", 4}, {"end_ix", 4},
                   {"relations", rels("located_at", "2")}}},
        }}}}};
    const auto res = ingest_annotations(rec, r);
    EXPECT_TRUE(res.unresolved.empty());
    EXPECT_EQ(graph_to_text(res.graph), (std::vector<std::string>{"lower lobe opacity"}));
}

TEST(Ingest, SchemaAndDanglingErrors) {
    const auto r = parse_report("FINDINGS: opacity.");
    auto kind_of = [&](const nlohmann::json& j) {
        try {
            ingest_annotations(j, r);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    EXPECT_EQ(kind_of({{"entities", {{"1", {{"tokens", "opacity"}, {"label", "BAD"}, {"start_ix", 2},
                                            {"end_ix", 2}, {"relations", nlohmann::json::array()}}}}}}),
              ErrorKind::SchemaMismatch);
    EXPECT_EQ(kind_of({{"entities", {{"1", {{"tokens", "opacity"}, {"label", "OBS-DP"}, {"start_ix", 2},
                                            {"end_ix", 2}, {"relations", rels("modify", "7")}}}}}}),
              ErrorKind::DanglingRelation);
    EXPECT_EQ(kind_of({{"entities", {{"1", {{"tokens", "opacity"}, {"label", "OBS-DP"}, {"start_ix", 40},
                                            {"end_ix", 41}, {"relations", nlohmann::json::array()}}}}}}),
              ErrorKind::SchemaMismatch);
}

TEST(Ingest, StoreFallsBack) {
    auto fallback = std::make_shared<LexiconGraphProvider>();
    AnnotationStoreProvider store({}, fallback);
    const auto r = parse_report("FINDINGS: No pneumothorax.", "x");
    EXPECT_EQ(graph_to_text(store.annotate(r)), (std::vector<std::string>{"no pneumothorax"}));
    AnnotationStoreProvider strict({});
    EXPECT_THROW(strict.annotate(r), Error);
}
