#include "proofread/graph_text.hpp"

#include "testkit.hpp"

#include <gtest/gtest.h>

using namespace proofread;

class GraphTextGolden : public ::testing::TestWithParam<testkit::Golden> {};

TEST_P(GraphTextGolden, Renders) {
    const auto& g = GetParam();
    EXPECT_EQ(graph_to_text(testkit::make_graph(g.entities, g.relations)), g.expected);
}

INSTANTIATE_TEST_SUITE_P(Goldens, GraphTextGolden, ::testing::ValuesIn(testkit::graph_goldens()),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(GraphText, EmptyGraph) { EXPECT_TRUE(graph_to_text(EntityGraph{}).empty()); }

TEST(GraphText, PhrasesCarryRegion) {
    using testkit::E;
    using testkit::R;
    const auto g = testkit::make_graph(
        {{"1", "lobe", EntityCategory::Anat, Certainty::DP}, {"2", "opacity", EntityCategory::Obs, Certainty::DP},
         {"3", "edema", EntityCategory::Obs, Certainty::DA}},
        {{"2", RelationKind::LocatedAt, "1"}});
    const auto p = render_phrases(g);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0].region_id, "1");
    EXPECT_EQ(p[0].root_id, "2");
    EXPECT_EQ(p[1].region_id, kGlobalRegion);
}

TEST(GraphText, SuggestiveTargetWithItsOwnModifierStaysAbsorbed) {
    const auto g = testkit::make_graph(
        {{"1", "opacity", EntityCategory::Obs, Certainty::DP}, {"2", "lobar", EntityCategory::Obs, Certainty::DP},
         {"3", "pneumonia", EntityCategory::Obs, Certainty::DP}},
        {{"1", RelationKind::SuggestiveOf, "3"}, {"2", RelationKind::Modify, "3"}});
    EXPECT_EQ(graph_to_text(g), (std::vector<std::string>{"opacity suggestive of lobar pneumonia"}));
}

TEST(GraphText, StandardizeReferenceUsesAnnotator) {
    const auto r = parse_report("FINDINGS: Small left pleural effusion. No pneumothorax.");
    const auto s = standardize_reference(r, LexiconGraphProvider());
    ASSERT_FALSE(s.empty());
    EXPECT_NE(s[0].find("effusion"), std::string::npos);
}
