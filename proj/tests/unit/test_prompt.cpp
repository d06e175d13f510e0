#include "proofread/error.hpp"
#include "proofread/prompt.hpp"

#include <gtest/gtest.h>

using namespace proofread;

namespace {

const RadiologyReport& report() {
    static const auto r = parse_report("FINDINGS: No pleural effusion.\nIMPRESSION: Normal chest.", "r1");
    return r;
}

KnowledgeInputs inputs_for(const PipelineMode& m) {
    KnowledgeInputs k;
    if (m.uses_mkgd()) k.mkgd_sentences = std::vector<std::string>{"no pleural effusion"};
    if (m.uses_exkr()) k.references = std::vector<ReferenceSummary>{{"ref-1", 0.91, {"no pneumothorax"}}};
    if (m.uses_chunks()) k.chunks = std::vector<ChunkExcerpt>{{"ref-2", 0, 0.5, "FINDINGS: Clear lungs."}};
    return k;
}

std::vector<PipelineMode> all_modes() {
    std::vector<PipelineMode> out;
    for (auto s : {InferenceStrategy::EndToEnd, InferenceStrategy::Staged}) {
        for (auto k : {KnowledgeMode::None, KnowledgeMode::MkgdOnly, KnowledgeMode::ExkrOnly,
                       KnowledgeMode::MkgdAndExkr, KnowledgeMode::SimpleRag}) {
            out.push_back({s, k});
        }
    }
    return out;
}

}  // namespace

TEST(Prompt, ModeLabelsRoundTrip) {
    for (const auto& m : all_modes()) EXPECT_EQ(PipelineMode::parse(m.label()), m);
    EXPECT_EQ(PipelineMode{}.label(), "STAGED/MKGD_AND_EXKR");
    EXPECT_FALSE(PipelineMode::parse("STAGED"));
    EXPECT_FALSE(PipelineMode::parse("STAGED/BOTH"));
}

TEST(Prompt, FourHeadersInOrder) {
    for (const auto& m : all_modes()) {
        for (auto st : {Stage::Detect, Stage::Localize, Stage::Correct, Stage::EndToEnd}) {
            const auto text = build_prompt(st, report(), m, inputs_for(m)).render();
            const auto a = text.find("### ROLE\n");
            const auto b = text.find("\n### TASK\n");
            const auto c = text.find("\n### KNOWLEDGE\n");
            const auto d = text.find("\n### OUTPUT FORMAT\n");
            EXPECT_EQ(a, 0u);
            EXPECT_LT(b, c);
            EXPECT_LT(c, d);
            EXPECT_NE(d, std::string::npos);
        }
    }
}

TEST(Prompt, ParseInvertsRender) {
    for (const auto& m : all_modes()) {
        const auto p = build_prompt(Stage::Correct, report(), m, inputs_for(m), {"ERROR", "no pleural effusion"});
        EXPECT_EQ(parse_prompt(p.render()), p);
    }
    // A report that itself contains a header line still parses.
    const auto odd = parse_report("FINDINGS: x\n### KNOWLEDGE\ny");
    const PipelineMode none{InferenceStrategy::Staged, KnowledgeMode::None};
    const auto p = build_prompt(Stage::Detect, odd, none, {});
    EXPECT_EQ(parse_prompt(p.render()), p);
    EXPECT_THROW(parse_prompt("no headers"), Error);
}

TEST(Prompt, KnowledgeHeadingsFollowTheArm) {
    for (const auto& m : all_modes()) {
        const auto k = build_prompt(Stage::Detect, report(), m, inputs_for(m)).knowledge_block;
        EXPECT_EQ(k.find(kMkgdHeading) != std::string::npos, m.uses_mkgd()) << m.label();
        EXPECT_EQ(k.find(kReferenceHeading) != std::string::npos, m.uses_exkr()) << m.label();
        EXPECT_EQ(k.find(kChunkHeading) != std::string::npos, m.uses_chunks()) << m.label();
        if (m.knowledge == KnowledgeMode::None) {
            EXPECT_TRUE(k.empty());
        }
    }
}

TEST(Prompt, InconsistentInputsRejected) {
    const PipelineMode mkgd{InferenceStrategy::Staged, KnowledgeMode::MkgdOnly};
    try {
        build_prompt(Stage::Detect, report(), mkgd, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InconsistentKnowledgeInputs);
    }
    const PipelineMode none{InferenceStrategy::Staged, KnowledgeMode::None};
    EXPECT_THROW(build_prompt(Stage::Detect, report(), none, inputs_for(mkgd)), Error);
}

TEST(Prompt, TaskCarriesReportAndPriorOutputs) {
    const PipelineMode none{InferenceStrategy::Staged, KnowledgeMode::None};
    const auto p = build_prompt(Stage::Correct, report(), none, {}, {"ERROR", "no pleural effusion"});
    EXPECT_NE(p.task_instructions.find("REPORT:\n" + report().text()), std::string::npos);
    EXPECT_NE(p.task_instructions.find("no pleural effusion"), std::string::npos);
    EXPECT_NE(p.output_format_spec.find("CORRECTED_REPORT:"), std::string::npos);
    EXPECT_NE(build_prompt(Stage::Detect, report(), none, {}).output_format_spec.find("ANSWER: YES"),
              std::string::npos);
    EXPECT_NE(reminder_suffix(Stage::Localize).find("SPAN:"), std::string::npos);
}
