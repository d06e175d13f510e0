#include "proofread/error.hpp"
#include "proofread/injection.hpp"
#include "proofread/synthetic.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

using namespace proofread;

namespace {

// Every finding block present, only the rows under test can match.
SubstitutionLexicon narrow_lexicon(const std::string& rows) {
    std::string body;
    for (auto f : SubstitutionLexicon::kFindings) {
        body += "[" + std::string(f) + "]\nzzz" + std::to_string(body.size()) + "\tOTHER_CONDITION\tqqq\n";
    }
    return SubstitutionLexicon::parse(body + "[Pleural Effusion]\n" + rows);
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Io;
}

}  // namespace

TEST(Negation, DeletesMarker) {
    const auto r = parse_report("FINDINGS: No pleural effusion.", "r");
    const auto c = flip_negation(r, 1);
    EXPECT_EQ(c.corrupted.text(), "FINDINGS: Pleural effusion.");
    ASSERT_TRUE(c.descriptor);
    EXPECT_EQ(c.descriptor->strategy, Strategy::NegationFlip);
    EXPECT_EQ(c.descriptor->original_span, "No pleural effusion");
    EXPECT_EQ(c.descriptor->corrupted_span, "Pleural effusion");
    EXPECT_EQ(c.descriptor->section, SectionKind::Findings);
    EXPECT_EQ(restore_original(c), r.text());
}

TEST(Negation, LowerCaseMarkerMidSentence) {
    const auto r = parse_report("IMPRESSION: Clear lungs with no pleural effusion.", "r");
    const auto c = flip_negation(r, 0);
    EXPECT_EQ(c.corrupted.text(), "IMPRESSION: Clear lungs with pleural effusion.");
}

TEST(Negation, InsertsBeforeNounPhrase) {
    const auto r = parse_report("FINDINGS: Pleural effusion.", "r");
    const auto c = flip_negation(r, 3);
    EXPECT_EQ(c.corrupted.text(), "FINDINGS: No pleural effusion.");
    EXPECT_EQ(restore_original(c), r.text());
}

TEST(Negation, WithoutBecomesWith) {
    const auto r = parse_report("FINDINGS: Lungs are clear without consolidation.", "r");
    const auto c = flip_negation(r, 0);
    EXPECT_EQ(c.corrupted.text(), "FINDINGS: Lungs are clear with consolidation.");
}

TEST(Negation, NoEligibleSite) {
    const auto r = parse_report("FINDINGS: The lungs are clear.\nIMPRESSION: Normal.", "r");
    EXPECT_EQ(kind_of([&] { flip_negation(r, 0); }), ErrorKind::NoEligibleSite);
    const auto other = parse_report("INDICATION: No pleural effusion?", "r");
    EXPECT_EQ(kind_of([&] { flip_negation(other, 0); }), ErrorKind::NoEligibleSite);
}

TEST(Substitution, SpeechConfusionKeepsCase) {
    const auto lex = narrow_lexicon("effusion\tSPEECH_CONFUSION\tinfusion\n");
    const auto r = parse_report("FINDINGS: Effusion is small.", "r");
    const auto c = substitute_entity(r, lex, 5);
    EXPECT_EQ(c.corrupted.text(), "FINDINGS: Infusion is small.");
    EXPECT_EQ(c.descriptor->category, SubstitutionCategory::SpeechConfusion);
    EXPECT_EQ(restore_original(c), r.text());
}

TEST(Substitution, TemplateAndTerminologyExamples) {
    const auto lex = narrow_lexicon(
        "cardiac enlargement\tTEMPLATE_TERM\tcardiomegaly\ncongestion\tTERMINOLOGY_AMBIGUITY\tconsolidation\n");
    const auto a = substitute_entity(parse_report("IMPRESSION: Mild cardiac enlargement.", "a"), lex, 0);
    EXPECT_EQ(a.corrupted.text(), "IMPRESSION: Mild cardiomegaly.");
    EXPECT_EQ(a.descriptor->category, SubstitutionCategory::TemplateTerm);
    const auto b = substitute_entity(parse_report("FINDINGS: Vascular congestion.", "b"), lex, 0);
    EXPECT_EQ(b.corrupted.text(), "FINDINGS: Vascular consolidation.");
    EXPECT_EQ(b.descriptor->category, SubstitutionCategory::TerminologyAmbiguity);
}

TEST(Substitution, WholeWordOnlyAndInScope) {
    const auto lex = narrow_lexicon("effusion\tSPEECH_CONFUSION\tinfusion\n");
    EXPECT_EQ(kind_of([&] { substitute_entity(parse_report("FINDINGS: Effusions absent.", "r"), lex, 0); }),
              ErrorKind::NoEligibleSite);
    EXPECT_EQ(kind_of([&] { substitute_entity(parse_report("INDICATION: effusion.", "r"), lex, 0); }),
              ErrorKind::NoEligibleSite);
}

TEST(Substitution, BuiltinPairsAreCategorySound) {
    const auto& lex = SubstitutionLexicon::builtin();
    const auto corpus = synthetic_corpus({200, 17});
    int made = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        try {
            const auto c = substitute_entity(corpus[i], lex, i);
            const auto& d = *c.descriptor;
            EXPECT_TRUE(lex.contains(d.original_span, *d.category, d.corrupted_span))
                << d.original_span << " -> " << d.corrupted_span;
            EXPECT_EQ(restore_original(c), corpus[i].text());
            ++made;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::NoEligibleSite);
        }
    }
    EXPECT_GT(made, 150);
}

TEST(Lexicon, ParseRejectsBadInput) {
    EXPECT_EQ(kind_of([] { SubstitutionLexicon::parse("[Atelectasis]\natelectasis\tOTHER_CONDITION\tx\n"); }),
              ErrorKind::SchemaMismatch);
    EXPECT_EQ(kind_of([] { narrow_lexicon("effusion\tWRONG\tx\n"); }), ErrorKind::SchemaMismatch);
    EXPECT_EQ(kind_of([] { narrow_lexicon("effusion\tSPEECH_CONFUSION\teffusion\n"); }), ErrorKind::SchemaMismatch);
    EXPECT_EQ(SubstitutionLexicon::builtin().digest().size(), 64u);
}

TEST(Benchmark, SizesAndSingleEdit) {
    const auto corpus = synthetic_corpus({400, 21});
    const auto b = build_benchmark(corpus, SubstitutionLexicon::builtin(), {60, 140, 0.5, 8});
    ASSERT_EQ(b.cases.size(), 200u);
    std::size_t corrupt = 0, negation = 0;
    for (const auto& c : b.cases) {
        if (!c.descriptor) {
            EXPECT_EQ(c.original.text(), c.corrupted.text());
            continue;
        }
        ++corrupt;
        if (c.descriptor->strategy == Strategy::NegationFlip) ++negation;
        EXPECT_EQ(restore_original(c), c.original.text());
        EXPECT_NE(c.descriptor->section, SectionKind::Other);
        const auto& t = c.corrupted.text();
        EXPECT_EQ(t.substr(c.descriptor->begin, c.descriptor->end - c.descriptor->begin), c.descriptor->corrupted_span);
    }
    EXPECT_EQ(corrupt, 140u);
    EXPECT_GT(negation, 40u);
    EXPECT_LT(negation, 100u);
}

TEST(Benchmark, SerialEqualsParallelAndSeedMatters) {
    const auto corpus = synthetic_corpus({300, 4});
    const BenchmarkConfig cfg{40, 90, 0.5, 77};
    const auto a = build_benchmark(corpus, SubstitutionLexicon::builtin(), cfg, {}, ExecMode::Serial);
    const auto b = build_benchmark(corpus, SubstitutionLexicon::builtin(), cfg, {}, ExecMode::Parallel);
    EXPECT_EQ(manifest_jsonl(a), manifest_jsonl(b));
    auto other = cfg;
    other.master_seed = 78;
    EXPECT_NE(manifest_jsonl(build_benchmark(corpus, SubstitutionLexicon::builtin(), other)), manifest_jsonl(a));
}

TEST(Benchmark, ExcludedIdsNeverSampled) {
    const auto corpus = synthetic_corpus({120, 6});
    std::set<std::string> excluded;
    for (std::size_t i = 0; i < 60; ++i) excluded.insert(corpus[i].id());
    const auto b = build_benchmark(corpus, SubstitutionLexicon::builtin(), {10, 20, 0.5, 1}, excluded);
    for (const auto& c : b.cases) EXPECT_FALSE(excluded.count(c.original.id()));
}

TEST(Benchmark, InsufficientCorpus) {
    const auto corpus = synthetic_corpus({30, 6});
    EXPECT_EQ(kind_of([&] { build_benchmark(corpus, SubstitutionLexicon::builtin(), {20, 20, 0.5, 1}); }),
              ErrorKind::InsufficientCorpus);
}

TEST(Benchmark, ManifestRoundTrip) {
    const auto corpus = synthetic_corpus({200, 12});
    const auto b = build_benchmark(corpus, SubstitutionLexicon::builtin(), {30, 60, 0.5, 3});
    const auto text = manifest_jsonl(b);
    const auto header = nlohmann::json::parse(text.substr(0, text.find('\n')));
    EXPECT_EQ(header["n_clean"], 30);
    EXPECT_EQ(header["n_corrupt"], 60);
    EXPECT_EQ(header["lexicon_digest"], SubstitutionLexicon::builtin().digest());
    const auto back = load_manifest(text, corpus);
    EXPECT_EQ(manifest_jsonl(back), text);
    ASSERT_EQ(back.cases.size(), b.cases.size());
    for (std::size_t i = 0; i < b.cases.size(); ++i) {
        EXPECT_EQ(back.cases[i].corrupted.text(), b.cases[i].corrupted.text());
        EXPECT_EQ(back.cases[i].descriptor, b.cases[i].descriptor);
    }
}

TEST(Benchmark, ManifestAgainstWrongCorpusFails) {
    const auto corpus = synthetic_corpus({200, 12});
    const auto b = build_benchmark(corpus, SubstitutionLexicon::builtin(), {30, 60, 0.5, 3});
    const auto other = synthetic_corpus({200, 13});
    EXPECT_THROW(load_manifest(manifest_jsonl(b), other), Error);
}
