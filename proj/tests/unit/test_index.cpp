#include "proofread/error.hpp"
#include "proofread/graph_text.hpp"
#include "proofread/knowledge_index.hpp"
#include "proofread/synthetic.hpp"
#include "proofread/text.hpp"

#include "testkit.hpp"

#include <gtest/gtest.h>

using namespace proofread;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Io;
}

}  // namespace

TEST(Embedding, HashingIsUnitNormAndStable) {
    const HashingEmbedder h;
    const auto v = embed("Small left pleural effusion.", h);
    EXPECT_EQ(v.dim(), 256u);
    EXPECT_NEAR(v.norm(), 1.0, 1e-6);
    EXPECT_EQ(v, embed("small LEFT pleural effusion", h));
    EXPECT_EQ(kind_of([&] { embed("  .. ", h); }), ErrorKind::EmptyText);
}

TEST(Embedding, TrigramNeighbours) {
    const TrigramTokenEmbedder t;
    const auto a = t.embed_token("effusion");
    EXPECT_GT(cosine(a, t.embed_token("infusion")), 0.3);
    EXPECT_LT(cosine(a, t.embed_token("pneumothorax")), 0.3);
}

TEST(Index, RetrievalEqualsBruteForce) {
    const auto corpus = synthetic_corpus({300, 5, "ref"});
    const auto queries = synthetic_corpus({25, 99, "q"});
    const HashingEmbedder h;
    const LexiconGraphProvider annot;
    const auto index = build_index(corpus, h, annot);
    ASSERT_EQ(index.entries().size(), corpus.size());
    std::vector<EmbeddingVector> rows;
    for (const auto& e : index.entries()) rows.push_back(e.embedding);
    for (const auto& q : queries) {
        const auto qv = embed(query_text(q, SimilarityBasis::RawText, nullptr), h);
        const auto want = testkit::oracle_top_k(rows, qv, 4);
        for (auto mode : {ScanMode::Serial, ScanMode::Parallel}) {
            const auto got = retrieve(q, index, h, nullptr, 4, mode);
            ASSERT_EQ(got.items.size(), want.size());
            for (std::size_t i = 0; i < want.size(); ++i) {
                EXPECT_EQ(got.items[i].entry.report_id, index.entries()[want[i].first].report_id);
                EXPECT_EQ(got.items[i].score, want[i].second);
            }
        }
    }
}

TEST(Index, EntriesSortedAndKnowledgeStandardized) {
    const auto corpus = synthetic_corpus({40, 2, "ref"});
    const auto index = build_index(corpus, HashingEmbedder(), LexiconGraphProvider());
    for (std::size_t i = 1; i < index.entries().size(); ++i) {
        EXPECT_LT(index.entries()[i - 1].report_id, index.entries()[i].report_id);
    }
    const auto& e = index.entries()[0];
    const auto& src = *std::find_if(corpus.begin(), corpus.end(), [&](const auto& r) { return r.id() == e.report_id; });
    EXPECT_EQ(e.digest, text::sha256_hex(src.text()));
    EXPECT_EQ(e.knowledge, standardize_reference(src, LexiconGraphProvider()));
}

TEST(Index, SerializeRoundTrip) {
    const auto corpus = synthetic_corpus({30, 3, "ref"});
    const auto index = build_index(corpus, HashingEmbedder(), LexiconGraphProvider());
    testkit::TempDir dir;
    index.save(dir / "i.jsonl");
    const auto back = KnowledgeIndex::load(dir / "i.jsonl");
    EXPECT_EQ(back.serialize(), index.serialize());
    EXPECT_EQ(back.header().entry_count, 30u);
    const auto q = corpus[4];
    const auto a = retrieve(q, index, HashingEmbedder(), nullptr);
    const auto b = retrieve(q, back, HashingEmbedder(), nullptr);
    ASSERT_EQ(a.items.size(), b.items.size());
    for (std::size_t i = 0; i < a.items.size(); ++i) {
        EXPECT_EQ(a.items[i].entry.report_id, b.items[i].entry.report_id);
        EXPECT_EQ(a.items[i].score, b.items[i].score);
    }
    EXPECT_EQ(a.items[0].entry.report_id, q.id());
}

TEST(Index, BuildErrors) {
    const HashingEmbedder h;
    const LexiconGraphProvider a;
    EXPECT_EQ(kind_of([&] { build_index(std::vector<RadiologyReport>{}, h, a); }), ErrorKind::EmptyInput);
    std::vector<RadiologyReport> dup{parse_report("FINDINGS: a.", "x"), parse_report("FINDINGS: b.", "x")};
    EXPECT_EQ(kind_of([&] { build_index(dup, h, a); }), ErrorKind::DuplicateId);
}

TEST(Index, ChunkText) {
    EXPECT_EQ(chunk_text("abcdefghij", 4, 1), (std::vector<std::string>{"abcd", "defg", "ghij"}));
    EXPECT_EQ(chunk_text("abc", 10, 2), (std::vector<std::string>{"abc"}));
    EXPECT_EQ(chunk_text("abcdefg", 3, 0), (std::vector<std::string>{"abc", "def", "g"}));
    // Code points, not bytes.
    EXPECT_EQ(chunk_text("\xc3\xa9\xc3\xa9\xc3\xa9", 2, 1), (std::vector<std::string>{"\xc3\xa9\xc3\xa9", "\xc3\xa9\xc3\xa9"}));
    EXPECT_EQ(kind_of([] { chunk_text("abc", 3, 3); }), ErrorKind::InvalidChunkParams);
    EXPECT_EQ(kind_of([] { chunk_text("abc", 0, 0); }), ErrorKind::InvalidChunkParams);
}

TEST(Index, ChunkRetrievalCoversCorpus) {
    const auto corpus = synthetic_corpus({20, 8, "ref"});
    BuildOptions o;
    o.chunk_size = 80;
    o.chunk_overlap = 10;
    const auto index = build_index(corpus, HashingEmbedder(), LexiconGraphProvider(), o);
    EXPECT_GT(index.chunks().size(), corpus.size());
    const auto hits = retrieve_chunks(corpus[0], index, HashingEmbedder(), 3);
    ASSERT_EQ(hits.size(), 3u);
    EXPECT_GE(hits[0].score, hits[1].score);
    EXPECT_GE(hits[1].score, hits[2].score);
}
