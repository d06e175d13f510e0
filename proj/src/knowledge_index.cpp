#include "proofread/knowledge_index.hpp"

#include "proofread/error.hpp"
#include "proofread/graph_text.hpp"
#include "proofread/kernels.hpp"
#include "proofread/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <exception>
#include <fstream>
#include <future>
#include <numeric>
#include <set>
#include <sstream>

namespace proofread {

std::string_view to_string(SimilarityBasis basis) {
    return basis == SimilarityBasis::RawText ? "raw_text" : "standardized";
}

std::optional<SimilarityBasis> similarity_basis_from_string(std::string_view s) {
    if (s == "raw_text") return SimilarityBasis::RawText;
    if (s == "standardized") return SimilarityBasis::Standardized;
    return std::nullopt;
}

namespace {

std::vector<float> pack(std::size_t dim, std::size_t n, auto&& vector_at) {
    std::vector<float> rows;
    rows.reserve(dim * n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = vector_at(i).values();
        if (v.size() != dim) fail(ErrorKind::SchemaMismatch, "embedding dimension does not match index header");
        rows.insert(rows.end(), v.begin(), v.end());
    }
    return rows;
}

bool has_word_token(std::string_view s) {
    for (const auto& t : tokenize(s)) {
        if (!(t.size() == 1 && text::is_punct(t.normalized[0]))) return true;
    }
    return false;
}

std::string join_sentences(const std::vector<std::string>& sentences) {
    std::string out;
    for (const auto& s : sentences) {
        if (!out.empty()) out += ". ";
        out += s;
    }
    return out;
}

[[noreturn]] void rethrow_for(const std::string& report_id, const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        throw Error(err->kind(), "report '" + report_id + "': " + err->what());
    }
    throw Error(ErrorKind::ProviderUnavailable, "report '" + report_id + "': " + e.what());
}

// Embeds texts in batches with at most `in_flight` batches outstanding;
// results land at their input positions regardless of completion order.
std::vector<EmbeddingVector> embed_all(const std::vector<std::string>& texts, const std::vector<std::string>& owners,
                                       const EmbeddingProvider& provider, const BuildOptions& options) {
    const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
    const std::size_t in_flight = std::max<std::size_t>(1, options.max_in_flight);
    const std::size_t n_batches = (texts.size() + batch - 1) / batch;
    std::vector<EmbeddingVector> out(texts.size());

    auto run_batch = [&](std::size_t b) {
        const std::size_t lo = b * batch;
        const std::size_t hi = std::min(texts.size(), lo + batch);
        std::span<const std::string> slice(texts.data() + lo, hi - lo);
        try {
            auto vecs = provider.embed_batch(slice);
            if (vecs.size() != slice.size()) fail(ErrorKind::ProviderUnavailable, "provider returned wrong count");
            for (std::size_t i = 0; i < vecs.size(); ++i) out[lo + i] = std::move(vecs[i]);
        } catch (const std::exception&) {
            // Pin the failure on the first offending report.
            for (std::size_t i = lo; i < hi; ++i) {
                try {
                    auto one = provider.embed_batch(std::span<const std::string>(&texts[i], 1));
                    out[i] = std::move(one.front());
                } catch (const std::exception& e) {
                    rethrow_for(owners[i], e);
                }
            }
        }
    };

    for (std::size_t wave = 0; wave < n_batches; wave += in_flight) {
        const std::size_t end = std::min(n_batches, wave + in_flight);
        if (end - wave == 1) {
            run_batch(wave);
            continue;
        }
        std::vector<std::future<void>> pending;
        for (std::size_t b = wave; b < end; ++b) pending.push_back(std::async(std::launch::async, run_batch, b));
        std::exception_ptr first;
        for (auto& f : pending) {
            try {
                f.get();
            } catch (...) {
                if (!first) first = std::current_exception();
            }
        }
        if (first) std::rethrow_exception(first);
    }
    return out;
}

}  // namespace

KnowledgeIndex::KnowledgeIndex(IndexHeader header, std::vector<ReferenceEntry> entries, std::vector<ChunkEntry> chunks)
    : header_(std::move(header)), entries_(std::move(entries)), chunks_(std::move(chunks)) {
    if (!std::is_sorted(entries_.begin(), entries_.end(),
                        [](const auto& a, const auto& b) { return a.report_id < b.report_id; })) {
        std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) { return a.report_id < b.report_id; });
    }
    header_.entry_count = entries_.size();
    header_.chunk_count = chunks_.size();
    entry_rows_ = pack(header_.dim, entries_.size(), [&](std::size_t i) -> const EmbeddingVector& { return entries_[i].embedding; });
    chunk_rows_ = pack(header_.dim, chunks_.size(), [&](std::size_t i) -> const EmbeddingVector& { return chunks_[i].embedding; });
}

std::string KnowledgeIndex::serialize() const {
    std::string out;
    nlohmann::json head{
        {"format", "proofread-knowledge-index"},
        {"version", header_.version},
        {"dim", header_.dim},
        {"provider", header_.provider_id},
        {"annotator", header_.annotator_id},
        {"basis", to_string(header_.basis)},
        {"entries", entries_.size()},
        {"chunks", chunks_.size()},
        {"chunk_size", header_.chunk_size},
        {"chunk_overlap", header_.chunk_overlap},
    };
    out += head.dump() + "\n";
    for (const auto& e : entries_) {
        nlohmann::json j{{"type", "entry"},
                         {"report_id", e.report_id},
                         {"digest", e.digest},
                         {"embedding", std::vector<float>(e.embedding.values().begin(), e.embedding.values().end())},
                         {"knowledge", e.knowledge}};
        out += j.dump() + "\n";
    }
    for (const auto& c : chunks_) {
        nlohmann::json j{{"type", "chunk"},
                         {"report_id", c.report_id},
                         {"ordinal", c.ordinal},
                         {"text", c.text},
                         {"embedding", std::vector<float>(c.embedding.values().begin(), c.embedding.values().end())}};
        out += j.dump() + "\n";
    }
    return out;
}

KnowledgeIndex KnowledgeIndex::deserialize(std::string_view body) {
    std::istringstream in{std::string(body)};
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::SchemaMismatch, "index file is empty");
    IndexHeader h;
    std::vector<ReferenceEntry> entries;
    std::vector<ChunkEntry> chunks;
    try {
        const auto head = nlohmann::json::parse(line);
        if (head.value("format", "") != "proofread-knowledge-index") {
            fail(ErrorKind::SchemaMismatch, "not a knowledge index file");
        }
        h.version = head.at("version").get<int>();
        if (h.version != kFormatVersion) {
            fail(ErrorKind::SchemaMismatch, "unsupported index version " + std::to_string(h.version));
        }
        h.dim = head.at("dim").get<std::size_t>();
        h.provider_id = head.at("provider").get<std::string>();
        h.annotator_id = head.at("annotator").get<std::string>();
        const auto basis = similarity_basis_from_string(head.at("basis").get<std::string>());
        if (!basis) fail(ErrorKind::SchemaMismatch, "unknown similarity basis");
        h.basis = *basis;
        h.chunk_size = head.at("chunk_size").get<std::size_t>();
        h.chunk_overlap = head.at("chunk_overlap").get<std::size_t>();
        const auto n_entries = head.at("entries").get<std::size_t>();
        const auto n_chunks = head.at("chunks").get<std::size_t>();

        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto j = nlohmann::json::parse(line);
            const auto type = j.at("type").get<std::string>();
            if (type == "entry") {
                entries.push_back({j.at("report_id").get<std::string>(), j.at("digest").get<std::string>(),
                                   EmbeddingVector::from_unit(j.at("embedding").get<std::vector<float>>()),
                                   j.at("knowledge").get<std::vector<std::string>>()});
            } else if (type == "chunk") {
                chunks.push_back({j.at("report_id").get<std::string>(), j.at("ordinal").get<std::size_t>(),
                                  j.at("text").get<std::string>(),
                                  EmbeddingVector::from_unit(j.at("embedding").get<std::vector<float>>())});
            } else {
                fail(ErrorKind::SchemaMismatch, "unknown index record type '" + type + "'");
            }
        }
        if (entries.size() != n_entries || chunks.size() != n_chunks) {
            fail(ErrorKind::SchemaMismatch, "index record counts do not match header");
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::SchemaMismatch, std::string("malformed index: ") + e.what());
    }
    return KnowledgeIndex(std::move(h), std::move(entries), std::move(chunks));
}

void KnowledgeIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << serialize();
    if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

KnowledgeIndex KnowledgeIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

std::string query_text(const RadiologyReport& query, SimilarityBasis basis, const GraphProvider* annotator) {
    if (basis == SimilarityBasis::RawText) return query.text();
    if (!annotator) fail(ErrorKind::InvalidConfig, "standardized similarity basis needs an annotator");
    auto joined = join_sentences(standardize_reference(query, *annotator));
    // Reports without any extracted entity fall back to their raw text.
    return has_word_token(joined) ? joined : query.text();
}

KnowledgeIndex build_index(std::span<const RadiologyReport> corpus, const EmbeddingProvider& provider,
                           const GraphProvider& annotator, const BuildOptions& options) {
    if (corpus.empty()) fail(ErrorKind::EmptyInput, "reference corpus is empty");
    std::set<std::string> seen;
    for (const auto& r : corpus) {
        if (!seen.insert(r.id()).second) fail(ErrorKind::DuplicateId, "report_id '" + r.id() + "' appears twice");
    }
    if (options.with_chunks && options.chunk_overlap >= options.chunk_size) {
        fail(ErrorKind::InvalidChunkParams, "chunk overlap must be smaller than chunk size");
    }

    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return corpus[a].id() < corpus[b].id(); });

    const long n = static_cast<long>(order.size());
    std::vector<std::vector<std::string>> knowledge(order.size());
    std::vector<std::exception_ptr> errors(order.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < n; ++i) {
        const auto& report = corpus[order[i]];
        try {
            knowledge[i] = standardize_reference(report, annotator);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            rethrow_for(corpus[order[i]].id(), e);
        }
    }

    std::vector<std::string> texts;
    std::vector<std::string> owners;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& report = corpus[order[i]];
        if (options.basis == SimilarityBasis::Standardized) {
            const auto joined = join_sentences(knowledge[i]);
            texts.push_back(has_word_token(joined) ? joined : report.text());
        } else {
            texts.push_back(report.text());
        }
        owners.push_back(report.id());
    }
    auto vectors = embed_all(texts, owners, provider, options);

    std::vector<ReferenceEntry> entries;
    entries.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& report = corpus[order[i]];
        entries.push_back({report.id(), report.source_hash(), std::move(vectors[i]), std::move(knowledge[i])});
    }

    std::vector<ChunkEntry> chunks;
    if (options.with_chunks) {
        std::vector<std::string> chunk_texts;
        std::vector<std::string> chunk_owners;
        std::vector<std::size_t> ordinals;
        for (auto idx : order) {
            const auto& report = corpus[idx];
            auto pieces = chunk_text(report.text(), options.chunk_size, options.chunk_overlap);
            for (std::size_t c = 0; c < pieces.size(); ++c) {
                if (!has_word_token(pieces[c])) continue;
                chunk_texts.push_back(std::move(pieces[c]));
                chunk_owners.push_back(report.id());
                ordinals.push_back(c);
            }
        }
        auto chunk_vectors = embed_all(chunk_texts, chunk_owners, provider, options);
        for (std::size_t i = 0; i < chunk_texts.size(); ++i) {
            chunks.push_back({chunk_owners[i], ordinals[i], std::move(chunk_texts[i]), std::move(chunk_vectors[i])});
        }
    }

    IndexHeader header;
    header.dim = provider.dim();
    header.provider_id = provider.id();
    header.annotator_id = annotator.id();
    header.basis = options.basis;
    header.chunk_size = options.with_chunks ? options.chunk_size : 0;
    header.chunk_overlap = options.with_chunks ? options.chunk_overlap : 0;
    return KnowledgeIndex(std::move(header), std::move(entries), std::move(chunks));
}

namespace {

std::vector<kernels::Hit> scan(std::span<const float> rows, std::size_t dim, const EmbeddingVector& q, std::size_t k,
                               ScanMode mode) {
    if (k == 0) fail(ErrorKind::InvalidConfig, "k must be at least 1");
    if (q.dim() != dim) fail(ErrorKind::InvalidConfig, "query dimension does not match index");
    return mode == ScanMode::Serial ? kernels::top_k_serial(rows, dim, q.values(), k)
                                    : kernels::top_k_parallel(rows, dim, q.values(), k);
}

void check_provider(const KnowledgeIndex& index, const EmbeddingProvider& provider) {
    if (provider.id() != index.header().provider_id) {
        fail(ErrorKind::InvalidConfig, "index was built with provider '" + index.header().provider_id +
                                           "', query uses '" + provider.id() + "'");
    }
}

}  // namespace

RetrievalResult retrieve_vector(const EmbeddingVector& query, const KnowledgeIndex& index, std::size_t k,
                                ScanMode mode) {
    if (index.entries().empty()) fail(ErrorKind::EmptyIndex, "knowledge index has no entries");
    RetrievalResult result;
    for (const auto& hit : scan(index.entry_matrix(), index.header().dim, query, k, mode)) {
        result.items.push_back({index.entries()[hit.index], hit.score});
    }
    return result;
}

RetrievalResult retrieve(const RadiologyReport& query, const KnowledgeIndex& index, const EmbeddingProvider& provider,
                         const GraphProvider* annotator, std::size_t k, ScanMode mode) {
    if (index.entries().empty()) fail(ErrorKind::EmptyIndex, "knowledge index has no entries");
    check_provider(index, provider);
    const auto q = embed(query_text(query, index.header().basis, annotator), provider);
    return retrieve_vector(q, index, k, mode);
}

std::vector<RetrievedChunk> retrieve_chunks(const RadiologyReport& query, const KnowledgeIndex& index,
                                            const EmbeddingProvider& provider, std::size_t k, ScanMode mode) {
    if (index.chunks().empty()) fail(ErrorKind::EmptyIndex, "knowledge index has no chunks");
    check_provider(index, provider);
    const auto q = embed(query.text(), provider);
    std::vector<RetrievedChunk> out;
    for (const auto& hit : scan(index.chunk_matrix(), index.header().dim, q, k, mode)) {
        out.push_back({index.chunks()[hit.index], hit.score});
    }
    return out;
}

std::vector<std::string> chunk_text(std::string_view input, std::size_t chunk_size, std::size_t overlap) {
    if (chunk_size == 0 || overlap >= chunk_size) {
        fail(ErrorKind::InvalidChunkParams, "need 0 <= overlap < chunk_size (got size " + std::to_string(chunk_size) +
                                                ", overlap " + std::to_string(overlap) + ")");
    }
    std::vector<std::string> out;
    if (input.empty()) return out;
    const auto cps = text::codepoint_offsets(input);
    const std::size_t n = cps.size() - 1;
    const std::size_t step = chunk_size - overlap;
    for (std::size_t start = 0;; start += step) {
        const std::size_t end = std::min(n, start + chunk_size);
        out.emplace_back(input.substr(cps[start], cps[end] - cps[start]));
        if (end == n) break;
    }
    return out;
}

}  // namespace proofread
