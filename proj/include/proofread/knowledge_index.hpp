#pragma once

#include "proofread/annotate.hpp"
#include "proofread/embedding.hpp"
#include "proofread/report.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace proofread {

enum class SimilarityBasis { RawText, Standardized };

std::string_view to_string(SimilarityBasis basis);
std::optional<SimilarityBasis> similarity_basis_from_string(std::string_view s);

struct ReferenceEntry {
    std::string report_id;
    std::string digest;  // sha256 of the raw report text
    EmbeddingVector embedding;
    std::vector<std::string> knowledge;  // standardized sentences
};

// Raw text window used only by the simple-RAG baseline.
struct ChunkEntry {
    std::string report_id;
    std::size_t ordinal = 0;
    std::string text;
    EmbeddingVector embedding;
};

struct IndexHeader {
    int version = 1;
    std::size_t dim = 0;
    std::string provider_id;
    std::string annotator_id;
    SimilarityBasis basis = SimilarityBasis::RawText;
    std::size_t entry_count = 0;
    std::size_t chunk_count = 0;
    std::size_t chunk_size = 0;
    std::size_t chunk_overlap = 0;
};

// Immutable after construction. Entries are kept in ascending report_id
// order, so a row-index tie-break equals a report_id tie-break.
class KnowledgeIndex {
public:
    static constexpr int kFormatVersion = 1;

    KnowledgeIndex(IndexHeader header, std::vector<ReferenceEntry> entries, std::vector<ChunkEntry> chunks);

    const IndexHeader& header() const { return header_; }
    const std::vector<ReferenceEntry>& entries() const { return entries_; }
    const std::vector<ChunkEntry>& chunks() const { return chunks_; }
    std::span<const float> entry_matrix() const { return entry_rows_; }
    std::span<const float> chunk_matrix() const { return chunk_rows_; }

    // Line-delimited JSON: header record, then one record per entry and chunk.
    std::string serialize() const;
    static KnowledgeIndex deserialize(std::string_view body);
    void save(const std::filesystem::path& path) const;
    static KnowledgeIndex load(const std::filesystem::path& path);

private:
    IndexHeader header_;
    std::vector<ReferenceEntry> entries_;
    std::vector<ChunkEntry> chunks_;
    std::vector<float> entry_rows_;
    std::vector<float> chunk_rows_;
};

struct BuildOptions {
    SimilarityBasis basis = SimilarityBasis::RawText;
    bool with_chunks = true;
    std::size_t chunk_size = 1000;
    std::size_t chunk_overlap = 100;
    std::size_t batch_size = 32;
    std::size_t max_in_flight = 4;  // concurrent embedding batches
};

// Throws EmptyInput for an empty corpus, DuplicateId, and re-throws
// provider/annotator errors prefixed with the offending report_id.
KnowledgeIndex build_index(std::span<const RadiologyReport> corpus, const EmbeddingProvider& provider,
                           const GraphProvider& annotator, const BuildOptions& options = {});

struct RetrievedReference {
    ReferenceEntry entry;
    double score = 0.0;
};

struct RetrievalResult {
    std::vector<RetrievedReference> items;  // score desc, report_id asc
};

struct RetrievedChunk {
    ChunkEntry chunk;
    double score = 0.0;
};

inline constexpr std::size_t kDefaultTopK = 4;

enum class ScanMode { Serial, Parallel };

// Text embedded for a query under the index's similarity basis.
std::string query_text(const RadiologyReport& query, SimilarityBasis basis, const GraphProvider* annotator);

RetrievalResult retrieve(const RadiologyReport& query, const KnowledgeIndex& index, const EmbeddingProvider& provider,
                         const GraphProvider* annotator, std::size_t k = kDefaultTopK,
                         ScanMode mode = ScanMode::Parallel);
RetrievalResult retrieve_vector(const EmbeddingVector& query, const KnowledgeIndex& index, std::size_t k,
                                ScanMode mode = ScanMode::Parallel);

std::vector<RetrievedChunk> retrieve_chunks(const RadiologyReport& query, const KnowledgeIndex& index,
                                            const EmbeddingProvider& provider, std::size_t k = kDefaultTopK,
                                            ScanMode mode = ScanMode::Parallel);

// Sliding window over code points: starts at 0, size - overlap, ...; the last
// chunk ends at the text end. Throws InvalidChunkParams unless
// 0 <= overlap < chunk_size.
std::vector<std::string> chunk_text(std::string_view text, std::size_t chunk_size, std::size_t overlap);

}  // namespace proofread
