#pragma once

#include "proofread/http.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace proofread {

// Unit-norm vector; zero vectors are rejected at construction.
class EmbeddingVector {
public:
    EmbeddingVector() = default;

    // Normalizes `raw`; throws EmptyText if its norm is zero.
    static EmbeddingVector normalized(std::vector<double> raw);
    // Trusts `values` to be unit-norm already (persisted data).
    static EmbeddingVector from_unit(std::vector<float> values);

    std::size_t dim() const { return values_.size(); }
    std::span<const float> values() const { return values_; }
    double norm() const;

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<float> values_;
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Implementations must be safe to call concurrently.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string id() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const = 0;
};

// Throws EmptyText for blank input.
EmbeddingVector embed(std::string_view text, const EmbeddingProvider& provider);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed);

// Feature-hashed bag of normalized word tokens (punctuation skipped), term
// counts per bucket, then L2 normalization. Bitwise stable across platforms.
class HashingEmbedder final : public EmbeddingProvider {
public:
    static constexpr std::size_t kDefaultDim = 256;
    static constexpr std::uint64_t kDefaultSeed = 0x9e3779b97f4a7c15ULL;

    explicit HashingEmbedder(std::size_t dim = kDefaultDim, std::uint64_t seed = kDefaultSeed);

    std::string id() const override;
    std::size_t dim() const override { return dim_; }
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

struct HttpEmbedderConfig {
    std::string url;
    std::size_t dim = 0;
    std::chrono::milliseconds timeout{30000};
    RetryPolicy retry;
    std::optional<std::string> api_key;
};

// Remote provider: POST {"texts": [...]} -> {"vectors": [[...], ...]}.
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(HttpEmbedderConfig config, Sleeper sleeper = {});

    std::string id() const override { return "http:" + config_.url; }
    std::size_t dim() const override { return config_.dim; }
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

private:
    HttpEmbedderConfig config_;
    JsonHttpClient client_;
};

// Per-token vectors for greedy-matching similarity.
class TokenEmbedder {
public:
    virtual ~TokenEmbedder() = default;
    virtual std::string id() const = 0;
    virtual std::size_t dim() const = 0;
    virtual EmbeddingVector embed_token(std::string_view token) const = 0;
};

// Hashed character trigrams of "#token#": identical tokens score 1, spelling
// neighbours ("effusion"/"infusion") score partially, unrelated tokens ~0.
class TrigramTokenEmbedder final : public TokenEmbedder {
public:
    static constexpr std::size_t kDefaultDim = 512;

    explicit TrigramTokenEmbedder(std::size_t dim = kDefaultDim) : dim_(dim) {}

    std::string id() const override { return "trigram-" + std::to_string(dim_) + "-v1"; }
    std::size_t dim() const override { return dim_; }
    EmbeddingVector embed_token(std::string_view token) const override;

private:
    std::size_t dim_;
};

// Memoizes another token embedder; thread-safe.
class CachedTokenEmbedder final : public TokenEmbedder {
public:
    explicit CachedTokenEmbedder(const TokenEmbedder& inner) : inner_(inner) {}

    std::string id() const override { return inner_.id(); }
    std::size_t dim() const override { return inner_.dim(); }
    EmbeddingVector embed_token(std::string_view token) const override;

private:
    const TokenEmbedder& inner_;
    mutable std::mutex mu_;
    mutable std::unordered_map<std::string, EmbeddingVector> cache_;
};

}  // namespace proofread
