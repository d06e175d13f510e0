#include "proofread/embedding.hpp"

#include "proofread/error.hpp"
#include "proofread/kernels.hpp"
#include "proofread/report.hpp"
#include "proofread/text.hpp"

#include <cmath>

namespace proofread {

EmbeddingVector EmbeddingVector::normalized(std::vector<double> raw) {
    double sq = 0.0;
    for (double v : raw) sq += v * v;
    if (!(sq > 0.0) || !std::isfinite(sq)) fail(ErrorKind::EmptyText, "cannot normalize a zero or non-finite vector");
    const double inv = 1.0 / std::sqrt(sq);
    EmbeddingVector out;
    out.values_.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out.values_[i] = static_cast<float>(raw[i] * inv);
    return out;
}

EmbeddingVector EmbeddingVector::from_unit(std::vector<float> values) {
    EmbeddingVector out;
    out.values_ = std::move(values);
    return out;
}

double EmbeddingVector::norm() const { return std::sqrt(kernels::dot(values_, values_)); }

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) fail(ErrorKind::InvalidConfig, "embedding dimensions differ");
    return kernels::dot(a.values(), b.values());
}

EmbeddingVector embed(std::string_view input, const EmbeddingProvider& provider) {
    if (text::trim(input).empty()) fail(ErrorKind::EmptyText, "cannot embed empty text");
    std::string owned(input);
    auto out = provider.embed_batch(std::span<const std::string>(&owned, 1));
    return std::move(out.front());
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

HashingEmbedder::HashingEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim_ == 0) fail(ErrorKind::InvalidConfig, "embedding dimension must be positive");
}

std::string HashingEmbedder::id() const { return "hashing-" + std::to_string(dim_) + "-v1"; }

std::vector<EmbeddingVector> HashingEmbedder::embed_batch(std::span<const std::string> texts) const {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        if (text::trim(t).empty()) fail(ErrorKind::EmptyText, "cannot embed empty text");
        std::vector<double> acc(dim_, 0.0);
        bool any = false;
        for (const auto& tok : tokenize(t)) {
            if (tok.size() == 1 && text::is_punct(tok.normalized[0])) continue;
            acc[fnv1a64(tok.normalized, seed_) % dim_] += 1.0;
            any = true;
        }
        if (!any) fail(ErrorKind::EmptyText, "text has no embeddable tokens");
        out.push_back(EmbeddingVector::normalized(std::move(acc)));
    }
    return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbedderConfig config, Sleeper sleeper)
    : config_(std::move(config)),
      client_(config_.url, config_.timeout, config_.retry, config_.api_key, ErrorKind::ProviderUnavailable,
              std::move(sleeper)) {
    if (config_.dim == 0) fail(ErrorKind::InvalidConfig, "remote embedder needs a declared dimension");
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
    for (const auto& t : texts) {
        if (text::trim(t).empty()) fail(ErrorKind::EmptyText, "cannot embed empty text");
    }
    nlohmann::json body{{"texts", nlohmann::json::array()}};
    for (const auto& t : texts) body["texts"].push_back(t);
    auto ex = client_.post(body);
    if (!ex.ok()) fail(*ex.failure, ex.failure_message);

    std::vector<EmbeddingVector> out;
    try {
        const auto parsed = nlohmann::json::parse(ex.body());
        const auto& vectors = parsed.at("vectors");
        if (!vectors.is_array() || vectors.size() != texts.size()) {
            fail(ErrorKind::ProviderUnavailable, "embedding response has wrong vector count");
        }
        for (const auto& v : vectors) {
            auto raw = v.get<std::vector<double>>();
            if (raw.size() != config_.dim) {
                fail(ErrorKind::ProviderUnavailable, "embedding response has dimension " + std::to_string(raw.size()) +
                                                         ", expected " + std::to_string(config_.dim));
            }
            out.push_back(EmbeddingVector::normalized(std::move(raw)));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ProviderUnavailable, std::string("malformed embedding response: ") + e.what());
    }
    return out;
}

EmbeddingVector TrigramTokenEmbedder::embed_token(std::string_view token) const {
    if (token.empty()) fail(ErrorKind::EmptyText, "cannot embed an empty token");
    const std::string padded = "#" + text::to_lower(token) + "#";
    std::vector<double> acc(dim_, 0.0);
    if (padded.size() < 3) {
        acc[fnv1a64(padded, HashingEmbedder::kDefaultSeed) % dim_] = 1.0;
    } else {
        for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
            acc[fnv1a64(std::string_view(padded).substr(i, 3), HashingEmbedder::kDefaultSeed) % dim_] += 1.0;
        }
    }
    return EmbeddingVector::normalized(std::move(acc));
}

EmbeddingVector CachedTokenEmbedder::embed_token(std::string_view token) const {
    {
        std::lock_guard lock(mu_);
        auto it = cache_.find(std::string(token));
        if (it != cache_.end()) return it->second;
    }
    auto v = inner_.embed_token(token);
    std::lock_guard lock(mu_);
    return cache_.emplace(std::string(token), std::move(v)).first->second;
}

}  // namespace proofread
