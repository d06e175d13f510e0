#include "proofread/kernels.hpp"

#include <algorithm>
#include <cassert>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace proofread::kernels {

double dot(std::span<const float> a, std::span<const float> b) {
    assert(a.size() == b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

int max_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void scores_serial(std::span<const float> rows, std::size_t dim, std::span<const float> query, std::span<double> out) {
    const std::size_t n = dim == 0 ? 0 : rows.size() / dim;
    for (std::size_t i = 0; i < n; ++i) out[i] = dot(rows.subspan(i * dim, dim), query);
}

void scores_parallel(std::span<const float> rows, std::size_t dim, std::span<const float> query,
                     std::span<double> out) {
    const long n = dim == 0 ? 0 : static_cast<long>(rows.size() / dim);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        out[i] = dot(rows.subspan(static_cast<std::size_t>(i) * dim, dim), query);
    }
}

namespace {

// Keeps the best k hits seen so far; heap top is the current worst.
class BoundedSelection {
public:
    explicit BoundedSelection(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

    void offer(const Hit& h) {
        if (k_ == 0) return;
        if (heap_.size() < k_) {
            heap_.push_back(h);
            std::push_heap(heap_.begin(), heap_.end(), ranks_before);
        } else if (ranks_before(h, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), ranks_before);
            heap_.back() = h;
            std::push_heap(heap_.begin(), heap_.end(), ranks_before);
        }
    }

    std::vector<Hit> take() && { return std::move(heap_); }

private:
    std::size_t k_;
    std::vector<Hit> heap_;
};

}  // namespace

std::vector<Hit> top_k_serial(std::span<const float> rows, std::size_t dim, std::span<const float> query,
                              std::size_t k) {
    const std::size_t n = dim == 0 ? 0 : rows.size() / dim;
    std::vector<double> scores(n);
    scores_serial(rows, dim, query, scores);
    std::vector<Hit> hits(n);
    for (std::size_t i = 0; i < n; ++i) hits[i] = {i, scores[i]};
    const auto keep = std::min(k, n);
    std::partial_sort(hits.begin(), hits.begin() + static_cast<long>(keep), hits.end(), ranks_before);
    hits.resize(keep);
    return hits;
}

std::vector<Hit> top_k_parallel(std::span<const float> rows, std::size_t dim, std::span<const float> query,
                                std::size_t k) {
    const long n = dim == 0 ? 0 : static_cast<long>(rows.size() / dim);
    std::vector<Hit> merged;
#pragma omp parallel
    {
        BoundedSelection local(k);
#pragma omp for schedule(static) nowait
        for (long i = 0; i < n; ++i) {
            const auto row = static_cast<std::size_t>(i);
            local.offer({row, dot(rows.subspan(row * dim, dim), query)});
        }
        auto part = std::move(local).take();
#pragma omp critical(proofread_topk_merge)
        merged.insert(merged.end(), part.begin(), part.end());
    }
    std::sort(merged.begin(), merged.end(), ranks_before);
    if (merged.size() > k) merged.resize(k);
    return merged;
}

void similarity_matrix_serial(std::span<const float> a, std::span<const float> b, std::size_t dim,
                              std::span<double> out) {
    const std::size_t na = dim == 0 ? 0 : a.size() / dim;
    const std::size_t nb = dim == 0 ? 0 : b.size() / dim;
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) out[i * nb + j] = dot(a.subspan(i * dim, dim), b.subspan(j * dim, dim));
    }
}

void similarity_matrix_parallel(std::span<const float> a, std::span<const float> b, std::size_t dim,
                                std::span<double> out) {
    const long na = dim == 0 ? 0 : static_cast<long>(a.size() / dim);
    const std::size_t nb = dim == 0 ? 0 : b.size() / dim;
#pragma omp parallel for schedule(static)
    for (long ii = 0; ii < na; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        for (std::size_t j = 0; j < nb; ++j) out[i * nb + j] = dot(a.subspan(i * dim, dim), b.subspan(j * dim, dim));
    }
}

}  // namespace proofread::kernels
