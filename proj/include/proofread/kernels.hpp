#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP version; both accumulate every dot product in double, in dimension
// order, so their outputs are bit-identical and the serial path doubles as
// the test oracle for the parallel one.
namespace proofread::kernels {

struct Hit {
    std::size_t index = 0;
    double score = 0.0;

    bool operator==(const Hit&) const = default;
};

// Ranking order: higher score first, then lower row index.
inline bool ranks_before(const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
}

double dot(std::span<const float> a, std::span<const float> b);

// rows is row-major, rows.size() == n * dim.
void scores_serial(std::span<const float> rows, std::size_t dim, std::span<const float> query, std::span<double> out);
void scores_parallel(std::span<const float> rows, std::size_t dim, std::span<const float> query, std::span<double> out);

std::vector<Hit> top_k_serial(std::span<const float> rows, std::size_t dim, std::span<const float> query,
                              std::size_t k);
// Per-thread bounded selection, merged under the same ranking order.
std::vector<Hit> top_k_parallel(std::span<const float> rows, std::size_t dim, std::span<const float> query,
                                std::size_t k);

// out[i * nb + j] = dot(a_i, b_j).
void similarity_matrix_serial(std::span<const float> a, std::span<const float> b, std::size_t dim,
                              std::span<double> out);
void similarity_matrix_parallel(std::span<const float> a, std::span<const float> b, std::size_t dim,
                                std::span<double> out);

int max_threads();

}  // namespace proofread::kernels
