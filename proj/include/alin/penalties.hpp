#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

#include "alin/errors.hpp"
#include "alin/sparse.hpp"

// Structure matrices R for h(β) = λ‖Rβ‖₁.
//
// Grids are linearized row-major (last index fastest): a 2-D cell (i, j) of an
// m×n grid maps to i·n + j, a 3-D cell (i, j, k) of an m×n×p grid to (i·n + j)·p + k.
// Every difference row holds −1 at the lower linear index and +1 at the higher one.

namespace alin::penalties {

/// Grid dimensions (1 to 3 axes, each ≥ 1).
class GridShape {
public:
    GridShape() = default;
    explicit GridShape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
        alin::detail::require(!dims_.empty() && dims_.size() <= 3, "GridShape: 1 to 3 dimensions required");
        for (auto d : dims_) alin::detail::require(d >= 1, "GridShape: every dimension must be at least 1");
    }

    std::size_t rank() const noexcept { return dims_.size(); }
    std::size_t operator[](std::size_t axis) const { return dims_.at(axis); }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t total() const {
        return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
    }

private:
    std::vector<std::size_t> dims_;
};

namespace detail {

/// Appends a row (−1 at a, +1 at b) with a < b.
inline void push_difference(std::vector<Triplet>& t, std::size_t row, std::size_t a, std::size_t b) {
    t.push_back({row, a, -1.0});
    t.push_back({row, b, 1.0});
}

}  // namespace detail

/// p×p identity (plain lasso).
inline SparseMatrix build_identity(std::size_t p) {
    alin::detail::require(p >= 1, "build_identity: p must be at least 1");
    return SparseMatrix::identity(p);
}

/// (p−1)×p first-difference matrix; row i is β_{i+1} − β_i.
inline SparseMatrix build_diff_1d(std::size_t p) {
    alin::detail::require(p >= 2, "build_diff_1d: p must be at least 2");
    std::vector<Triplet> t;
    t.reserve(2 * (p - 1));
    for (std::size_t i = 0; i + 1 < p; ++i) detail::push_difference(t, i, i, i + 1);
    return SparseMatrix::from_triplets(p - 1, p, std::move(t));
}

/**
 * Anisotropic total variation on an m×n image.
 *
 * Rows follow the image-penalty sum term by term: for each interior cell the
 * vertical then horizontal difference, then the last column's vertical
 * differences, then the last row's horizontal differences. The count is
 * 2(m−1)(n−1) + (m−1) + (n−1), i.e. every 4-neighbour edge once. A 1×n or m×1
 * grid reduces to the 1-D difference matrix.
 */
inline SparseMatrix build_tv_2d(const GridShape& shape) {
    alin::detail::require(shape.rank() == 2, "build_tv_2d: 2-D shape required");
    const std::size_t m = shape[0], n = shape[1];
    alin::detail::require(m * n >= 2, "build_tv_2d: grid must have at least two cells");
    const auto at = [n](std::size_t i, std::size_t j) { return i * n + j; };

    std::vector<Triplet> t;
    std::size_t row = 0;
    for (std::size_t i = 0; i + 1 < m; ++i)
        for (std::size_t j = 0; j + 1 < n; ++j) {
            detail::push_difference(t, row++, at(i, j), at(i + 1, j));
            detail::push_difference(t, row++, at(i, j), at(i, j + 1));
        }
    for (std::size_t i = 0; i + 1 < m; ++i) detail::push_difference(t, row++, at(i, n - 1), at(i + 1, n - 1));
    for (std::size_t j = 0; j + 1 < n; ++j) detail::push_difference(t, row++, at(m - 1, j), at(m - 1, j + 1));
    return SparseMatrix::from_triplets(row, m * n, std::move(t));
}

/// All 6-neighbour differences of an m×n×p volume: (m−1)np + m(n−1)p + mn(p−1) rows.
inline SparseMatrix build_tv_3d(const GridShape& shape) {
    alin::detail::require(shape.rank() == 3, "build_tv_3d: 3-D shape required");
    const std::size_t m = shape[0], n = shape[1], p = shape[2];
    alin::detail::require(m * n * p >= 2, "build_tv_3d: grid must have at least two cells");
    const auto at = [n, p](std::size_t i, std::size_t j, std::size_t k) { return (i * n + j) * p + k; };

    const std::size_t rows = (m - 1) * n * p + m * (n - 1) * p + m * n * (p - 1);
    std::vector<Triplet> t;
    t.reserve(2 * rows);
    std::size_t row = 0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < p; ++k) {
                if (i + 1 < m) detail::push_difference(t, row++, at(i, j, k), at(i + 1, j, k));
                if (j + 1 < n) detail::push_difference(t, row++, at(i, j, k), at(i, j + 1, k));
                if (k + 1 < p) detail::push_difference(t, row++, at(i, j, k), at(i, j, k + 1));
            }
    return SparseMatrix::from_triplets(row, m * n * p, std::move(t));
}

struct WeightedBlock {
    double weight;
    SparseMatrix matrix;
};

/// Vertical concatenation [w₁R₁; w₂R₂; …], so ‖Rβ‖₁ = Σᵢ wᵢ‖Rᵢβ‖₁.
inline SparseMatrix build_stacked(const std::vector<WeightedBlock>& blocks) {
    alin::detail::require(!blocks.empty(), "build_stacked: at least one block required");
    const std::size_t cols = blocks.front().matrix.cols();
    std::vector<Triplet> t;
    std::size_t offset = 0;
    for (const auto& b : blocks) {
        alin::detail::require_dims(b.matrix.cols() == cols, "build_stacked: blocks must share the column count");
        alin::detail::require(b.weight > 0.0, "build_stacked: weights must be positive");
        for (const auto& e : b.matrix.triplets()) t.push_back({e.row + offset, e.col, b.weight * e.value});
        offset += b.matrix.rows();
    }
    return SparseMatrix::from_triplets(offset, cols, std::move(t));
}

}  // namespace alin::penalties
