#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "alin/errors.hpp"

namespace alin {

using Vector = std::vector<double>;
using ConstSpan = std::span<const double>;
using MutSpan = std::span<double>;

// ---------------------------------------------------------------------------
// Dense vector kernels. All accumulate left to right.
// ---------------------------------------------------------------------------

inline double dot(ConstSpan a, ConstSpan b) {
    detail::require_dims(a.size() == b.size(), "dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(ConstSpan a) { return std::sqrt(dot(a, a)); }

inline double norm1(ConstSpan a) {
    double s = 0.0;
    for (double v : a) s += std::abs(v);
    return s;
}

inline double norm_inf(ConstSpan a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

/// y += alpha * x
inline void axpy(double alpha, ConstSpan x, MutSpan y) {
    detail::require_dims(x.size() == y.size(), "axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vector add(ConstSpan a, ConstSpan b) {
    detail::require_dims(a.size() == b.size(), "add: length mismatch");
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vector sub(ConstSpan a, ConstSpan b) {
    detail::require_dims(a.size() == b.size(), "sub: length mismatch");
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline bool all_finite(ConstSpan a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// DiagonalScaling
// ---------------------------------------------------------------------------

/// Positive diagonal matrix, used for the proximal metric D and for preconditioners.
class DiagonalScaling {
public:
    DiagonalScaling() = default;

    explicit DiagonalScaling(Vector entries) : entries_(std::move(entries)) {
        for (double d : entries_)
            detail::require(std::isfinite(d) && d > 0.0, "DiagonalScaling: entries must be positive");
    }

    static DiagonalScaling identity(std::size_t n) { return DiagonalScaling(Vector(n, 1.0)); }

    std::size_t size() const noexcept { return entries_.size(); }
    double operator[](std::size_t i) const { return entries_[i]; }
    ConstSpan entries() const noexcept { return entries_; }

    DiagonalScaling scaled(double factor) const {
        Vector e(entries_);
        for (double& v : e) v *= factor;
        return DiagonalScaling(std::move(e));
    }

    DiagonalScaling inverse() const {
        Vector e(entries_.size());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = 1.0 / entries_[i];
        return DiagonalScaling(std::move(e));
    }

    /// out_i = x_i * d_i
    Vector apply(ConstSpan x) const {
        detail::require_dims(x.size() == size(), "DiagonalScaling::apply: length mismatch");
        Vector r(x.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = x[i] * entries_[i];
        return r;
    }

    /// out_i = x_i / d_i
    Vector solve(ConstSpan x) const {
        detail::require_dims(x.size() == size(), "DiagonalScaling::solve: length mismatch");
        Vector r(x.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = x[i] / entries_[i];
        return r;
    }

private:
    Vector entries_;
};

// ---------------------------------------------------------------------------
// SparseMatrix (compressed sparse rows)
// ---------------------------------------------------------------------------

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/**
 * Immutable compressed-sparse-row matrix.
 *
 * Column indices are strictly increasing within a row. Explicit zeros are
 * allowed and behave as ordinary entries.
 */
class SparseMatrix {
public:
    SparseMatrix() : row_ptr_(1, 0) {}

    /// Takes ownership of CSR arrays after validating the invariants.
    SparseMatrix(std::size_t nrows, std::size_t ncols, std::vector<std::size_t> row_ptr,
                 std::vector<std::size_t> col_idx, Vector values)
        : nrows_(nrows), ncols_(ncols), row_ptr_(std::move(row_ptr)),
          col_idx_(std::move(col_idx)), values_(std::move(values)) {
        validate();
    }

    /// Builds from unordered triplets; duplicate (row, col) pairs are summed.
    static SparseMatrix from_triplets(std::size_t nrows, std::size_t ncols,
                                      std::vector<Triplet> triplets) {
        for (const auto& t : triplets)
            detail::require_dims(t.row < nrows && t.col < ncols,
                                 "SparseMatrix::from_triplets: index out of range");
        std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        std::vector<std::size_t> row_ptr(nrows + 1, 0);
        std::vector<std::size_t> cols;
        Vector vals;
        cols.reserve(triplets.size());
        vals.reserve(triplets.size());
        for (std::size_t k = 0; k < triplets.size(); ++k) {
            const auto& t = triplets[k];
            if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
                vals.back() += t.value;
                continue;
            }
            cols.push_back(t.col);
            vals.push_back(t.value);
            ++row_ptr[t.row + 1];
        }
        for (std::size_t i = 0; i < nrows; ++i) row_ptr[i + 1] += row_ptr[i];
        return SparseMatrix(nrows, ncols, std::move(row_ptr), std::move(cols), std::move(vals));
    }

    static SparseMatrix identity(std::size_t n) {
        std::vector<std::size_t> rp(n + 1), ci(n);
        std::iota(rp.begin(), rp.end(), std::size_t{0});
        std::iota(ci.begin(), ci.end(), std::size_t{0});
        return SparseMatrix(n, n, std::move(rp), std::move(ci), Vector(n, 1.0));
    }

    /// Row-major dense input; exact zeros are dropped.
    static SparseMatrix from_dense(std::size_t nrows, std::size_t ncols, ConstSpan dense) {
        detail::require_dims(dense.size() == nrows * ncols, "SparseMatrix::from_dense: size mismatch");
        std::vector<Triplet> t;
        for (std::size_t i = 0; i < nrows; ++i)
            for (std::size_t j = 0; j < ncols; ++j)
                if (dense[i * ncols + j] != 0.0) t.push_back({i, j, dense[i * ncols + j]});
        return from_triplets(nrows, ncols, std::move(t));
    }

    std::size_t rows() const noexcept { return nrows_; }
    std::size_t cols() const noexcept { return ncols_; }
    std::size_t nonzeros() const noexcept { return values_.size(); }

    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
    ConstSpan values() const noexcept { return values_; }

    std::span<const std::size_t> row_cols(std::size_t i) const {
        return std::span<const std::size_t>(col_idx_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
    }
    ConstSpan row_values(std::size_t i) const {
        return ConstSpan(values_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
    }

    /// True when the stored pattern is exactly the n-by-n identity.
    bool is_identity() const {
        if (nrows_ != ncols_ || values_.size() != nrows_) return false;
        for (std::size_t i = 0; i < nrows_; ++i)
            if (row_ptr_[i] != i || col_idx_[i] != i || values_[i] != 1.0) return false;
        return true;
    }

    std::vector<Triplet> triplets() const {
        std::vector<Triplet> t;
        t.reserve(values_.size());
        for (std::size_t i = 0; i < nrows_; ++i)
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                t.push_back({i, col_idx_[k], values_[k]});
        return t;
    }

    /// Row-major dense copy; intended for tests and small diagnostics only.
    Vector to_dense() const {
        Vector d(nrows_ * ncols_, 0.0);
        for (const auto& t : triplets()) d[t.row * ncols_ + t.col] = t.value;
        return d;
    }

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    void validate() const {
        detail::require_dims(row_ptr_.size() == nrows_ + 1, "SparseMatrix: row_ptr length must be nrows+1");
        detail::require_dims(row_ptr_.front() == 0 && row_ptr_.back() == col_idx_.size(),
                             "SparseMatrix: row_ptr bounds inconsistent");
        detail::require_dims(col_idx_.size() == values_.size(), "SparseMatrix: col/value length mismatch");
        for (std::size_t i = 0; i < nrows_; ++i) {
            detail::require_dims(row_ptr_[i] <= row_ptr_[i + 1], "SparseMatrix: row_ptr not monotone");
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                detail::require_dims(col_idx_[k] < ncols_, "SparseMatrix: column index out of range");
                if (k > row_ptr_[i])
                    detail::require_dims(col_idx_[k - 1] < col_idx_[k],
                                         "SparseMatrix: column indices must strictly increase within a row");
            }
        }
        for (double v : values_) detail::require(std::isfinite(v), "SparseMatrix: non-finite entry");
    }

    std::size_t nrows_ = 0;
    std::size_t ncols_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    Vector values_;
};

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

/// out = A x
inline void matvec(const SparseMatrix& a, ConstSpan x, MutSpan out) {
    detail::require_dims(x.size() == a.cols(), "matvec: x length must equal A.cols");
    detail::require_dims(out.size() == a.rows(), "matvec: output length must equal A.rows");
    const auto rp = a.row_ptr();
    const auto ci = a.col_idx();
    const auto v = a.values();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += v[k] * x[ci[k]];
        out[i] = s;
    }
}

inline Vector matvec(const SparseMatrix& a, ConstSpan x) {
    Vector out(a.rows());
    matvec(a, x, out);
    return out;
}

/// out = Aᵀ x, scattered row by row so the summation order is fixed.
inline void matvec_t(const SparseMatrix& a, ConstSpan x, MutSpan out) {
    detail::require_dims(x.size() == a.rows(), "matvec_t: x length must equal A.rows");
    detail::require_dims(out.size() == a.cols(), "matvec_t: output length must equal A.cols");
    std::fill(out.begin(), out.end(), 0.0);
    const auto rp = a.row_ptr();
    const auto ci = a.col_idx();
    const auto v = a.values();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double xi = x[i];
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) out[ci[k]] += v[k] * xi;
    }
}

inline Vector matvec_t(const SparseMatrix& a, ConstSpan x) {
    Vector out(a.cols());
    matvec_t(a, x, out);
    return out;
}

/// Default floor applied to diag(XᵀX).
inline constexpr double kDefaultScalingFloor = 1e-8;

/// entry j = max(Σ_i X_ij², floor), i.e. a floored diag(XᵀX).
inline DiagonalScaling column_sq_norms(const SparseMatrix& x, double floor = kDefaultScalingFloor) {
    detail::require(floor > 0.0, "column_sq_norms: floor must be positive");
    Vector d(x.cols(), 0.0);
    const auto ci = x.col_idx();
    const auto v = x.values();
    for (std::size_t k = 0; k < v.size(); ++k) d[ci[k]] += v[k] * v[k];
    for (double& e : d) e = std::max(e, floor);
    return DiagonalScaling(std::move(d));
}

/// entry i = Σ_j R_ij² / d_j, the diagonal of R D⁻¹ Rᵀ without forming it.
/// `d_inv` holds the entries of D⁻¹.
inline Vector row_gram_diag(const SparseMatrix& r, const DiagonalScaling& d_inv) {
    detail::require_dims(r.cols() == d_inv.size(), "row_gram_diag: R.cols must equal scaling length");
    Vector out(r.rows(), 0.0);
    for (std::size_t i = 0; i < r.rows(); ++i) {
        const auto cols = r.row_cols(i);
        const auto vals = r.row_values(i);
        double s = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k) s += vals[k] * vals[k] * d_inv[cols[k]];
        out[i] = s;
    }
    return out;
}

}  // namespace alin
