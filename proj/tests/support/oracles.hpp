#pragma once

// Independent reference implementations used only by the tests. Everything here
// works on dense row-major arrays and avoids the library's solvers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <stdexcept>
#include <vector>

#include "alin/sparse.hpp"

namespace testing_support {

using Vec = std::vector<double>;

struct Dense {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec a;  // row-major

    Dense() = default;
    Dense(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
    Dense(std::size_t r, std::size_t c, Vec values) : rows(r), cols(c), a(std::move(values)) {
        if (a.size() != r * c) throw std::invalid_argument("Dense: value count must equal rows*cols");
    }

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

inline Dense from_sparse(const alin::SparseMatrix& s) {
    Dense d(s.rows(), s.cols());
    for (const auto& t : s.triplets()) d(t.row, t.col) += t.value;
    return d;
}

inline alin::SparseMatrix to_sparse(const Dense& d) { return alin::SparseMatrix::from_dense(d.rows, d.cols, d.a); }

inline Vec mul(const Dense& m, const Vec& x) {
    Vec y(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) y[i] += m(i, j) * x[j];
    return y;
}

inline Vec mul_t(const Dense& m, const Vec& x) {
    Vec y(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) y[j] += m(i, j) * x[i];
    return y;
}

inline Dense transpose(const Dense& m) {
    Dense t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

inline Dense matmul(const Dense& a, const Dense& b) {
    Dense c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k)
            for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += a(i, k) * b(k, j);
    return c;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

/// Gaussian elimination with partial pivoting; nullopt when a pivot falls below `singular_tol`.
inline std::optional<Vec> gauss_solve(Dense m, Vec b, double singular_tol = 1e-12) {
    const std::size_t n = m.rows;
    double scale = 0.0;
    for (double v : m.a) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
        if (std::abs(m(piv, k)) <= singular_tol * std::max(1.0, scale)) return std::nullopt;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = m(i, k) / m(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
            b[i] -= f * b[k];
        }
    }
    Vec x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= m(ii, j) * x[j];
        x[ii] = s / m(ii, ii);
    }
    return x;
}

/// Textbook conjugate gradients without preconditioning; records every iterate.
inline std::vector<Vec> plain_cg_iterates(const Dense& a, const Vec& b, Vec x, double tol, std::size_t max_it) {
    std::vector<Vec> its{x};
    Vec r = b;
    const Vec ax = mul(a, x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
    Vec p = r;
    double rr = dot(r, r);
    for (std::size_t k = 0; k < max_it && std::sqrt(rr) > tol; ++k) {
        const Vec ap = mul(a, p);
        const double alpha = rr / dot(p, ap);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double rr_new = dot(r, r);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + (rr_new / rr) * p[i];
        rr = rr_new;
        its.push_back(x);
    }
    return its;
}

inline double quad(const Dense& a, const Vec& b, const Vec& x) { return 0.5 * dot(x, mul(a, x)) - dot(b, x); }

struct EnumResult {
    double value = std::numeric_limits<double>::infinity();
    Vec x;
};

/**
 * min ½xᵀAx − bᵀx on ‖x‖_∞ ≤ λ by trying every assignment of each coordinate to
 * {−λ, free, +λ}. For each face the free block is solved exactly; feasible
 * candidates are kept and the best objective wins. Some minimizer is always a
 * face point with a nonsingular free block, so singular faces can be skipped.
 */
inline EnumResult enumerate_faces(const Dense& a, const Vec& b, double lambda) {
    const std::size_t n = b.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 3;
    EnumResult best;
    std::vector<int> side(n);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        std::vector<std::size_t> freeidx;
        Vec x(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            side[i] = static_cast<int>(c % 3) - 1;
            c /= 3;
            if (side[i] == 0) freeidx.push_back(i);
            else x[i] = side[i] * lambda;
        }
        if (!freeidx.empty()) {
            const std::size_t k = freeidx.size();
            Dense aff(k, k);
            Vec rhs(k);
            for (std::size_t r = 0; r < k; ++r) {
                rhs[r] = b[freeidx[r]];
                for (std::size_t j = 0; j < n; ++j)
                    if (side[j] != 0) rhs[r] -= a(freeidx[r], j) * x[j];
                for (std::size_t s = 0; s < k; ++s) aff(r, s) = a(freeidx[r], freeidx[s]);
            }
            auto sol = gauss_solve(aff, rhs, 1e-10);
            if (!sol) continue;
            bool feasible = true;
            for (std::size_t r = 0; r < k; ++r) {
                if (std::abs((*sol)[r]) > lambda * (1.0 + 1e-12)) feasible = false;
                x[freeidx[r]] = std::clamp((*sol)[r], -lambda, lambda);
            }
            if (!feasible) continue;
        }
        const double v = quad(a, b, x);
        if (v < best.value) {
            best.value = v;
            best.x = x;
        }
    }
    return best;
}

/**
 * Primal-dual active-set method for min ½μᵀAμ − bᵀμ on |μ| ≤ λ. Exact (up to
 * the linear solves) once the active set settles; A should be an M-matrix.
 */
inline Vec pdas_box_qp(const Dense& a, const Vec& b, double lambda, std::size_t max_it = 500) {
    const std::size_t n = b.size();
    Vec mu(n, 0.0), nu(n, 0.0);
    std::vector<int> side(n, 0), prev;
    for (std::size_t it = 0; it < max_it; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            const double s = mu[i] + nu[i];
            side[i] = s > lambda ? 1 : (s < -lambda ? -1 : 0);
        }
        if (side == prev) return mu;
        prev = side;
        std::vector<std::size_t> freeidx;
        for (std::size_t i = 0; i < n; ++i) {
            if (side[i] == 0) freeidx.push_back(i);
            else mu[i] = side[i] * lambda;
        }
        const std::size_t k = freeidx.size();
        if (k > 0) {
            Dense aff(k, k);
            Vec rhs(k);
            for (std::size_t r = 0; r < k; ++r) {
                rhs[r] = b[freeidx[r]];
                for (std::size_t j = 0; j < n; ++j)
                    if (side[j] != 0) rhs[r] -= a(freeidx[r], j) * mu[j];
                for (std::size_t s = 0; s < k; ++s) aff(r, s) = a(freeidx[r], freeidx[s]);
            }
            auto sol = gauss_solve(aff, rhs, 1e-14);
            if (!sol) throw std::runtime_error("pdas_box_qp: singular free block");
            for (std::size_t r = 0; r < k; ++r) mu[freeidx[r]] = (*sol)[r];
        }
        const Vec am = mul(a, mu);
        for (std::size_t i = 0; i < n; ++i) nu[i] = side[i] == 0 ? 0.0 : b[i] - am[i];
    }
    throw std::runtime_error("pdas_box_qp: active set did not settle");
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
    std::size_t index(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(engine);
    }

    Vec normals(std::size_t n) {
        Vec v(n);
        for (double& x : v) x = normal();
        return v;
    }

    Dense gaussian(std::size_t r, std::size_t c) {
        Dense d(r, c);
        for (double& x : d.a) x = normal();
        return d;
    }

    /// Each entry nonzero with probability `density`.
    Dense sparse_gaussian(std::size_t r, std::size_t c, double density) {
        Dense d(r, c);
        for (double& x : d.a)
            if (uniform(0.0, 1.0) < density) x = normal();
        return d;
    }
};

/// GᵀG + shift·I with G k×n; rank-deficient when shift = 0 and k < n.
inline Dense gram_plus_shift(Rng& rng, std::size_t n, std::size_t k, double shift) {
    const Dense g = rng.gaussian(k, n);
    Dense a = matmul(transpose(g), g);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += shift;
    return a;
}

}  // namespace testing_support
