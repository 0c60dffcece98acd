#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "alin/errors.hpp"
#include "alin/sparse.hpp"

// Reference minimizers for ½‖y − Xβ‖² + λ‖Rβ‖₁ that share no code with the
// ALIN solver beyond the sparse kernels. Meant for small problems (p up to a
// few hundred): the barrier method factors a dense p×p matrix.

namespace alin::oracle {

struct OracleProblem {
    const SparseMatrix& x;
    ConstSpan y;
    double lambda;
    const SparseMatrix& r;
};

struct OracleResult {
    Vector beta;
    double objective = 0.0;
    std::size_t iterations = 0;
};

inline double evaluate(const OracleProblem& pb, ConstSpan beta) {
    const Vector xb = matvec(pb.x, beta);
    double loss = 0.0;
    for (std::size_t i = 0; i < xb.size(); ++i) loss += (xb[i] - pb.y[i]) * (xb[i] - pb.y[i]);
    const Vector rb = matvec(pb.r, beta);
    double pen = 0.0;
    for (double v : rb) pen += std::abs(v);
    return 0.5 * loss + pb.lambda * pen;
}

/// Largest eigenvalue of XᵀX by power iteration.
inline double gram_norm_estimate(const SparseMatrix& x, std::size_t iterations = 200) {
    const std::size_t p = x.cols();
    if (p == 0) return 0.0;
    Vector v(p, 1.0 / std::sqrt(static_cast<double>(p)));
    double est = 0.0;
    for (std::size_t k = 0; k < iterations; ++k) {
        Vector w = matvec_t(x, matvec(x, v));
        const double nw = norm2(w);
        if (nw == 0.0) return 0.0;
        est = nw;
        for (std::size_t j = 0; j < p; ++j) v[j] = w[j] / nw;
    }
    return est;
}

struct SubgradientConfig {
    std::size_t iterations = 1'000'000;
    /// Step scale; unset means 1/‖XᵀX‖.
    std::optional<double> c;
};

/// β ← β − (c/√t)·g with g = Xᵀ(Xβ − y) + λRᵀsign(Rβ); returns the best iterate seen.
inline OracleResult subgradient_descent(const OracleProblem& pb, const SubgradientConfig& cfg = {},
                                        std::optional<Vector> beta0 = std::nullopt) {
    const std::size_t p = pb.x.cols();
    alin::detail::require_dims(pb.y.size() == pb.x.rows() && pb.r.cols() == p, "subgradient_descent: dimension mismatch");
    double c = cfg.c.value_or(0.0);
    if (!cfg.c) {
        const double nrm = gram_norm_estimate(pb.x);
        c = nrm > 0.0 ? 1.0 / nrm : 1.0;
    }

    Vector beta = beta0 ? *beta0 : Vector(p, 0.0);
    alin::detail::require_dims(beta.size() == p, "subgradient_descent: beta0 length mismatch");
    OracleResult best{beta, evaluate(pb, beta), 0};

    Vector resid(pb.x.rows()), g(p), rb(pb.r.rows()), sgn(pb.r.rows()), rt(p);
    for (std::size_t t = 1; t <= cfg.iterations; ++t) {
        matvec(pb.x, beta, resid);
        for (std::size_t i = 0; i < resid.size(); ++i) resid[i] -= pb.y[i];
        matvec_t(pb.x, resid, g);
        matvec(pb.r, beta, rb);
        for (std::size_t i = 0; i < rb.size(); ++i) sgn[i] = rb[i] > 0.0 ? 1.0 : (rb[i] < 0.0 ? -1.0 : 0.0);
        matvec_t(pb.r, sgn, rt);
        const double step = c / std::sqrt(static_cast<double>(t));
        for (std::size_t j = 0; j < p; ++j) beta[j] -= step * (g[j] + pb.lambda * rt[j]);

        const double val = evaluate(pb, beta);
        if (val < best.objective) {
            best.beta = beta;
            best.objective = val;
            best.iterations = t;
        }
    }
    return best;
}

struct BarrierConfig {
    /// Stop when the duality-gap bound 2m/τ is below this times max(1, |objective|).
    double relative_gap = 1e-10;
    double tau_growth = 20.0;
    std::size_t max_newton_per_stage = 500;
};

namespace detail {

inline Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& a) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(a.nonzeros());
    for (const auto& e : a.triplets()) t.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
    Eigen::SparseMatrix<double> m(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

}  // namespace detail

/**
 * Log-barrier interior-point method on the smooth reformulation
 *
 *     min ½‖y − Xβ‖² + λ·1ᵀt   s.t.  −t ≤ Rβ ≤ t,
 *
 * Centring uses Newton steps with backtracking, never shorter than the damped
 * step 1/(1 + Newton decrement) that self-concordance makes safe. t is
 * eliminated from each Newton system, leaving a dense p×p solve.
 */
inline OracleResult barrier_reference(const OracleProblem& pb, const BarrierConfig& cfg = {},
                                      std::optional<Vector> beta0 = std::nullopt) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const std::size_t p = pb.x.cols();
    const std::size_t m = pb.r.rows();
    alin::detail::require_dims(pb.y.size() == pb.x.rows() && pb.r.cols() == p, "barrier_reference: dimension mismatch");

    const Eigen::SparseMatrix<double> xs = detail::to_eigen(pb.x);
    const Eigen::SparseMatrix<double> rs = detail::to_eigen(pb.r);
    const MatrixXd gram = MatrixXd(xs.transpose() * xs);
    const VectorXd y = Eigen::Map<const VectorXd>(pb.y.data(), static_cast<Eigen::Index>(pb.y.size()));
    const VectorXd xty = xs.transpose() * y;

    VectorXd beta = VectorXd::Zero(static_cast<Eigen::Index>(p));
    if (beta0) {
        alin::detail::require_dims(beta0->size() == p, "barrier_reference: beta0 length mismatch");
        for (std::size_t j = 0; j < p; ++j) beta[static_cast<Eigen::Index>(j)] = (*beta0)[j];
    }

    OracleResult out;
    if (m == 0) {
        Eigen::LDLT<MatrixXd> ldlt(gram);
        beta = ldlt.solve(xty);
        out.beta.assign(beta.data(), beta.data() + beta.size());
        out.objective = evaluate(pb, out.beta);
        out.iterations = 1;
        return out;
    }

    VectorXd r = rs * beta;
    VectorXd t = r.cwiseAbs().array() + 1.0;
    const auto objective_of = [&](const VectorXd& b) {
        const Vector bv(b.data(), b.data() + b.size());
        return evaluate(pb, bv);
    };
    double tau = std::max(1.0, static_cast<double>(m) / std::max(1.0, objective_of(beta)));
    const double lambda = pb.lambda;

    const auto barrier_value = [&](const VectorXd& b, const VectorXd& tt, const VectorXd& rr) {
        const double q = 0.5 * (xs * b - y).squaredNorm();
        return tau * (q + lambda * tt.sum()) - (tt - rr).array().log().sum() - (tt + rr).array().log().sum();
    };

    for (;;) {
        bool centred = false;
        double best_dec2 = std::numeric_limits<double>::infinity();
        std::size_t stalled = 0;
        for (std::size_t it = 0; it < cfg.max_newton_per_stage; ++it) {
            const VectorXd a = t - r;
            const VectorXd b = t + r;
            const VectorXd u = a.cwiseInverse().cwiseAbs2();
            const VectorXd v = b.cwiseInverse().cwiseAbs2();
            const VectorXd g_beta = tau * (gram * beta - xty) + rs.transpose() * (a.cwiseInverse() - b.cwiseInverse());
            const VectorXd g_t = (tau * lambda - a.cwiseInverse().array() - b.cwiseInverse().array()).matrix();
            const VectorXd h_tt = u + v;
            const VectorXd h_rt = v - u;
            const VectorXd schur = (4.0 * u.array() * v.array() / h_tt.array()).matrix();

            MatrixXd h = tau * gram;
            h += MatrixXd(rs.transpose() * schur.asDiagonal() * rs);
            const VectorXd rhs = -g_beta + rs.transpose() * (h_rt.cwiseQuotient(h_tt).cwiseProduct(g_t));
            Eigen::LDLT<MatrixXd> ldlt(h);
            VectorXd d_beta = ldlt.solve(rhs);
            if (!d_beta.allFinite()) throw SolverError("barrier_reference: Newton system could not be solved");
            const VectorXd r_dir = rs * d_beta;
            const VectorXd d_t = -(g_t + h_rt.cwiseProduct(r_dir)).cwiseQuotient(h_tt);

            const double dec2 = -(g_beta.dot(d_beta) + g_t.dot(d_t));
            ++out.iterations;
            // Centred once the decrement is tiny or has stopped shrinking.
            if (dec2 < best_dec2 * 0.5) {
                best_dec2 = dec2;
                stalled = 0;
            } else {
                ++stalled;
            }
            if (!(dec2 > 1e-8) || (stalled >= 20 && dec2 < 1e-4)) {
                centred = true;
                break;
            }
            const double dec = std::sqrt(dec2);
            // Stay strictly inside the feasible region.
            double step_max = 1.0;
            const VectorXd da = d_t - r_dir;
            const VectorXd db = d_t + r_dir;
            for (Eigen::Index i = 0; i < a.size(); ++i) {
                if (da[i] < 0.0) step_max = std::min(step_max, 0.99 * a[i] / -da[i]);
                if (db[i] < 0.0) step_max = std::min(step_max, 0.99 * b[i] / -db[i]);
            }
            double step = std::min(step_max, dec > 0.25 ? 1.0 / (1.0 + dec) : 1.0);
            if (dec > 0.25) {
                // Far from the centre: backtrack from the largest feasible step, keeping the damped step as a floor.
                const double phi0 = barrier_value(beta, t, r);
                for (double s = step_max; s > step; s *= 0.5) {
                    const VectorXd bt = beta + s * d_beta;
                    const VectorXd tt = t + s * d_t;
                    if (barrier_value(bt, tt, rs * bt) <= phi0 - 0.25 * s * dec2) {
                        step = s;
                        break;
                    }
                }
            }
            beta += step * d_beta;
            t += step * d_t;
            r = rs * beta;
        }
        if (!centred) throw SolverError("barrier_reference: centring did not converge");
        const double gap = 2.0 * static_cast<double>(m) / tau;
        if (gap <= cfg.relative_gap * std::max(1.0, std::abs(objective_of(beta)))) break;
        tau *= cfg.tau_growth;
    }

    out.beta.assign(beta.data(), beta.data() + beta.size());
    out.objective = evaluate(pb, out.beta);
    return out;
}

/// Minimum over a subgradient run and a barrier run; always an attained objective value.
inline OracleResult reference_minimum(const OracleProblem& pb, std::size_t subgradient_iterations) {
    OracleResult best = barrier_reference(pb);
    if (subgradient_iterations > 0) {
        OracleResult sg = subgradient_descent(pb, {subgradient_iterations, std::nullopt});
        if (sg.objective < best.objective) best = std::move(sg);
    }
    return best;
}

}  // namespace alin::oracle
