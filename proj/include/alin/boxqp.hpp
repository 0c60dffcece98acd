#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "alin/box.hpp"
#include "alin/errors.hpp"
#include "alin/pcg.hpp"
#include "alin/sparse.hpp"

// Active-set solver for  min ½xᵀAx − bᵀx  subject to ‖x‖_∞ ≤ λ.
// CG runs inside the current face; a spectral projected-gradient step is
// taken whenever the leave-face test says the face is exhausted.

namespace alin {

/// g restricted to I₀ (zero on I₋ ∪ I₊).
inline Vector face_gradient(ConstSpan g, const FacePartition& face) {
    detail::require_dims(g.size() == face.size(), "face_gradient: length mismatch");
    Vector r(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (face.is_free(i)) r[i] = g[i];
    return r;
}

/// g with the components whose descent direction −g_i points out of the box zeroed.
inline Vector projected_gradient(ConstSpan g, ConstSpan x, const Box& box) {
    detail::require_dims(g.size() == x.size() && x.size() == box.dimension, "projected_gradient: length mismatch");
    detail::require(box.contains(x, 1e-12 * std::max(1.0, box.bound)), "projected_gradient: x outside the box");
    Vector r(g.begin(), g.end());
    for (std::size_t i = 0; i < r.size(); ++i) {
        if ((x[i] <= -box.bound && g[i] > 0.0) || (x[i] >= box.bound && g[i] < 0.0)) r[i] = 0.0;
    }
    return r;
}

/// True iff ‖g^Π‖₂ ≤ η‖g^P‖₂ with ‖g^P‖ > 0.
inline bool leave_face_test(ConstSpan g, ConstSpan x, const FacePartition& face, const Box& box, double eta) {
    const double gp = norm2(projected_gradient(g, x, box));
    if (!(gp > 0.0)) return false;
    return norm2(face_gradient(g, face)) <= eta * gp;
}

/// Curvature estimate along the last move, used to scale the projected-gradient direction.
struct SpectralState {
    Vector x_prev;
    Vector g_prev;
    double sigma = 1.0;
    double sigma_min = 1e-10;
    double sigma_max = 1e10;

    bool has_history() const { return !x_prev.empty(); }

    void remember(ConstSpan x, ConstSpan g) {
        x_prev.assign(x.begin(), x.end());
        g_prev.assign(g.begin(), g.end());
    }

    /// σ = ΔxᵀΔg / ‖Δx‖², clamped to [σ_min, σ_max]; 1 without history or when Δx = 0.
    double coefficient(ConstSpan x, ConstSpan g) const {
        if (!has_history()) return 1.0;
        double dxdg = 0.0, dxdx = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double dx = x[i] - x_prev[i];
            dxdg += dx * (g[i] - g_prev[i]);
            dxdx += dx * dx;
        }
        if (dxdx == 0.0) return 1.0;
        const double s = dxdg / dxdx;
        if (!std::isfinite(s)) return 1.0;
        return std::clamp(s, sigma_min, sigma_max);
    }
};

/// d = P_Ω(x − σg) − x with σ taken from the spectral state.
inline Vector spectral_direction(ConstSpan x, ConstSpan g, const SpectralState& spectral, const Box& box) {
    detail::require_dims(x.size() == g.size() && x.size() == box.dimension, "spectral_direction: length mismatch");
    detail::require(box.contains(x, 1e-12 * std::max(1.0, box.bound)), "spectral_direction: x outside the box");
    const double sigma = spectral.coefficient(x, g);
    Vector d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = box.clip(x[i] - sigma * g[i]) - x[i];
    return d;
}

struct LineSearchResult {
    double step = 0.0;
    Vector x;
};

namespace detail {

/// Largest τ ≥ 0 with x + τd ∈ Ω.
inline double max_feasible_step(ConstSpan x, ConstSpan d, const Box& box) {
    double t = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (d[i] > 0.0) t = std::min(t, std::max(0.0, (box.bound - x[i]) / d[i]));
        else if (d[i] < 0.0) t = std::min(t, std::max(0.0, (-box.bound - x[i]) / d[i]));
    }
    return t;
}

/// x + τd, snapping every coordinate whose own bound-hitting step is within 1e-12 of τ.
inline Vector step_and_snap(ConstSpan x, ConstSpan d, double tau, const Box& box) {
    Vector r(x.size());
    const double cutoff = tau * (1.0 + 1e-12);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (d[i] == 0.0) {
            r[i] = x[i];
            continue;
        }
        const double bnd = d[i] > 0.0 ? box.bound : -box.bound;
        const double ti = (bnd - x[i]) / d[i];
        r[i] = ti <= cutoff ? bnd : box.clip(x[i] + tau * d[i]);
    }
    return r;
}

}  // namespace detail

/**
 * Exact minimizer of the quadratic along { x + τd : τ ≥ 0 } ∩ Ω.
 *
 * τ = min(τ_unconstrained, τ_boundary) with τ_unconstrained = (bᵀd − xᵀAd)/(dᵀAd);
 * along a zero-curvature ray the boundary step is taken when d descends.
 */
template <LinearOperator Op>
LineSearchResult constrained_line_search(const Op& a, ConstSpan b, ConstSpan x, ConstSpan d, const Box& box) {
    const std::size_t n = a.dimension();
    detail::require_dims(b.size() == n && x.size() == n && d.size() == n && box.dimension == n,
                         "constrained_line_search: dimension mismatch");
    detail::require(norm_inf(d) > 0.0, "constrained_line_search: zero direction");

    const Vector ad = apply(a, d);
    const double dad = dot(d, ad);
    const double slope = dot(b, d) - dot(x, ad);  // −∇f(x)ᵀd
    const double tau_bnd = detail::max_feasible_step(x, d, box);

    double tau = 0.0;
    if (dad > 0.0) tau = std::max(0.0, slope / dad);
    else if (slope > 0.0) tau = std::numeric_limits<double>::infinity();
    tau = std::min(tau, tau_bnd);
    if (!std::isfinite(tau)) throw NumericalError("constrained_line_search: unbounded ray", 0);

    LineSearchResult r;
    r.step = tau;
    if (tau == tau_bnd) {
        r.x = detail::step_and_snap(x, d, tau, box);
    } else {
        r.x.assign(x.begin(), x.end());
        axpy(tau, d, r.x);
        r.x = box.project(r.x);
    }
    return r;
}

struct BoxQpConfig {
    /// Leave-face constant, 0 < η < 1.
    double eta = 0.1;
    /// Target for ‖g^P‖₂.
    double tolerance = 1e-9;
    /// Inner CG settings; its tolerance is capped at 0.5·η·tolerance so a converged
    /// face solve always either certifies optimality or triggers the leave-face test.
    PcgConfig inner{};
    /// Unset means 50·n + 1000.
    std::optional<std::size_t> max_cycles;
    double sigma_min = 1e-10;
    double sigma_max = 1e10;
    /// Warm-start coordinates this close to a bound start on that bound.
    double activity_tolerance = 1e-12;
};

struct BoxQpResult {
    Vector x;
    /// ‖g^P(x)‖₂, the optimality certificate.
    double kkt_residual = 0.0;
    bool converged = false;
    std::size_t cycles = 0;
    std::size_t cg_iterations = 0;
    std::size_t spectral_steps = 0;
    /// Objective at the start of every cycle; the last entry belongs to the returned point.
    std::vector<double> objective_trace;
};

/// ½xᵀAx − bᵀx given g = Ax − b.
inline double quadratic_value(ConstSpan x, ConstSpan g, ConstSpan b) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * (g[i] - b[i]);
    return 0.5 * s;
}

template <LinearOperator Op>
BoxQpResult solve_boxqp(const Op& a, ConstSpan b, const Box& box, const DiagonalScaling& m, ConstSpan x0,
                        const BoxQpConfig& cfg = {}) {
    const std::size_t n = a.dimension();
    detail::require_dims(b.size() == n && box.dimension == n && m.size() == n && x0.size() == n,
                         "solve_boxqp: dimension mismatch");
    detail::require(cfg.eta > 0.0 && cfg.eta < 1.0, "solve_boxqp: eta must lie in (0,1)");
    detail::require(cfg.tolerance > 0.0, "solve_boxqp: tolerance must be positive");

    BoxQpResult res;
    if (box.bound == 0.0 || n == 0) {
        res.x.assign(n, 0.0);
        res.converged = true;
        res.objective_trace.push_back(0.0);
        return res;
    }

    Vector x = box.project(x0);
    const double act = cfg.activity_tolerance * std::max(1.0, box.bound);
    for (double& v : x) {
        if (v >= box.bound - act) v = box.bound;
        else if (v <= -box.bound + act) v = -box.bound;
    }

    Vector g(n);
    const auto gradient = [&] {
        a.apply(x, g);
        for (std::size_t i = 0; i < n; ++i) g[i] -= b[i];
    };
    gradient();

    PcgConfig inner = cfg.inner;
    inner.tolerance = std::min(cfg.inner.tolerance.value_or(std::numeric_limits<double>::infinity()),
                               0.5 * cfg.eta * cfg.tolerance);
    if (!inner.max_iterations) inner.max_iterations = 10 * n;

    SpectralState spectral;
    spectral.sigma_min = cfg.sigma_min;
    spectral.sigma_max = cfg.sigma_max;

    const std::size_t max_cycles = cfg.max_cycles.value_or(50 * n + 1000);
    bool force_spectral = false;

    for (;;) {
        const FacePartition face = FacePartition::from_point(x, box);
        res.objective_trace.push_back(quadratic_value(x, g, b));
        res.kkt_residual = norm2(projected_gradient(g, x, box));
        if (res.kkt_residual <= cfg.tolerance) {
            res.converged = true;
            break;
        }
        if (res.cycles >= max_cycles) break;
        ++res.cycles;

        const Vector x_start = x;
        const Vector g_start = g;
        if (force_spectral || leave_face_test(g, x, face, box, cfg.eta)) {
            const Vector d = spectral_direction(x, g, spectral, box);
            x = constrained_line_search(a, b, x, d, box).x;
            ++res.spectral_steps;
            force_spectral = false;
        } else {
            const auto probe = [&](ConstSpan xi, ConstSpan gi) {
                return leave_face_test(gi, xi, face, box, cfg.eta);
            };
            PcgOutcome out = pcg_solve_on_face(a, b, m, x, inner, box, face, probe);
            res.cg_iterations += out.iterations;
            // A phase that made no move (or lost curvature) hands over to a spectral step.
            if (out.status == PcgStatus::ResetCurvature || out.iterations == 0) force_spectral = true;
            x = std::move(out.x);
        }
        spectral.remember(x_start, g_start);
        gradient();
    }
    res.x = std::move(x);
    return res;
}

}  // namespace alin
