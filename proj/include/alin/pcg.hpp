#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string_view>
#include <utility>

#include "alin/box.hpp"
#include "alin/errors.hpp"
#include "alin/sparse.hpp"

namespace alin {

/// Matrix-free symmetric positive semidefinite operator: y = A x.
template <class Op>
concept LinearOperator = requires(const Op& op, ConstSpan x, MutSpan y) {
    { op.dimension() } -> std::convertible_to<std::size_t>;
    op.apply(x, y);
};

/// Type-erased operator backed by a callable. Convenient in tests and for one-off compositions.
class FunctionOperator {
public:
    using Fn = std::function<void(ConstSpan, MutSpan)>;

    FunctionOperator(std::size_t n, Fn fn) : n_(n), fn_(std::move(fn)) {}

    std::size_t dimension() const noexcept { return n_; }
    void apply(ConstSpan x, MutSpan y) const { fn_(x, y); }

private:
    std::size_t n_;
    Fn fn_;
};

template <LinearOperator Op>
Vector apply(const Op& op, ConstSpan x) {
    Vector y(op.dimension());
    op.apply(x, y);
    return y;
}

struct PcgConfig {
    /// Stop when ‖g‖₂ ≤ tolerance. Unset means 1e-10·max(1, ‖b‖₂).
    std::optional<double> tolerance;
    /// Unset means 10·n.
    std::optional<std::size_t> max_iterations;

    double resolved_tolerance(ConstSpan b) const {
        const double t = tolerance.value_or(1e-10 * std::max(1.0, norm2(b)));
        detail::require(t > 0.0, "PcgConfig: tolerance must be positive");
        return t;
    }

    std::size_t resolved_max_iterations(std::size_t n) const {
        const std::size_t m = max_iterations.value_or(10 * std::max<std::size_t>(n, 1));
        detail::require(m >= 1, "PcgConfig: max_iterations must be at least 1");
        return m;
    }
};

enum class PcgStatus { Converged, HitBoundary, LeaveFaceRequested, MaxIterations, ResetCurvature };

constexpr std::string_view to_string(PcgStatus s) {
    switch (s) {
        case PcgStatus::Converged: return "Converged";
        case PcgStatus::HitBoundary: return "HitBoundary";
        case PcgStatus::LeaveFaceRequested: return "LeaveFaceRequested";
        case PcgStatus::MaxIterations: return "MaxIterations";
        case PcgStatus::ResetCurvature: return "ResetCurvature";
    }
    return "?";
}

struct PcgOutcome {
    Vector x;
    PcgStatus status = PcgStatus::MaxIterations;
    std::size_t iterations = 0;
    /// ‖g‖₂ at exit; restricted to the free coordinates for face solves.
    double residual_norm = 0.0;
};

namespace detail {

struct NoProbe {
    bool operator()(ConstSpan, ConstSpan) const { return false; }
};

inline void check_finite(double v, std::size_t k, const char* what) {
    if (!std::isfinite(v)) throw NumericalError(std::string("pcg: non-finite ") + what, k);
}

/// Preconditioned CG. When `box`/`face` are given, only free
/// coordinates move and steps are truncated at the face boundary.
template <LinearOperator Op, class Probe>
PcgOutcome pcg_core(const Op& a, ConstSpan b, const DiagonalScaling& m, Vector x, const PcgConfig& cfg,
                    const Box* box, const FacePartition* face, Probe&& probe) {
    const std::size_t n = a.dimension();
    require_dims(b.size() == n && x.size() == n && m.size() == n, "pcg: dimension mismatch");

    if (!all_finite(b) || !all_finite(x)) throw NumericalError("pcg: non-finite right-hand side or start", 0);
    const double eps = cfg.resolved_tolerance(b);
    const std::size_t max_it = cfg.resolved_max_iterations(n);
    const auto is_free = [&](std::size_t i) { return face == nullptr || face->is_free(i); };

    Vector g(n), gf(n), z(n), d(n), ad(n);
    const auto full_gradient = [&] {
        a.apply(x, g);
        for (std::size_t i = 0; i < n; ++i) g[i] -= b[i];
    };
    const auto restrict = [&] {
        for (std::size_t i = 0; i < n; ++i) gf[i] = is_free(i) ? g[i] : 0.0;
    };
    const auto precondition = [&] {
        for (std::size_t i = 0; i < n; ++i) z[i] = gf[i] / m[i];
    };

    std::size_t k = 0;
    full_gradient();
    restrict();

    PcgOutcome out;
    const auto finish = [&](PcgStatus s) {
        out.status = s;
        out.iterations = k;
        out.residual_norm = norm2(gf);
        out.x = std::move(x);
        return std::move(out);
    };

    for (;;) {  // restart loop: entered again only after a residual replacement
        if (norm2(gf) <= eps) return finish(PcgStatus::Converged);
        precondition();
        for (std::size_t i = 0; i < n; ++i) d[i] = -z[i];
        double gz = dot(gf, z);

        for (;;) {
            if (!(gz > 0.0)) return finish(PcgStatus::ResetCurvature);
            a.apply(d, ad);
            const double dad = dot(d, ad);
            check_finite(dad, k, "curvature");

            double tau = dad > 0.0 ? gz / dad : std::numeric_limits<double>::infinity();

            if (box != nullptr) {
                // Largest step keeping x + τd inside the closed face.
                double tau_max = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < n; ++i) {
                    if (!is_free(i) || d[i] == 0.0) continue;
                    const double ti = d[i] > 0.0 ? (box->bound - x[i]) / d[i] : (-box->bound - x[i]) / d[i];
                    tau_max = std::min(tau_max, std::max(ti, 0.0));
                }
                if (tau >= tau_max * (1.0 - 1e-12)) {
                    if (!std::isfinite(tau_max)) return finish(PcgStatus::ResetCurvature);
                    // Every coordinate reaching its bound within 1e-12 of the step is frozen.
                    const double cutoff = tau_max * (1.0 + 1e-12);
                    for (std::size_t i = 0; i < n; ++i) {
                        if (!is_free(i) || d[i] == 0.0) continue;
                        const double bnd = d[i] > 0.0 ? box->bound : -box->bound;
                        const double ti = (bnd - x[i]) / d[i];
                        x[i] = ti <= cutoff ? bnd : box->clip(x[i] + tau_max * d[i]);
                    }
                    ++k;
                    full_gradient();
                    restrict();
                    return finish(PcgStatus::HitBoundary);
                }
            } else if (!std::isfinite(tau)) {
                return finish(PcgStatus::ResetCurvature);
            }

            check_finite(tau, k, "step length");
            axpy(tau, d, x);
            axpy(tau, ad, g);
            ++k;
            const double gz_old = gz;
            Vector gf_old = gf;
            restrict();
            precondition();
            gz = dot(gf, z);
            check_finite(gz, k, "residual");

            if (norm2(gf) <= eps) {
                // Guard against drift of the recursive residual before declaring convergence.
                full_gradient();
                restrict();
                if (norm2(gf) <= eps) return finish(PcgStatus::Converged);
                if (k >= max_it) return finish(PcgStatus::MaxIterations);
                break;
            }
            if (probe(ConstSpan(x), ConstSpan(g))) return finish(PcgStatus::LeaveFaceRequested);
            if (k >= max_it) return finish(PcgStatus::MaxIterations);

            double num = 0.0;
            for (std::size_t i = 0; i < n; ++i) num += z[i] * (gf[i] - gf_old[i]);
            const double alpha = num / gz_old;
            check_finite(alpha, k, "conjugation coefficient");
            for (std::size_t i = 0; i < n; ++i) d[i] = -z[i] + alpha * d[i];
        }
    }
}

}  // namespace detail

/// Minimizes ½xᵀAx − bᵀx from x0 with diagonal preconditioner M.
template <LinearOperator Op>
PcgOutcome pcg_solve(const Op& a, ConstSpan b, const DiagonalScaling& m, ConstSpan x0, const PcgConfig& cfg = {}) {
    return detail::pcg_core(a, b, m, Vector(x0.begin(), x0.end()), cfg, nullptr, nullptr, detail::NoProbe{});
}

/**
 * PCG restricted to the closed face F̄ of the box described by `face`.
 *
 * Coordinates in I₋/I₊ stay fixed; a step that would leave F̄ is truncated to
 * the boundary and HitBoundary is returned with the boundary point. After each
 * full iteration `leave_face_probe(x, g)` is consulted with the full gradient
 * g = Ax − b; returning true ends the solve with LeaveFaceRequested.
 * The convergence test uses the face-restricted residual.
 */
template <LinearOperator Op, class Probe = detail::NoProbe>
PcgOutcome pcg_solve_on_face(const Op& a, ConstSpan b, const DiagonalScaling& m, ConstSpan x0, const PcgConfig& cfg,
                             const Box& box, const FacePartition& face, Probe&& leave_face_probe = {}) {
    detail::require_dims(face.size() == x0.size() && box.dimension == x0.size(),
                         "pcg_solve_on_face: face/box dimension mismatch");
    const double tol = 1e-12 * std::max(1.0, box.bound);
    for (std::size_t i = 0; i < x0.size(); ++i) {
        switch (face.side(i)) {
            case FaceSide::Free:
                detail::require(std::abs(x0[i]) <= box.bound + tol, "pcg_solve_on_face: x0 outside the face");
                break;
            case FaceSide::Lower:
                detail::require(std::abs(x0[i] + box.bound) <= tol, "pcg_solve_on_face: x0 not at lower bound");
                break;
            case FaceSide::Upper:
                detail::require(std::abs(x0[i] - box.bound) <= tol, "pcg_solve_on_face: x0 not at upper bound");
                break;
        }
    }
    Vector x(x0.begin(), x0.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (face.side(i) == FaceSide::Lower) x[i] = -box.bound;
        else if (face.side(i) == FaceSide::Upper) x[i] = box.bound;
        else x[i] = box.clip(x[i]);
    }
    return detail::pcg_core(a, b, m, std::move(x), cfg, &box, &face, std::forward<Probe>(leave_face_probe));
}

}  // namespace alin
