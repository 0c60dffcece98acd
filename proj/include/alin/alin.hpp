#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "alin/box.hpp"
#include "alin/boxqp.hpp"
#include "alin/errors.hpp"
#include "alin/pcg.hpp"
#include "alin/sparse.hpp"

// Alternating linearization for  L(β) = ½‖y − Xβ‖² + λ‖Rβ‖₁.
//
// The loss enters only through loss_value, loss_gradient and
// solve_f_subproblem; another smooth convex loss can be substituted by
// replacing those three functions (the f-subproblem then needs its own inner
// solver instead of the linear system below).

namespace alin {

struct PenaltySpec {
    double lambda = 1.0;
    SparseMatrix r;

    PenaltySpec() = default;
    PenaltySpec(double lambda_, SparseMatrix r_) : lambda(lambda_), r(std::move(r_)) {
        detail::require(std::isfinite(lambda) && lambda > 0.0, "PenaltySpec: lambda must be positive");
    }
};

class Problem {
public:
    Problem(SparseMatrix x, Vector y, PenaltySpec penalty)
        : x_(std::move(x)), y_(std::move(y)), penalty_(std::move(penalty)) {
        detail::require_dims(x_.rows() == y_.size(), "Problem: y length must equal X.rows");
        detail::require_dims(penalty_.r.cols() == x_.cols(), "Problem: R.cols must equal X.cols");
        detail::require(all_finite(y_), "Problem: y has non-finite entries");
        identity_design_ = x_.is_identity();
        lasso_ = penalty_.r.is_identity();
    }

    const SparseMatrix& x() const noexcept { return x_; }
    ConstSpan y() const noexcept { return y_; }
    const PenaltySpec& penalty() const noexcept { return penalty_; }
    const SparseMatrix& r() const noexcept { return penalty_.r; }
    double lambda() const noexcept { return penalty_.lambda; }
    std::size_t n() const noexcept { return x_.rows(); }
    std::size_t p() const noexcept { return x_.cols(); }

    /// X is structurally the identity.
    bool identity_design() const noexcept { return identity_design_; }
    /// R is structurally the identity (plain lasso).
    bool lasso_penalty() const noexcept { return lasso_; }

private:
    SparseMatrix x_;
    Vector y_;
    PenaltySpec penalty_;
    bool identity_design_ = false;
    bool lasso_ = false;
};

enum class Variant { Alin, PeacemanRachford, DouglasRachfordAfterH, DouglasRachfordAfterF };

constexpr std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::Alin: return "alin";
        case Variant::PeacemanRachford: return "pr";
        case Variant::DouglasRachfordAfterH: return "dr-h";
        case Variant::DouglasRachfordAfterF: return "dr-f";
    }
    return "?";
}

inline std::optional<Variant> parse_variant(std::string_view s) {
    for (auto v : {Variant::Alin, Variant::PeacemanRachford, Variant::DouglasRachfordAfterH,
                   Variant::DouglasRachfordAfterF})
        if (s == to_string(v)) return v;
    return std::nullopt;
}

struct AlinConfig {
    /// Update-test parameter γ ∈ (0,1).
    double gamma = 0.1;
    /// Stopping tolerance ε = eps_abs + eps_rel·|L(β̂)|.
    double eps_abs = 1e-10;
    double eps_rel = 1e-8;
    std::size_t max_iterations = 1000;
    /// Floor on the entries of D = diag(XᵀX).
    double scaling_floor = kDefaultScalingFloor;
    Variant variant = Variant::Alin;

    /// CG for the f-subproblem (preconditioner 2D, start 0).
    PcgConfig f_solver{};
    /// Box QP for the h-subproblem dual. Its tolerance field is replaced by the schedule below.
    BoxQpConfig h_solver{};
    /// Projected-gradient tolerance for the dual at iteration k, relative to max(1, ‖b‖_∞):
    /// max(floor, initial·decay^k). Identity designs start at the floor.
    double h_tolerance_initial = 1e-6;
    double h_tolerance_floor = 1e-10;
    double h_tolerance_decay = 0.5;

    void validate() const {
        detail::require(gamma > 0.0 && gamma < 1.0, "AlinConfig: gamma must lie in (0,1)");
        detail::require(eps_abs > 0.0 && eps_rel >= 0.0, "AlinConfig: eps_abs must be positive, eps_rel nonnegative");
        detail::require(max_iterations >= 1, "AlinConfig: max_iterations must be at least 1");
        detail::require(scaling_floor > 0.0, "AlinConfig: scaling_floor must be positive");
        detail::require(h_tolerance_floor > 0.0 && h_tolerance_initial >= h_tolerance_floor,
                        "AlinConfig: need 0 < h_tolerance_floor <= h_tolerance_initial");
        detail::require(h_tolerance_decay > 0.0 && h_tolerance_decay <= 1.0, "AlinConfig: decay must lie in (0,1]");
    }
};

struct AlinState {
    Vector beta_hat;
    Vector beta_h;
    Vector beta_f;
    Vector s_f;
    Vector s_h;
    Vector z_f;
    Vector z_h;
    /// Dual multipliers of the last h-subproblem, ‖μ‖_∞ ≤ λ.
    Vector mu;
    DiagonalScaling d;
    std::size_t iteration = 0;
};

struct IterationRecord {
    std::size_t k = 0;
    /// L(β̂) at the end of the iteration.
    double objective = 0.0;
    /// Model value of the last test performed in the iteration.
    double model_value = 0.0;
    bool accepted_h = false;
    bool accepted_f = false;
    /// ‖s_f + s_h‖_∞.
    double kkt_inf_norm = 0.0;
    std::size_t cg_iters = 0;
    std::size_t boxqp_cycles = 0;
};

enum class RunStatus { Optimal, MaxIterations };

constexpr std::string_view to_string(RunStatus s) { return s == RunStatus::Optimal ? "Optimal" : "MaxIterations"; }

struct RunResult {
    Vector beta;
    std::vector<IterationRecord> trace;
    RunStatus status = RunStatus::MaxIterations;
    AlinState state;
    std::size_t h_solves = 0;
    std::size_t f_solves = 0;
};

enum class Phase { AfterH, AfterF };

/// Called after each subproblem once β̂ and the proximal centres are updated.
using StepObserver = std::function<void(Phase, const AlinState&)>;

// ---------------------------------------------------------------------------
// Objective pieces
// ---------------------------------------------------------------------------

/// ½‖y − Xβ‖²
inline double loss_value(const Problem& pb, ConstSpan beta) {
    const Vector xb = matvec(pb.x(), beta);
    double s = 0.0;
    for (std::size_t i = 0; i < xb.size(); ++i) {
        const double r = pb.y()[i] - xb[i];
        s += r * r;
    }
    return 0.5 * s;
}

/// Xᵀ(Xβ − y)
inline Vector loss_gradient(const Problem& pb, ConstSpan beta) {
    Vector r = matvec(pb.x(), beta);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= pb.y()[i];
    return matvec_t(pb.x(), r);
}

/// λ‖Rβ‖₁
inline double penalty_value(const Problem& pb, ConstSpan beta) { return pb.lambda() * norm1(matvec(pb.r(), beta)); }

inline double objective(const Problem& pb, ConstSpan beta) {
    detail::require_dims(beta.size() == pb.p(), "objective: beta length must equal p");
    return loss_value(pb, beta) + penalty_value(pb, beta);
}

inline DiagonalScaling build_scaling(const Problem& pb, double floor = kDefaultScalingFloor) {
    return column_sq_norms(pb.x(), floor);
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

/// f(β̃)+h(β̃) ≤ (1−γ)·incumbent + γ·model. Requires model ≤ incumbent.
inline bool update_test(double candidate, double model, double incumbent, double gamma) {
    detail::require(model <= incumbent, "update_test: model value exceeds the incumbent value");
    return candidate <= (1.0 - gamma) * incumbent + gamma * model;
}

/// model ≥ incumbent − (eps_abs + eps_rel·|incumbent|).
inline bool stopping_test(double model, double incumbent, double eps_abs, double eps_rel = 0.0) {
    return model >= incumbent - (eps_abs + eps_rel * std::abs(incumbent));
}

// ---------------------------------------------------------------------------
// Subproblems
// ---------------------------------------------------------------------------

/// v ↦ R D⁻¹ Rᵀ v, the Hessian of the h-subproblem dual.
class DualOperator {
public:
    DualOperator(const SparseMatrix& r, const DiagonalScaling& d) : r_(&r), d_(&d), tmp_(r.cols()) {}

    std::size_t dimension() const noexcept { return r_->rows(); }

    void apply(ConstSpan v, MutSpan out) const {
        matvec_t(*r_, v, tmp_);
        for (std::size_t j = 0; j < tmp_.size(); ++j) tmp_[j] /= (*d_)[j];
        matvec(*r_, tmp_, out);
    }

private:
    const SparseMatrix* r_;
    const DiagonalScaling* d_;
    mutable Vector tmp_;
};

/// v ↦ XᵀXv + Dv, the f-subproblem system matrix.
class RegularizedGramOperator {
public:
    RegularizedGramOperator(const SparseMatrix& x, const DiagonalScaling& d) : x_(&x), d_(&d), tmp_(x.rows()) {}

    std::size_t dimension() const noexcept { return x_->cols(); }

    void apply(ConstSpan v, MutSpan out) const {
        matvec(*x_, v, tmp_);
        matvec_t(*x_, tmp_, out);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += (*d_)[j] * v[j];
    }

private:
    const SparseMatrix* x_;
    const DiagonalScaling* d_;
    mutable Vector tmp_;
};

struct HStep {
    Vector beta_h;
    Vector s_h;
    Vector mu;
    std::size_t boxqp_cycles = 0;
    std::size_t cg_iterations = 0;
    double kkt_residual = 0.0;
};

struct FStep {
    Vector beta_f;
    Vector s_f;
    std::size_t cg_iterations = 0;
};

namespace detail {

/// diag(R D⁻¹ Rᵀ) with empty rows mapped to 1 so the preconditioner stays positive.
inline DiagonalScaling dual_preconditioner(const SparseMatrix& r, const DiagonalScaling& d) {
    Vector m = row_gram_diag(r, d.inverse());
    for (double& v : m)
        if (!(v > 0.0)) v = 1.0;
    return DiagonalScaling(std::move(m));
}

/// s_h = −s_f − D(β̃_h − β̂)
inline Vector subgradient_from_step(ConstSpan s_other, const DiagonalScaling& d, ConstSpan trial, ConstSpan beta_hat) {
    Vector s(trial.size());
    for (std::size_t j = 0; j < s.size(); ++j) s[j] = -s_other[j] - d[j] * (trial[j] - beta_hat[j]);
    return s;
}

}  // namespace detail

/**
 * h-subproblem via its dual box QP
 *
 *     max −½μᵀRD⁻¹Rᵀμ + μᵀR(β̂ − D⁻¹s_f)   s.t. ‖μ‖_∞ ≤ λ,
 *
 * warm-started from state.mu. The primal point is β̃_h = β̂ − D⁻¹(s_f + Rᵀμ).
 * `tolerance` is the projected-gradient target relative to max(1, ‖b‖_∞).
 */
inline HStep solve_h_subproblem(const AlinState& st, const Problem& pb, const BoxQpConfig& cfg, double tolerance) {
    const std::size_t m = pb.r().rows();
    const std::size_t p = pb.p();
    detail::require_dims(st.s_f.size() == p && st.beta_hat.size() == p && st.d.size() == p,
                         "solve_h_subproblem: state not initialised");

    Vector center(p);  // β̂ − D⁻¹s_f
    for (std::size_t j = 0; j < p; ++j) center[j] = st.beta_hat[j] - st.s_f[j] / st.d[j];

    HStep out;
    if (m == 0) {
        out.beta_h = center;
        out.s_h.assign(p, 0.0);
        return out;
    }

    const Vector b = matvec(pb.r(), center);
    const Box box(pb.lambda(), m);
    Vector mu0 = st.mu.size() == m ? box.project(st.mu) : Vector(m, 0.0);

    BoxQpConfig qp = cfg;
    qp.tolerance = tolerance * std::max(1.0, norm_inf(b));
    const DualOperator op(pb.r(), st.d);
    BoxQpResult res = solve_boxqp(op, b, box, detail::dual_preconditioner(pb.r(), st.d), mu0, qp);
    if (!res.converged)
        throw SolverError("h-subproblem: box QP stopped after " + std::to_string(res.cycles) +
                          " cycles with projected gradient " + std::to_string(res.kkt_residual));

    const Vector rt_mu = matvec_t(pb.r(), res.x);
    out.beta_h.resize(p);
    for (std::size_t j = 0; j < p; ++j) out.beta_h[j] = center[j] - rt_mu[j] / st.d[j];
    out.s_h = detail::subgradient_from_step(st.s_f, st.d, out.beta_h, st.beta_hat);
    out.mu = std::move(res.x);
    out.boxqp_cycles = res.cycles;
    out.cg_iterations = res.cg_iterations;
    out.kkt_residual = res.kkt_residual;
    return out;
}

/// Closed-form h-subproblem for R = I: component-wise soft thresholding of τ = β̂ − D⁻¹s_f at λ/d_j.
inline HStep lasso_prox(const AlinState& st, const Problem& pb) {
    detail::require(pb.lasso_penalty(), "lasso_prox: penalty matrix must be the identity");
    const std::size_t p = pb.p();
    const double lambda = pb.lambda();
    HStep out;
    out.beta_h.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        const double tau = st.beta_hat[j] - st.s_f[j] / st.d[j];
        const double mag = std::max(0.0, std::abs(tau) - lambda / st.d[j]);
        out.beta_h[j] = tau > 0.0 ? mag : (tau < 0.0 ? -mag : 0.0);
    }
    out.s_h = detail::subgradient_from_step(st.s_f, st.d, out.beta_h, st.beta_hat);
    out.mu.resize(p);
    for (std::size_t j = 0; j < p; ++j) out.mu[j] = std::clamp(out.s_h[j], -lambda, lambda);
    return out;
}

/// f-subproblem: (XᵀX + D)δ = Xᵀ(y − Xβ̂) − s_h by PCG with preconditioner 2D from δ = 0.
inline FStep solve_f_subproblem(const AlinState& st, const Problem& pb, const PcgConfig& cfg = {}) {
    const std::size_t p = pb.p();
    detail::require_dims(st.s_h.size() == p && st.beta_hat.size() == p && st.d.size() == p,
                         "solve_f_subproblem: state not initialised");
    Vector rhs = loss_gradient(pb, st.beta_hat);
    for (std::size_t j = 0; j < p; ++j) rhs[j] = -rhs[j] - st.s_h[j];

    const RegularizedGramOperator op(pb.x(), st.d);
    PcgOutcome sol = pcg_solve(op, rhs, st.d.scaled(2.0), Vector(p, 0.0), cfg);
    if (sol.status != PcgStatus::Converged)
        throw SolverError("f-subproblem: conjugate gradients ended with status " + std::string(to_string(sol.status)) +
                          " after " + std::to_string(sol.iterations) + " iterations (residual " +
                          std::to_string(sol.residual_norm) + ")");

    FStep out;
    out.beta_f.resize(p);
    for (std::size_t j = 0; j < p; ++j) out.beta_f[j] = st.beta_hat[j] + sol.x[j];
    out.s_f = detail::subgradient_from_step(st.s_h, st.d, out.beta_f, st.beta_hat);
    out.cg_iterations = sol.iterations;
    return out;
}

// ---------------------------------------------------------------------------
// Outer loop
// ---------------------------------------------------------------------------

/// Default starting point: y when X = I (the h-subproblem is then the whole problem), else 0.
inline Vector default_start(const Problem& pb) {
    if (pb.identity_design()) return Vector(pb.y().begin(), pb.y().end());
    return Vector(pb.p(), 0.0);
}

inline RunResult run(const Problem& pb, const AlinConfig& cfg, std::optional<Vector> beta0 = std::nullopt,
                     const StepObserver& observer = {}) {
    cfg.validate();
    const std::size_t p = pb.p();
    Vector start = beta0 ? std::move(*beta0) : default_start(pb);
    detail::require_dims(start.size() == p, "run: beta0 length must equal p");
    detail::require(all_finite(start), "run: beta0 has non-finite entries");

    RunResult res;
    AlinState& st = res.state;
    st.d = build_scaling(pb, cfg.scaling_floor);
    st.beta_hat = std::move(start);
    st.beta_f = st.beta_hat;
    st.s_f = loss_gradient(pb, st.beta_hat);
    st.z_f.resize(p);
    for (std::size_t j = 0; j < p; ++j) st.z_f[j] = st.beta_hat[j] - st.s_f[j] / st.d[j];
    st.s_h.assign(p, 0.0);
    st.mu.assign(pb.r().rows(), 0.0);

    const double lambda = pb.lambda();
    double incumbent = objective(pb, st.beta_hat);
    double loss_at_beta_f = loss_value(pb, st.beta_f);

    const bool update_after_h_always =
        cfg.variant == Variant::PeacemanRachford || cfg.variant == Variant::DouglasRachfordAfterH;
    const bool update_after_f_always =
        cfg.variant == Variant::PeacemanRachford || cfg.variant == Variant::DouglasRachfordAfterF;
    const bool never_after_h = cfg.variant == Variant::DouglasRachfordAfterF;
    const bool never_after_f = cfg.variant == Variant::DouglasRachfordAfterH;

    const double initial_tol = pb.identity_design() ? cfg.h_tolerance_floor : cfg.h_tolerance_initial;
    double h_tol = initial_tol;

    const auto kkt = [&] {
        double m = 0.0;
        for (std::size_t j = 0; j < p; ++j) m = std::max(m, std::abs(st.s_f[j] + st.s_h[j]));
        return m;
    };

    for (std::size_t k = 0; k < cfg.max_iterations; ++k) {
        st.iteration = k;
        IterationRecord rec;
        rec.k = k;

        // ---- h-subproblem -------------------------------------------------
        HStep hs = pb.lasso_penalty() ? lasso_prox(st, pb) : solve_h_subproblem(st, pb, cfg.h_solver, h_tol);
        ++res.h_solves;
        rec.boxqp_cycles = hs.boxqp_cycles;
        st.beta_h = std::move(hs.beta_h);
        st.s_h = std::move(hs.s_h);
        st.mu = std::move(hs.mu);

        // f̃ linearized at β̃_f plus the exact penalty.
        double lin = loss_at_beta_f;
        for (std::size_t j = 0; j < p; ++j) lin += st.s_f[j] * (st.beta_h[j] - st.beta_f[j]);
        const double h_at_beta_h = penalty_value(pb, st.beta_h);
        const double model_h = lin + h_at_beta_h;
        rec.model_value = model_h;

        if (stopping_test(model_h, incumbent, cfg.eps_abs, cfg.eps_rel)) {
            rec.objective = incumbent;
            rec.kkt_inf_norm = kkt();
            res.trace.push_back(rec);
            res.status = RunStatus::Optimal;
            break;
        }
        const double value_h = loss_value(pb, st.beta_h) + h_at_beta_h;
        rec.accepted_h = update_after_h_always ||
                         (!never_after_h && update_test(value_h, model_h, incumbent, cfg.gamma));
        if (rec.accepted_h) {
            st.beta_hat = st.beta_h;
            incumbent = value_h;
        }
        st.z_h.resize(p);
        for (std::size_t j = 0; j < p; ++j) st.z_h[j] = st.beta_hat[j] + st.beta_h[j] - st.z_f[j];
        if (observer) observer(Phase::AfterH, st);

        // ---- f-subproblem -------------------------------------------------
        FStep fs = solve_f_subproblem(st, pb, cfg.f_solver);
        ++res.f_solves;
        rec.cg_iters = fs.cg_iterations;
        st.beta_f = std::move(fs.beta_f);
        st.s_f = std::move(fs.s_f);
        loss_at_beta_f = loss_value(pb, st.beta_f);

        // h̃(β) = μᵀRβ.
        const Vector r_beta_f = matvec(pb.r(), st.beta_f);
        const double h_lin = pb.r().rows() ? dot(st.mu, r_beta_f) : 0.0;
        const double model_f = loss_at_beta_f + h_lin;
        rec.model_value = model_f;

        if (stopping_test(model_f, incumbent, cfg.eps_abs, cfg.eps_rel)) {
            rec.objective = incumbent;
            rec.kkt_inf_norm = kkt();
            res.trace.push_back(rec);
            res.status = RunStatus::Optimal;
            for (std::size_t j = 0; j < p; ++j) st.z_f[j] = st.beta_hat[j] + st.beta_f[j] - st.z_h[j];
            if (observer) observer(Phase::AfterF, st);
            break;
        }
        const double value_f = loss_at_beta_f + lambda * norm1(r_beta_f);
        rec.accepted_f = update_after_f_always ||
                         (!never_after_f && update_test(value_f, model_f, incumbent, cfg.gamma));
        if (rec.accepted_f) {
            st.beta_hat = st.beta_f;
            incumbent = value_f;
        }
        for (std::size_t j = 0; j < p; ++j) st.z_f[j] = st.beta_hat[j] + st.beta_f[j] - st.z_h[j];
        if (observer) observer(Phase::AfterF, st);

        rec.objective = incumbent;
        rec.kkt_inf_norm = kkt();
        res.trace.push_back(rec);
        h_tol = std::max(cfg.h_tolerance_floor, h_tol * cfg.h_tolerance_decay);
    }

    res.beta = st.beta_hat;
    return res;
}

// ---------------------------------------------------------------------------
// X = I
// ---------------------------------------------------------------------------

struct FastPathResult {
    Vector beta;
    Vector mu;
    BoxQpResult dual;
};

/// Solves an identity-design problem with one box QP: max −½μᵀRRᵀμ + μᵀRy, β = y − Rᵀμ.
inline FastPathResult identity_design_fast_path(const Problem& pb, const AlinConfig& cfg = {}) {
    detail::require(pb.identity_design(), "identity_design_fast_path: X must be the identity");
    const std::size_t m = pb.r().rows();
    FastPathResult out;
    if (m == 0) {
        out.beta.assign(pb.y().begin(), pb.y().end());
        return out;
    }
    const DiagonalScaling unit = DiagonalScaling::identity(pb.p());
    const Vector b = matvec(pb.r(), pb.y());
    BoxQpConfig qp = cfg.h_solver;
    qp.tolerance = cfg.h_tolerance_floor * std::max(1.0, norm_inf(b));
    const DualOperator op(pb.r(), unit);
    out.dual = solve_boxqp(op, b, Box(pb.lambda(), m), detail::dual_preconditioner(pb.r(), unit), Vector(m, 0.0), qp);
    if (!out.dual.converged)
        throw SolverError("identity_design_fast_path: box QP stopped with projected gradient " +
                          std::to_string(out.dual.kkt_residual));
    out.mu = out.dual.x;
    out.beta = sub(pb.y(), matvec_t(pb.r(), out.mu));
    return out;
}

}  // namespace alin
