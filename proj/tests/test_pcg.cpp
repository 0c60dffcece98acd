#include <gtest/gtest.h>

#include "alin/pcg.hpp"
#include "support/oracles.hpp"

using namespace alin;
namespace ts = testing_support;

namespace {

/// Dense matrix wrapped as a LinearOperator.
struct DenseOp {
    ts::Dense a;
    std::size_t dimension() const { return a.rows; }
    void apply(ConstSpan x, MutSpan y) const {
        for (std::size_t i = 0; i < a.rows; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
            y[i] = s;
        }
    }
};

DiagonalScaling jacobi(const ts::Dense& a) {
    Vector d(a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) d[i] = a(i, i);
    return DiagonalScaling(d);
}

}  // namespace

TEST(Pcg, IdentitySystemConvergesInOneIteration) {
    const Vector b{3, -1, 2};
    const auto out = pcg_solve(DenseOp{ts::Dense{3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1}}}, b, DiagonalScaling::identity(3),
                               Vector(3, 0.0));
    EXPECT_EQ(out.status, PcgStatus::Converged);
    EXPECT_EQ(out.iterations, 1u);
    EXPECT_LE(ts::max_abs_diff(out.x, b), 1e-15);
}

TEST(Pcg, JacobiPreconditionedDiagonalSystem) {
    const ts::Dense a{2, 2, {1, 0, 0, 4}};
    const auto out = pcg_solve(DenseOp{a}, Vector{1, 4}, jacobi(a), Vector(2, 0.0));
    EXPECT_EQ(out.status, PcgStatus::Converged);
    EXPECT_EQ(out.iterations, 1u);
    EXPECT_LE(ts::max_abs_diff(out.x, Vector{1, 1}), 1e-15);
}

TEST(Pcg, MatchesGaussianEliminationOnRandomSpd) {
    ts::Rng rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        const ts::Dense a = ts::gram_plus_shift(rng, 10, 10, 1.0);
        const Vector b = rng.normals(10);
        const auto out = pcg_solve(DenseOp{a}, b, jacobi(a), Vector(10, 0.0), PcgConfig{1e-12, {}});
        ASSERT_EQ(out.status, PcgStatus::Converged);
        EXPECT_LE(ts::max_abs_diff(out.x, *ts::gauss_solve(a, b)), 1e-8);
    }
}

TEST(Pcg, ConvergesWithinDimensionIterations) {
    // GᵀG/n + I.
    ts::Rng rng(8);
    for (std::size_t n = 1; n <= 30; ++n) {
        ts::Dense a = ts::gram_plus_shift(rng, n, n, 0.0);
        for (double& v : a.a) v /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) a(i, i) += 1.0;
        const Vector b = rng.normals(n);
        const auto out = pcg_solve(DenseOp{a}, b, jacobi(a), Vector(n, 0.0), PcgConfig{1e-8, {}});
        EXPECT_EQ(out.status, PcgStatus::Converged) << "n=" << n;
        EXPECT_LE(out.iterations, n) << "n=" << n;
    }
}

TEST(Pcg, RecursiveResidualMatchesRecomputed) {
    ts::Rng rng(4);
    const ts::Dense a = ts::gram_plus_shift(rng, 25, 25, 0.5);
    const Vector b = rng.normals(25);
    const auto out = pcg_solve(DenseOp{a}, b, jacobi(a), Vector(25, 0.0), PcgConfig{1e-9, {}});
    Vector r = ts::mul(a, out.x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    EXPECT_NEAR(norm2(r), out.residual_norm, 1e-8 * std::max(1.0, norm2(b)));
}

TEST(Pcg, UnpreconditionedIteratesMatchPlainCg) {
    ts::Rng rng(13);
    const std::size_t n = 12;
    const ts::Dense a = ts::gram_plus_shift(rng, n, n, 1.0);
    const Vector b = rng.normals(n);
    const auto reference = ts::plain_cg_iterates(a, b, Vector(n, 0.0), 0.0, n);
    for (std::size_t k = 1; k <= 6; ++k) {
        const auto out = pcg_solve(DenseOp{a}, b, DiagonalScaling::identity(n), Vector(n, 0.0), PcgConfig{1e-300, k});
        ASSERT_EQ(out.iterations, k);
        EXPECT_LE(ts::max_abs_diff(out.x, reference[k]), 1e-10 * std::max(1.0, ts::max_abs(reference[k])));
    }
}

TEST(Pcg, ObjectiveDecreasesMonotonically) {
    ts::Rng rng(17);
    const std::size_t n = 20;
    const ts::Dense a = ts::gram_plus_shift(rng, n, n, 0.1);
    const Vector b = rng.normals(n);
    double prev = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const auto out = pcg_solve(DenseOp{a}, b, jacobi(a), Vector(n, 0.0), PcgConfig{1e-300, k});
        const double v = ts::quad(a, b, out.x);
        EXPECT_LE(v, prev + 1e-12);
        prev = v;
        if (out.status == PcgStatus::Converged) break;
    }
}

TEST(Pcg, NonFiniteInputRaisesNumericalError) {
    const ts::Dense a{2, 2, {1, 0, 0, 1}};
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_THROW(pcg_solve(DenseOp{a}, Vector{inf, 1}, DiagonalScaling::identity(2), Vector(2, 0.0)), NumericalError);
}

TEST(Pcg, ZeroCurvatureResets) {
    const ts::Dense a{2, 2, {0, 0, 0, 0}};
    const auto out = pcg_solve(DenseOp{a}, Vector{1, 1}, DiagonalScaling::identity(2), Vector(2, 0.0));
    EXPECT_EQ(out.status, PcgStatus::ResetCurvature);
}

TEST(PcgOnFace, TruncatesAtBoundary) {
    const ts::Dense a{1, 1, {1}};
    const Box box(1.0, 1);
    const auto out = pcg_solve_on_face(DenseOp{a}, Vector{2}, DiagonalScaling::identity(1), Vector{0}, PcgConfig{},
                                       box, FacePartition::all_free(1));
    EXPECT_EQ(out.status, PcgStatus::HitBoundary);
    EXPECT_EQ(out.x[0], 1.0);
}

TEST(PcgOnFace, InteriorOptimum) {
    const ts::Dense a{1, 1, {1}};
    const auto out = pcg_solve_on_face(DenseOp{a}, Vector{0.5}, DiagonalScaling::identity(1), Vector{0},
                                       PcgConfig{}, Box(1.0, 1), FacePartition::all_free(1));
    EXPECT_EQ(out.status, PcgStatus::Converged);
    EXPECT_NEAR(out.x[0], 0.5, 1e-15);
}

TEST(PcgOnFace, RejectsStartOutsideFace) {
    const ts::Dense a{2, 2, {1, 0, 0, 1}};
    FacePartition face = FacePartition::all_free(2);
    face.set(0, FaceSide::Upper);
    EXPECT_THROW(pcg_solve_on_face(DenseOp{a}, Vector{1, 1}, DiagonalScaling::identity(2), Vector{0.5, 0},
                                   PcgConfig{}, Box(1.0, 2), face),
                 PreconditionError);
}

TEST(PcgOnFace, MatchesReducedSystemOracle) {
    ts::Rng rng(23);
    int converged = 0;
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 5;
        const double lambda = 10.0;
        const ts::Dense a = ts::gram_plus_shift(rng, n, n, 1.0);
        const Vector b = rng.normals(n);
        FacePartition face = FacePartition::all_free(n);
        Vector x0(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = rng.uniform(0.0, 1.0);
            if (u < 0.2) { face.set(i, FaceSide::Lower); x0[i] = -lambda; }
            else if (u < 0.4) { face.set(i, FaceSide::Upper); x0[i] = lambda; }
        }
        const auto out = pcg_solve_on_face(DenseOp{a}, b, jacobi(a), x0, PcgConfig{1e-12, {}}, Box(lambda, n), face);
        if (out.status != PcgStatus::Converged) continue;
        ++converged;

        const auto free = face.indices(FaceSide::Free);
        ts::Dense aff(free.size(), free.size());
        Vector rhs(free.size());
        for (std::size_t r = 0; r < free.size(); ++r) {
            rhs[r] = b[free[r]];
            for (std::size_t j = 0; j < n; ++j)
                if (!face.is_free(j)) rhs[r] -= a(free[r], j) * x0[j];
            for (std::size_t s = 0; s < free.size(); ++s) aff(r, s) = a(free[r], free[s]);
        }
        const auto sol = ts::gauss_solve(aff, rhs);
        for (std::size_t r = 0; r < free.size(); ++r) EXPECT_NEAR(out.x[free[r]], (*sol)[r], 1e-8);
        for (std::size_t j = 0; j < n; ++j)
            if (!face.is_free(j)) EXPECT_EQ(out.x[j], x0[j]);
    }
    EXPECT_GT(converged, 10);
}

TEST(PcgOnFace, LeaveFaceProbeStopsTheSolve) {
    ts::Rng rng(2);
    const ts::Dense a = ts::gram_plus_shift(rng, 6, 6, 1.0);
    const Vector b = rng.normals(6);
    std::size_t calls = 0;
    const auto out = pcg_solve_on_face(DenseOp{a}, b, jacobi(a), Vector(6, 0.0), PcgConfig{1e-14, {}}, Box(100.0, 6),
                                       FacePartition::all_free(6), [&](ConstSpan, ConstSpan) { return ++calls == 2; });
    EXPECT_EQ(out.status, PcgStatus::LeaveFaceRequested);
    EXPECT_EQ(out.iterations, 2u);
}
