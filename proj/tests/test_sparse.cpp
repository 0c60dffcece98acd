#include <gtest/gtest.h>

#include <sstream>

#include "alin/io.hpp"
#include "alin/penalties.hpp"
#include "alin/sparse.hpp"
#include "support/oracles.hpp"

using namespace alin;
namespace ts = testing_support;

namespace {

const SparseMatrix kDiff3 = SparseMatrix::from_dense(2, 3, std::vector<double>{-1, 1, 0, 0, -1, 1});

}  // namespace

TEST(Matvec, IdentityLeavesVectorUnchanged) {
    EXPECT_EQ(matvec(SparseMatrix::identity(2), Vector{3, -1}), (Vector{3, -1}));
    EXPECT_EQ(matvec_t(SparseMatrix::identity(3), Vector{1, 2, 3}), (Vector{1, 2, 3}));
}

TEST(Matvec, DifferenceMatrixArithmetic) {
    EXPECT_EQ(matvec(kDiff3, Vector{1, 2, 4}), (Vector{1, 2}));
    EXPECT_EQ(matvec_t(kDiff3, Vector{1, 1}), (Vector{-1, 0, 1}));
}

TEST(Matvec, MatchesDenseOracle) {
    ts::Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const ts::Dense d = rng.sparse_gaussian(5, 7, 0.4);
        const SparseMatrix a = ts::to_sparse(d);
        const Vector x = rng.normals(7), u = rng.normals(5);
        EXPECT_LE(ts::max_abs_diff(matvec(a, x), ts::mul(d, x)), 1e-12);
        EXPECT_LE(ts::max_abs_diff(matvec_t(a, u), ts::mul_t(d, u)), 1e-12);
    }
}

TEST(Matvec, DimensionMismatchThrows) {
    EXPECT_THROW(matvec(kDiff3, Vector{1, 2}), DimensionError);
    EXPECT_THROW(matvec_t(kDiff3, Vector{1, 2, 3}), DimensionError);
}

TEST(Matvec, AdjointConsistency) {
    ts::Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t m = rng.index(1, 40), n = rng.index(1, 40);
        const SparseMatrix a = ts::to_sparse(rng.sparse_gaussian(m, n, 0.3));
        const Vector x = rng.normals(n), u = rng.normals(m);
        const double lhs = dot(u, matvec(a, x));
        const double rhs = dot(matvec_t(a, u), x);
        EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST(Matvec, DeterministicAcrossCalls) {
    ts::Rng rng(3);
    const SparseMatrix a = ts::to_sparse(rng.sparse_gaussian(30, 30, 0.5));
    const Vector x = rng.normals(30);
    EXPECT_EQ(matvec(a, x), matvec(a, x));
    EXPECT_EQ(matvec_t(a, x), matvec_t(a, x));
}

TEST(SparseMatrix, FromTripletsSumsDuplicatesAndSorts) {
    const auto a = SparseMatrix::from_triplets(2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 0, 3.0}, {0, 1, 0.5}});
    EXPECT_EQ(a.nonzeros(), 3u);
    EXPECT_EQ(a.to_dense(), (Vector{0, 2.5, 0, 3, 0, 1}));
}

TEST(SparseMatrix, RejectsUnsortedColumnsAndBadIndices) {
    EXPECT_THROW(SparseMatrix(1, 3, {0, 2}, {2, 1}, {1.0, 1.0}), DimensionError);
    EXPECT_THROW(SparseMatrix(1, 3, {0, 1}, {3}, {1.0}), DimensionError);
    EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), DimensionError);
}

TEST(SparseMatrix, ExplicitZerosAreEntries) {
    const SparseMatrix a(1, 2, {0, 2}, {0, 1}, {0.0, 1.0});
    EXPECT_EQ(a.nonzeros(), 2u);
    EXPECT_EQ(matvec(a, Vector{5, 7}), (Vector{7}));
}

TEST(SparseMatrix, IdentityDetection) {
    EXPECT_TRUE(SparseMatrix::identity(4).is_identity());
    EXPECT_FALSE(kDiff3.is_identity());
    EXPECT_FALSE(SparseMatrix::from_dense(2, 2, std::vector<double>{2, 0, 0, 1}).is_identity());
}

TEST(ColumnSqNorms, Examples) {
    const auto d1 = column_sq_norms(SparseMatrix::identity(3), 1e-8);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(d1[j], 1.0);

    const auto d2 = column_sq_norms(SparseMatrix::from_dense(2, 2, std::vector<double>{1, 2, 0, 1}), 1e-8);
    EXPECT_EQ(d2[0], 1.0);
    EXPECT_EQ(d2[1], 5.0);

    const auto d3 = column_sq_norms(SparseMatrix::from_dense(2, 2, std::vector<double>{1, 0, 3, 0}), 1e-8);
    EXPECT_EQ(d3[0], 10.0);
    EXPECT_EQ(d3[1], 1e-8);
}

TEST(ColumnSqNorms, MatchesDenseGramDiagonal) {
    ts::Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t m = rng.index(1, 50), n = rng.index(1, 50);
        const ts::Dense x = rng.sparse_gaussian(m, n, 0.3);
        const ts::Dense g = ts::matmul(ts::transpose(x), x);
        const auto d = column_sq_norms(ts::to_sparse(x), 1e-8);
        for (std::size_t j = 0; j < n; ++j)
            if (g(j, j) > 1e-8) EXPECT_NEAR(d[j], g(j, j), 1e-12 * std::max(1.0, g(j, j)));
    }
}

TEST(RowGramDiag, Examples) {
    EXPECT_EQ(row_gram_diag(SparseMatrix::identity(3), DiagonalScaling::identity(3)), (Vector{1, 1, 1}));
    EXPECT_EQ(row_gram_diag(penalties::build_diff_1d(3), DiagonalScaling::identity(3)), (Vector{2, 2}));
    EXPECT_THROW(row_gram_diag(kDiff3, DiagonalScaling::identity(2)), DimensionError);
}

TEST(RowGramDiag, MatchesDenseProductDiagonal) {
    ts::Rng rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t m = rng.index(1, 50), n = rng.index(1, 50);
        const ts::Dense r = rng.sparse_gaussian(m, n, 0.3);
        Vector dinv(n);
        for (double& v : dinv) v = rng.uniform(0.1, 3.0);
        ts::Dense rd = r;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) rd(i, j) *= dinv[j];
        const ts::Dense full = ts::matmul(rd, ts::transpose(r));
        const Vector got = row_gram_diag(ts::to_sparse(r), DiagonalScaling(dinv));
        for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(got[i], full(i, i), 1e-12 * std::max(1.0, full(i, i)));
    }
}

TEST(DiagonalScaling, RejectsNonPositiveEntries) {
    EXPECT_THROW(DiagonalScaling(Vector{1.0, 0.0}), PreconditionError);
    EXPECT_THROW(DiagonalScaling(Vector{-1.0}), PreconditionError);
}

TEST(MatrixMarket, RoundTrip) {
    ts::Rng rng(21);
    const SparseMatrix a = ts::to_sparse(rng.sparse_gaussian(12, 9, 0.3));
    std::stringstream ss;
    io::write_matrix_market(a, ss);
    EXPECT_EQ(io::read_matrix_market(ss), a);
}

TEST(MatrixMarket, OneBasedIndicesOnDisk) {
    std::istringstream in("%%MatrixMarket matrix coordinate real general\n% comment\n2 3 2\n1 1 4.5\n2 3 -1\n");
    const SparseMatrix a = io::read_matrix_market(in);
    EXPECT_EQ(a.rows(), 2u);
    EXPECT_EQ(a.cols(), 3u);
    EXPECT_EQ(a.to_dense(), (Vector{4.5, 0, 0, 0, 0, -1}));

    std::stringstream out;
    io::write_matrix_market(a, out);
    EXPECT_NE(out.str().find("\n1 1 4.5"), std::string::npos);
    EXPECT_NE(out.str().find("\n2 3 -1"), std::string::npos);
}

TEST(MatrixMarket, ErrorsCarryLineNumbers) {
    {
        std::istringstream in("%%MatrixMarkt matrix coordinate real general\n1 1 0\n");
        EXPECT_THROW(io::read_matrix_market(in), ParseError);
    }
    {
        std::istringstream in("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
        try {
            io::read_matrix_market(in);
            FAIL() << "expected ParseError";
        } catch (const ParseError& e) {
            EXPECT_EQ(e.line(), 3u);
        }
    }
    {
        std::istringstream in("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n");
        EXPECT_THROW(io::read_matrix_market(in), ParseError);
    }
    {
        std::istringstream in("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n");
        EXPECT_THROW(io::read_matrix_market(in), ParseError);
    }
}

TEST(VectorCsv, RoundTripAndHeaderRejection) {
    const Vector v{1.5, -2.25, 1e-300, 3.0};
    std::stringstream ss;
    io::write_vector_csv(v, ss);
    EXPECT_EQ(io::read_vector_csv(ss), v);

    std::istringstream hdr("value\n1\n");
    EXPECT_THROW(io::read_vector_csv(hdr), ParseError);
    std::istringstream nan("1\nnan\n");
    EXPECT_THROW(io::read_vector_csv(nan), ParseError);
}
