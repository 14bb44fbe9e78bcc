#include "fpsi/sparse.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace fpsi;

namespace {

SparseMatrix from_dense(const DenseMatrix& d)
{
    return d.sparseView();
}

// Random sparse SPD matrix: sparse B^T B plus a diagonal shift.
SparseMatrix random_spd(int n, unsigned seed, double density = 0.05)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1), coin(0, 1);
    DenseMatrix b = DenseMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (coin(rng) < density) b(i, j) = u(rng);
    DenseMatrix a = b.transpose() * b + 0.1 * DenseMatrix::Identity(n, n);
    return from_dense(a);
}

Vector random_vector(int n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> d;
    Vector v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

} // namespace

TEST(Spmv, IdentityZeroAndDense)
{
    SparseMatrix eye(4, 4);
    eye.setIdentity();
    const Vector x = random_vector(4, 1);
    EXPECT_EQ(spmv(eye, x), x);
    const SparseMatrix a = random_spd(5, 2, 0.5);
    EXPECT_EQ(spmv(a, Vector::Zero(5)).cwiseAbs().maxCoeff(), 0.0);
    const Vector y = random_vector(5, 3);
    EXPECT_LT((spmv(a, y) - to_dense(a) * y).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_THROW(spmv(a, x), ConfigError);
}

TEST(Cholesky, IdentityAndDiagonal)
{
    SparseMatrix eye(3, 3);
    eye.setIdentity();
    const SparseCholesky fi(eye);
    EXPECT_LT((DenseMatrix(fi.upper_factor()) - DenseMatrix::Identity(3, 3)).norm(), 1e-15);

    DenseMatrix d = DenseMatrix::Zero(2, 2);
    d(0, 0) = 4;
    d(1, 1) = 9;
    const SparseCholesky fd(from_dense(d));
    DenseMatrix r = DenseMatrix(fd.upper_factor());
    // Undo the permutation to compare with diag(2, 3).
    DenseMatrix rr = DenseMatrix::Zero(2, 2);
    for (int k = 0; k < 2; ++k) rr(fd.permutation()[k], fd.permutation()[k]) = r(k, k);
    EXPECT_NEAR(rr(0, 0), 2.0, 1e-15);
    EXPECT_NEAR(rr(1, 1), 3.0, 1e-15);
}

TEST(Cholesky, FactorInvariantAndRoundtrip)
{
    for (int n : {1, 7, 60, 200}) {
        const SparseMatrix a = random_spd(n, static_cast<unsigned>(n));
        const SparseCholesky f(a, "A");
        const auto& p = f.permutation();
        DenseMatrix pap(n, n);
        const DenseMatrix ad = to_dense(a);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) pap(i, j) = ad(p[i], p[j]);
        const DenseMatrix r = DenseMatrix(f.upper_factor());
        EXPECT_LT((pap - r.transpose() * r).cwiseAbs().maxCoeff() / ad.cwiseAbs().maxCoeff(), 1e-10);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) ASSERT_EQ(r(i, j), 0.0);
        const Vector b = random_vector(n, 99);
        const Vector z = f.solve(b);
        EXPECT_LT((a * z - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Cholesky, ReportsFailingPivot)
{
    DenseMatrix d = DenseMatrix::Identity(4, 4);
    d(2, 2) = -1.0;
    try {
        SparseCholesky f(from_dense(d), "W_test");
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("W_test"), std::string::npos);
        EXPECT_NE(msg.find("pivot 2"), std::string::npos);
    }
    try {
        DenseCholesky f(d, "T_p");
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("T_p"), std::string::npos);
        EXPECT_NE(msg.find("pivot 2"), std::string::npos);
    }
}

TEST(Ldlt, QuasiDefiniteSolve)
{
    const int n1 = 40, n2 = 15;
    const DenseMatrix a = to_dense(random_spd(n1, 5, 0.1));
    const DenseMatrix c = to_dense(random_spd(n2, 6, 0.2));
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    DenseMatrix b(n1, n2);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) b(i, j) = (i + j) % 5 == 0 ? u(rng) : 0.0;
    DenseMatrix k(n1 + n2, n1 + n2);
    k << a, b, b.transpose(), -c;
    const SparseLdlt f(from_dense(k), "K");
    const Vector rhs = random_vector(n1 + n2, 12);
    const Vector x = f.solve(rhs);
    EXPECT_LT((k * x - rhs).norm() / rhs.norm(), 1e-10);
}

TEST(DenseCholesky, Roundtrip)
{
    const DenseMatrix a = to_dense(random_spd(30, 4, 0.3));
    const DenseCholesky f(a);
    const Vector b = random_vector(30, 5);
    EXPECT_LT((a * f.solve(b) - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(NormalProduct, TrivialCasesAndOracle)
{
    const int n = 25, m = 6;
    const SparseMatrix w = random_spd(n, 21, 0.2);
    const SparseCholesky wf(w);
    const SparseMatrix a0 = random_spd(m, 22, 0.5);
    SparseMatrix bz(n, m);
    EXPECT_LT((normal_product(a0, bz, wf, 3.0) - to_dense(a0)).cwiseAbs().maxCoeff(), 1e-15);

    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-1, 1);
    DenseMatrix bd(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) bd(i, j) = u(rng);
    const SparseMatrix b = from_dense(bd);
    EXPECT_LT((normal_product(a0, b, wf, 0.0) - to_dense(a0)).cwiseAbs().maxCoeff(), 1e-15);

    const DenseMatrix oracle = to_dense(a0) + 1e-3 * bd.transpose() * to_dense(w).inverse() * bd;
    const DenseMatrix t = normal_product(a0, b, wf, 1e-3);
    EXPECT_LT((t - oracle).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((t - t.transpose()).cwiseAbs().maxCoeff(), 1e-12);

    const DenseMatrix pure = normal_product(SparseMatrix(), b, wf, 1.0);
    EXPECT_LT((pure - bd.transpose() * to_dense(w).inverse() * bd).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LuSolve, Basic)
{
    SparseMatrix eye(3, 3);
    eye.setIdentity();
    const Vector b = random_vector(3, 1);
    EXPECT_LT((lu_solve(eye, b) - b).norm(), 1e-15);
    DenseMatrix d = DenseMatrix::Zero(3, 3);
    d.diagonal() << 2, -4, 8;
    EXPECT_LT((lu_solve(from_dense(d), b) - b.cwiseQuotient(d.diagonal())).norm(), 1e-15);
    const SparseMatrix a = random_spd(50, 9, 0.1);
    const Vector c = random_vector(50, 10);
    EXPECT_LT((lu_solve(a, c) - SparseCholesky(a).solve(c)).cwiseAbs().maxCoeff(), 1e-10);
    SparseMatrix singular(2, 2);
    singular.insert(0, 0) = 1.0;
    EXPECT_THROW(lu_solve(singular, Vector::Ones(2)), NumericalError);
}

TEST(Cond2, Basic)
{
    EXPECT_NEAR(cond2(DenseMatrix::Identity(5, 5)), 1.0, 1e-14);
    DenseMatrix d = DenseMatrix::Zero(2, 2);
    d.diagonal() << 10, 1;
    EXPECT_NEAR(cond2(d), 10.0, 1e-13);
    EXPECT_TRUE(std::isinf(cond2(DenseMatrix::Zero(3, 3))));
}

TEST(ProbeDense, IdentityAndCap)
{
    const auto id = [](const Vector& x) { return x; };
    EXPECT_EQ(probe_dense(id, 4), DenseMatrix::Identity(4, 4));
    EXPECT_THROW(probe_dense(id, 10, 5), ConfigError);
}
