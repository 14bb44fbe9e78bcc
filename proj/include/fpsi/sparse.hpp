#pragma once

#include "fpsi/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fpsi {

Vector spmv(const SparseMatrix& a, const Vector& x);

/// Elimination-tree based up-looking factorization with an AMD fill-reducing
/// permutation: P^T A P = L L^T (cholesky) or L D L^T (ldlt, unit L).
class SparseCholesky {
public:
    SparseCholesky() = default;
    /// Throws NumericalError naming `name` and the failing pivot (in original
    /// numbering) when A is not positive definite.
    explicit SparseCholesky(const SparseMatrix& a, std::string name = "matrix");

    /// Three-stage substitution: R^T x1 = P^T b, R x2 = x1, z = P x2 with R = L^T.
    Vector solve(const Vector& b) const;
    void solve_in_place(Vector& x) const;

    int size() const { return n_; }
    long factor_nonzeros() const { return static_cast<long>(Li_.size()); }
    /// perm[k] is the original index of permuted row k.
    const std::vector<int>& permutation() const { return perm_; }
    /// Upper factor R = L^T in the permuted ordering.
    Eigen::SparseMatrix<double> upper_factor() const;
    const std::string& name() const { return name_; }

private:
    friend class SparseLdlt;
    int n_ = 0;
    std::string name_;
    std::vector<int> perm_, pinv_;
    std::vector<int> Lp_, Li_;
    std::vector<double> Lx_;
};

/// Factorization of symmetric quasi-definite matrices (no pivoting beyond
/// the fill-reducing permutation).
class SparseLdlt {
public:
    SparseLdlt() = default;
    explicit SparseLdlt(const SparseMatrix& a, std::string name = "matrix");

    Vector solve(const Vector& b) const;
    int size() const { return n_; }
    long factor_nonzeros() const { return static_cast<long>(Li_.size()); }

private:
    int n_ = 0;
    std::string name_;
    std::vector<int> perm_, pinv_;
    std::vector<int> Lp_, Li_;
    std::vector<double> Lx_, D_;
};

/// Dense Cholesky with pivot diagnostics on failure.
class DenseCholesky {
public:
    DenseCholesky() = default;
    explicit DenseCholesky(const DenseMatrix& a, std::string name = "matrix");

    Vector solve(const Vector& b) const;
    DenseMatrix solve(const DenseMatrix& b) const;
    int size() const { return static_cast<int>(llt_.rows()); }
    DenseMatrix upper_factor() const { return llt_.matrixU(); }

private:
    Eigen::LLT<DenseMatrix> llt_;
    std::string name_;
};

/// A0 + c B^T W^{-1} B as a dense symmetric matrix. B has W's row count;
/// A0 may be empty (treated as zero) or have B's column count.
DenseMatrix normal_product(const SparseMatrix& a0, const SparseMatrix& b, const SparseCholesky& w, double c);

/// Sparse LU solve with iterative refinement; throws NumericalError when A is singular.
Vector lu_solve(const SparseMatrix& a, const Vector& b);

/// Ratio of extreme singular values; +inf when the smallest is below 1e-300.
double cond2(const DenseMatrix& a);

using LinearOperator = std::function<Vector(const Vector&)>;

/// Applies `op` to the n unit vectors. Throws ConfigError when n exceeds `cap`.
DenseMatrix probe_dense(const LinearOperator& op, int n, int cap = 5000);

DenseMatrix to_dense(const SparseMatrix& a);

/// One block of a block matrix: `scale * m` placed at (row, col).
struct BlockEntry {
    int row = 0;
    int col = 0;
    const SparseMatrix* m = nullptr;
    double scale = 1.0;
    bool transpose = false;
};

SparseMatrix block_matrix(int rows, int cols, const std::vector<BlockEntry>& blocks);

/// Max abs entry of A - A^T.
double asymmetry(const SparseMatrix& a);

} // namespace fpsi
