#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace fpsi {

using Vec2 = Eigen::Vector2d;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
/// Compressed sparse row storage; column indices are sorted within each row.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

/// Bad user input or an inconsistent scenario definition.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A factorization, solve or time step failed numerically.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fpsi
