#pragma once

#include "fpsi/sparse.hpp"
#include "fpsi/system.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fpsi {

/// Matrix-free Schur complement on y = [p_f; g; lambda].
class SchurOperator {
public:
    explicit SchurOperator(const SystemBlocks& blocks) : b_(&blocks) {}

    Vector apply(const Vector& y) const;
    int size() const { return b_->schur_dim(); }

private:
    const SystemBlocks* b_;
};

enum class PrecondVariant { None, Pre, PreLowerBlock };

const char* to_string(PrecondVariant v);
/// Accepts "none", "pre", "pre-lb".
PrecondVariant parse_precond_variant(const std::string& s);

struct PrecondConfig {
    bool include_lower_block = false;
    /// The optional block is dt G_p T_p^{-1} G_p^T, the dt-weighted part of
    /// the lambda row of S. When false it is used without the dt factor.
    bool scale_lower_block_by_dt = true;
};

class Preconditioner {
public:
    Preconditioner(const SystemBlocks& blocks, PrecondConfig cfg);

    /// a = M_pre^{-1} x.
    Vector apply_inverse(const Vector& x) const;
    /// Dense M_pre; intended for small problems and tests.
    DenseMatrix dense() const;
    const PrecondConfig& config() const { return cfg_; }
    double lower_block_factor() const { return cfg_.scale_lower_block_by_dt ? b_->dt : 1.0; }

private:
    const SystemBlocks* b_;
    PrecondConfig cfg_;
};

struct KrylovConfig {
    int l = 2;
    double tol = 1e-8;
    int max_iter = 100;
    std::uint64_t seed = 12345;
};

struct KrylovReport {
    bool converged = false;
    /// Outer cycles consumed; an exit inside the BiCG part of cycle k after
    /// j of l inner steps counts as (k - 1) + j / l.
    double iterations = 0.0;
    /// Relative residual, starting at 1.0, one entry per inner step.
    std::vector<double> residual_history;
    double final_residual = 0.0;
    /// ||S y - b|| / ||b|| on the unscaled Schur system when the solve ran on a
    /// row-scaled one (PartitionedSolver); equals final_residual otherwise.
    double schur_residual = 0.0;
    int restarts = 0;
    std::string message;
};

/// Right-preconditioned BiCGStab(l): iterates on A M^{-1} x = b and returns
/// y = M^{-1} x. An empty `precond` means the identity.
Vector bicgstab_l(const LinearOperator& apply, const LinearOperator& precond, const Vector& b,
                  const KrylovConfig& cfg, KrylovReport& report);

} // namespace fpsi
