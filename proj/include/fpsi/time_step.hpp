#pragma once

#include "fpsi/schur.hpp"
#include "fpsi/system.hpp"

#include <optional>

namespace fpsi {

/// Thrown when the Schur solve does not reach the tolerance; carries the
/// solver report.
class KrylovError : public NumericalError {
public:
    KrylovError(const std::string& what, KrylovReport report) : NumericalError(what), report_(std::move(report)) {}
    const KrylovReport& report() const { return report_; }

private:
    KrylovReport report_;
};

struct StepOptions {
    PrecondVariant precond = PrecondVariant::PreLowerBlock;
    /// See PrecondConfig::scale_lower_block_by_dt.
    bool scale_lower_block_by_dt = true;
    KrylovConfig krylov;
    /// With a preconditioner, iterate on D S M^{-1} D^{-1} where D scales the
    /// g rows by 1/dt. Same spectrum as S M^{-1}; the residual norm then weighs
    /// the interface rows like the others instead of by a factor dt.
    bool scale_interface_rows = true;
    /// Coupled eta/p_p solve in Step 4 instead of the sequential T_p path.
    bool block_variant = false;
    /// Throw KrylovError on non-convergence; otherwise keep the last iterate.
    bool require_convergence = true;
    /// Test hook: flips the sign of w4 inside the partitioned path.
    bool corrupt_w4_sign = false;
};

struct StepReport {
    KrylovReport krylov;
    RowResiduals residuals;
};

/// Steps 1-4 of the partitioned method on fixed system blocks.
class PartitionedSolver {
public:
    PartitionedSolver(const SystemBlocks& blocks, StepOptions opts);

    TimeState step(const TimeState& state, const ProblemData& data, StepReport* report = nullptr) const;

    /// y = S^{-1} b through preconditioned BiCGStab(l).
    Vector solve_schur(const Vector& b, KrylovReport& report) const;

    const SchurOperator& schur() const { return schur_; }
    const Preconditioner* preconditioner() const { return precond_ ? &*precond_ : nullptr; }
    const StepOptions& options() const { return opts_; }

private:
    const SystemBlocks* b_;
    StepOptions opts_;
    SchurOperator schur_;
    std::optional<Preconditioner> precond_;
};

} // namespace fpsi
