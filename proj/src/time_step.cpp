#include "fpsi/time_step.hpp"

#include <sstream>

namespace fpsi {

PartitionedSolver::PartitionedSolver(const SystemBlocks& blocks, StepOptions opts)
    : b_(&blocks), opts_(opts), schur_(blocks)
{
    if (opts_.precond != PrecondVariant::None) {
        PrecondConfig cfg;
        cfg.include_lower_block = opts_.precond == PrecondVariant::PreLowerBlock;
        cfg.scale_lower_block_by_dt = opts_.scale_lower_block_by_dt;
        precond_.emplace(blocks, cfg);
    }
}

Vector PartitionedSolver::solve_schur(const Vector& b, KrylovReport& report) const
{
    const SystemBlocks& blk = *b_;
    if (!precond_ || !opts_.scale_interface_rows) {
        LinearOperator apply = [this](const Vector& y) { return schur_.apply(y); };
        LinearOperator precond;
        if (precond_) precond = [this](const Vector& x) { return precond_->apply_inverse(x); };
        Vector y = bicgstab_l(apply, precond, b, opts_.krylov, report);
        report.schur_residual = report.final_residual;
        return y;
    }
    Vector d = Vector::Ones(blk.schur_dim());
    d.segment(blk.n_pf, blk.n_gamma()).setConstant(1.0 / blk.dt);
    LinearOperator apply = [&](const Vector& y) { return Vector(d.cwiseProduct(schur_.apply(y))); };
    LinearOperator precond = [&](const Vector& x) { return precond_->apply_inverse(x.cwiseQuotient(d)); };
    Vector y = bicgstab_l(apply, precond, Vector(d.cwiseProduct(b)), opts_.krylov, report);
    const double bnorm = b.norm();
    report.schur_residual = bnorm > 0.0 ? (b - schur_.apply(y)).norm() / bnorm : 0.0;
    return y;
}

TimeState PartitionedSolver::step(const TimeState& state, const ProblemData& data, StepReport* report) const
{
    const SystemBlocks& b = *b_;
    RhsVectors rhs = build_rhs(b, state, data);
    RhsVectors used = rhs;
    if (opts_.corrupt_w4_sign) used.a.segment(b.n_pf, b.n_gamma()) -= 2.0 * rhs.w4;

    const Vector bs = schur_rhs(b, used);
    // Residual scale for reporting is always the uncorrupted Schur rhs.
    const double bs_norm = opts_.corrupt_w4_sign ? schur_rhs(b, rhs).norm() : bs.norm();
    KrylovReport kr;
    const Vector y = solve_schur(bs, kr);
    if (!kr.converged && opts_.require_convergence) {
        std::ostringstream os;
        os << "Schur solve did not converge at step " << state.step + 1 << " (t = " << state.t + b.dt
           << "): relative residual " << (kr.residual_history.empty() ? 0.0 : kr.residual_history.back())
           << " after " << kr.iterations << " iterations";
        if (!kr.message.empty()) os << " (" << kr.message << ")";
        throw KrylovError(os.str(), kr);
    }
    TimeState next = recover_primal(b, state, used, y, opts_.block_variant);
    if (report) {
        report->krylov = std::move(kr);
        report->residuals = row_residuals(b, rhs, next, bs_norm);
    }
    return next;
}

} // namespace fpsi
