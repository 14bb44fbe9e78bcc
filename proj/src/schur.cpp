#include "fpsi/schur.hpp"

#include <cmath>
#include <random>

namespace fpsi {

Vector SchurOperator::apply(const Vector& y) const
{
    const SystemBlocks& b = *b_;
    const double dt = b.dt;
    if (y.size() != b.schur_dim()) throw ConfigError("SchurOperator::apply: dimension mismatch");
    const Vector pf = y.head(b.n_pf);
    const Vector g = y.segment(b.n_pf, b.n_gamma());
    const Vector lam = y.tail(b.n_lambda);

    const Vector z1 = b.W_f_factor.solve(b.P_f * pf + b.G_u.transpose() * g);
    const Vector z2 = b.W_eta_factor.solve(b.G_eta.transpose() * g);
    const Vector z3 = b.T_p.solve(dt * (b.P_p.transpose() * z2) + b.G_p.transpose() * lam);
    const Vector z4 = b.W_eta_factor.solve(b.P_p * z3);

    Vector out(b.schur_dim());
    out.head(b.n_pf) = dt * (b.P_f.transpose() * z1);
    out.segment(b.n_pf, b.n_gamma()) = dt * (b.M_g * g) + (dt * dt) * (b.G_u * z1) +
                                       (dt * dt) * (b.G_eta * (z2 - dt * z4)) - dt * (b.G_lambda * lam);
    out.tail(b.n_lambda) = b.G_lambda.transpose() * g + dt * (b.G_p * z3);
    return out;
}

const char* to_string(PrecondVariant v)
{
    switch (v) {
    case PrecondVariant::None: return "none";
    case PrecondVariant::Pre: return "pre";
    case PrecondVariant::PreLowerBlock: return "pre-lb";
    }
    return "?";
}

PrecondVariant parse_precond_variant(const std::string& s)
{
    if (s == "none") return PrecondVariant::None;
    if (s == "pre") return PrecondVariant::Pre;
    if (s == "pre-lb" || s == "pre+lb") return PrecondVariant::PreLowerBlock;
    throw ConfigError("unknown preconditioner variant '" + s + "' (expected none, pre or pre-lb)");
}

Preconditioner::Preconditioner(const SystemBlocks& blocks, PrecondConfig cfg) : b_(&blocks), cfg_(cfg)
{
    if (!blocks.PWP_factor) throw ConfigError("Preconditioner: the system was built without the P_f^T W_f^{-1} P_f factor");
}

Vector Preconditioner::apply_inverse(const Vector& x) const
{
    const SystemBlocks& b = *b_;
    const double dt = b.dt;
    if (x.size() != b.schur_dim()) throw ConfigError("Preconditioner::apply_inverse: dimension mismatch");
    const Vector x1 = x.head(b.n_pf);
    const Vector x21 = x.segment(b.n_pf, b.n_g1);
    const Vector x22 = x.segment(b.n_pf + b.n_g1, b.n_g2);
    const Vector x3 = x.tail(b.n_lambda);

    // G_1lambda is a symmetric mass matrix, so its transpose solve is the same.
    const Vector a3 = -(1.0 / dt) * b.G_1lambda_factor.solve(x21);
    const Vector a22 = (1.0 / dt) * b.M_g2_factor.solve(x22);
    Vector a21;
    if (cfg_.include_lower_block) {
        const Vector lb = b.G_p * b.T_p.solve(b.G_p.transpose() * a3);
        a21 = b.G_1lambda_factor.solve(x3 - lower_block_factor() * lb);
    } else {
        a21 = b.G_1lambda_factor.solve(x3);
    }
    Vector a2(b.n_gamma());
    a2 << a21, a22;
    const Vector rhs1 = (1.0 / dt) * x1 - b.P_f.transpose() * b.W_f_factor.solve(b.G_u.transpose() * a2);
    const Vector a1 = b.PWP_factor->solve(rhs1);

    Vector a(b.schur_dim());
    a << a1, a21, a22, a3;
    return a;
}

DenseMatrix Preconditioner::dense() const
{
    const SystemBlocks& b = *b_;
    const double dt = b.dt;
    const int n = b.schur_dim();
    const int og = b.n_pf, ol = b.n_pf + b.n_gamma();
    DenseMatrix m = DenseMatrix::Zero(n, n);

    const DenseMatrix pf = to_dense(b.P_f);
    const DenseMatrix gu_t = to_dense(SparseMatrix(b.G_u.transpose()));
    DenseMatrix wf_inv_pf(b.n_u, b.n_pf), wf_inv_gu(b.n_u, b.n_gamma());
    for (int j = 0; j < b.n_pf; ++j) wf_inv_pf.col(j) = b.W_f_factor.solve(pf.col(j));
    for (int j = 0; j < b.n_gamma(); ++j) wf_inv_gu.col(j) = b.W_f_factor.solve(gu_t.col(j));
    m.block(0, 0, b.n_pf, b.n_pf) = dt * pf.transpose() * wf_inv_pf;
    m.block(0, og, b.n_pf, b.n_gamma()) = dt * pf.transpose() * wf_inv_gu;
    m.block(og, og, b.n_gamma(), b.n_gamma()) = dt * to_dense(b.M_g);
    m.block(og, ol, b.n_gamma(), b.n_lambda) = -dt * to_dense(b.G_lambda);
    m.block(ol, og, b.n_lambda, b.n_gamma()) = to_dense(SparseMatrix(b.G_lambda.transpose()));
    if (cfg_.include_lower_block) {
        const DenseMatrix gp_t = to_dense(SparseMatrix(b.G_p.transpose()));
        DenseMatrix tinv(b.n_pp, b.n_lambda);
        for (int j = 0; j < b.n_lambda; ++j) tinv.col(j) = b.T_p.solve(gp_t.col(j));
        m.block(ol, ol, b.n_lambda, b.n_lambda) = lower_block_factor() * (to_dense(b.G_p) * tinv);
    }
    return m;
}

namespace {

bool tiny(double v, double scale)
{
    return !std::isfinite(v) || std::abs(v) <= 1e-300 * std::max(1.0, scale);
}

} // namespace

Vector bicgstab_l(const LinearOperator& apply, const LinearOperator& precond, const Vector& b,
                  const KrylovConfig& cfg, KrylovReport& report)
{
    if (cfg.l < 1) throw ConfigError("bicgstab_l: l must be >= 1");
    if (!(cfg.tol > 0.0)) throw ConfigError("bicgstab_l: tol must be positive");
    if (cfg.max_iter < 1) throw ConfigError("bicgstab_l: max_iter must be >= 1");
    const int l = cfg.l;
    const Eigen::Index n = b.size();
    report = KrylovReport{};

    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        report.converged = true;
        report.iterations = 0.0;
        report.residual_history = {0.0};
        report.final_residual = 0.0;
        return Vector::Zero(n);
    }
    auto minv = [&](const Vector& v) { return precond ? precond(v) : v; };
    auto op = [&](const Vector& v) { return apply(minv(v)); };

    Vector x = Vector::Zero(n); // iterate of the right-preconditioned system
    Vector rt = b;              // shadow vector
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal;

    std::vector<Vector> r(static_cast<std::size_t>(l + 1), Vector::Zero(n));
    std::vector<Vector> u(static_cast<std::size_t>(l + 1), Vector::Zero(n));
    report.residual_history.push_back(1.0);

    int cycle = 0;
    bool restarted = false;
    auto finish = [&](bool converged, double iterations) {
        report.converged = converged;
        report.iterations = iterations;
        const Vector y = minv(x);
        report.final_residual = (b - apply(y)).norm() / bnorm;
        return y;
    };

    while (true) {
        // (Re)start from the current iterate.
        r[0] = b - (x.isZero(0.0) ? Vector::Zero(n) : op(x));
        u[0].setZero();
        double rho0 = 1.0, alpha = 0.0, omega = 1.0;
        bool breakdown = false;

        while (cycle < cfg.max_iter && !breakdown) {
            ++cycle;
            const Vector x_start = x;
            rho0 = -omega * rho0;
            for (int j = 0; j < l; ++j) {
                const double rho1 = r[static_cast<std::size_t>(j)].dot(rt);
                if (tiny(rho0, 1.0) || tiny(rho1, rt.norm() * r[static_cast<std::size_t>(j)].norm() * 1e-16)) {
                    breakdown = true;
                    break;
                }
                const double beta = alpha * rho1 / rho0;
                rho0 = rho1;
                for (int i = 0; i <= j; ++i) u[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)] - beta * u[static_cast<std::size_t>(i)];
                u[static_cast<std::size_t>(j + 1)] = op(u[static_cast<std::size_t>(j)]);
                const double gamma = u[static_cast<std::size_t>(j + 1)].dot(rt);
                if (tiny(gamma, 0.0)) {
                    breakdown = true;
                    break;
                }
                alpha = rho0 / gamma;
                for (int i = 0; i <= j; ++i) r[static_cast<std::size_t>(i)] -= alpha * u[static_cast<std::size_t>(i + 1)];
                x += alpha * u[0];
                const double res = r[0].norm() / bnorm;
                if (!std::isfinite(res)) {
                    breakdown = true;
                    break;
                }
                if (res <= cfg.tol) {
                    report.residual_history.push_back(res);
                    return finish(true, (cycle - 1) + static_cast<double>(j + 1) / l);
                }
                if (j < l - 1) report.residual_history.push_back(res);
                r[static_cast<std::size_t>(j + 1)] = op(r[static_cast<std::size_t>(j)]);
            }
            if (breakdown) {
                x = x_start;
                --cycle;
                break;
            }

            // Minimal-residual polynomial update (modified Gram-Schmidt).
            DenseMatrix tau = DenseMatrix::Zero(l + 1, l + 1);
            Vector sigma = Vector::Zero(l + 1), gp = Vector::Zero(l + 1), gm = Vector::Zero(l + 1),
                   gpp = Vector::Zero(l + 1);
            for (int j = 1; j <= l; ++j) {
                for (int i = 1; i < j; ++i) {
                    tau(i, j) = r[static_cast<std::size_t>(j)].dot(r[static_cast<std::size_t>(i)]) / sigma(i);
                    r[static_cast<std::size_t>(j)] -= tau(i, j) * r[static_cast<std::size_t>(i)];
                }
                sigma(j) = r[static_cast<std::size_t>(j)].squaredNorm();
                if (tiny(sigma(j), 0.0)) {
                    breakdown = true;
                    break;
                }
                gp(j) = r[0].dot(r[static_cast<std::size_t>(j)]) / sigma(j);
            }
            if (breakdown) {
                // The BiCG part advanced x consistently with r[0]; keep it.
                break;
            }
            gm(l) = gp(l);
            omega = gm(l);
            for (int j = l - 1; j >= 1; --j) {
                double s = 0.0;
                for (int i = j + 1; i <= l; ++i) s += tau(j, i) * gm(i);
                gm(j) = gp(j) - s;
            }
            for (int j = 1; j <= l - 1; ++j) {
                double s = 0.0;
                for (int i = j + 1; i <= l - 1; ++i) s += tau(j, i) * gm(i + 1);
                gpp(j) = gm(j + 1) + s;
            }
            x += gm(1) * r[0];
            r[0] -= gp(l) * r[static_cast<std::size_t>(l)];
            u[0] -= gm(l) * u[static_cast<std::size_t>(l)];
            for (int j = 1; j <= l - 1; ++j) {
                u[0] -= gm(j) * u[static_cast<std::size_t>(j)];
                x += gpp(j) * r[static_cast<std::size_t>(j)];
                r[0] -= gp(j) * r[static_cast<std::size_t>(j)];
            }
            const double res = r[0].norm() / bnorm;
            report.residual_history.push_back(res);
            if (!std::isfinite(res) || tiny(omega, 0.0)) {
                breakdown = true;
                break;
            }
            if (res <= cfg.tol) return finish(true, cycle);
        }

        if (!breakdown) {
            report.message = "maximum number of iterations reached";
            return finish(false, cfg.max_iter);
        }
        if (restarted) {
            report.message = "breakdown after restart";
            return finish(false, cycle);
        }
        restarted = true;
        ++report.restarts;
        for (Eigen::Index i = 0; i < n; ++i) rt[i] = normal(rng);
        if (!x.allFinite()) x.setZero();
    }
}

} // namespace fpsi
