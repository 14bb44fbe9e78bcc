#include "fpsi/studies.hpp"
#include "fpsi/vtk.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <sstream>

namespace fpsi {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const Discretization> make_disc(std::pair<SubdomainMesh, SubdomainMesh> meshes, const Degrees& deg)
{
    return std::make_shared<const Discretization>(
        build_discretization(std::move(meshes.first), std::move(meshes.second), deg));
}

} // namespace

double observed_rate(double e0, double e1, double dx0, double dx1)
{
    if (!(e0 > 0.0) || !(e1 > 0.0)) return nan_value;
    return std::log(e0 / e1) / std::log(dx0 / dx1);
}

std::vector<ConvergenceRow> run_convergence_space(const ConvergenceConfig& cfg)
{
    if (cfg.meshes.empty()) throw ConfigError("convergence study: empty mesh list");
    const TimeConfig tc = TimeConfig::from(cfg.dt, cfg.t_final);
    ManufacturedCase mc;
    mc.params = cfg.params;
    std::vector<ConvergenceRow> rows;
    for (int n : cfg.meshes) {
        ConvergenceRow row;
        row.n = n;
        row.dx = 1.0 / n;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const auto disc = make_disc(mc.meshes(n), mc.degrees);
            const SystemBlocks blocks = build_system(disc, mc.params, cfg.dt);
            const PartitionedSolver solver(blocks, cfg.step);
            const ProblemData data = mc.data();
            TimeState s = mc.initial_state(blocks);
            double iters = 0.0;
            for (int k = 0; k < tc.n_steps; ++k) {
                StepReport rep;
                s = solver.step(s, data, &rep);
                iters += rep.krylov.iterations;
                row.max_row_residual = std::max(row.max_row_residual, rep.residuals.relative);
                row.max_normwise_row_residual = std::max(row.max_normwise_row_residual, rep.residuals.max());
            }
            row.avg_iterations = iters / tc.n_steps;
            const double t = s.t;
            row.eta = error_norms(disc->eta, s.eta, VectorField([&](const Vec2& x) { return mc.eta(t, x); }),
                                  VectorGradient([&](const Vec2& x) { return mc.grad_eta(t, x); }));
            row.pp = error_norms(disc->pp, s.pp, ScalarField([&](const Vec2& x) { return mc.pp(t, x); }),
                                 ScalarGradient([&](const Vec2& x) { return mc.grad_pp(t, x); }));
            row.u = error_norms(disc->u, s.u, VectorField([&](const Vec2& x) { return mc.u(t, x); }),
                                VectorGradient([&](const Vec2& x) { return mc.grad_u(t, x); }));
            row.pf_l2 = error_norms(disc->pf, s.pf, ScalarField([&](const Vec2& x) { return mc.pf(t, x); }),
                                    ScalarGradient([&](const Vec2& x) { return mc.grad_pf(t, x); }))
                            .l2;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        row.seconds = seconds_since(t0);
        rows.push_back(row);
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        ConvergenceRow& r = rows[k];
        if (k == 0 || !r.ok || !rows[k - 1].ok) {
            r.rate_eta_l2 = r.rate_eta_h1 = r.rate_pp_l2 = r.rate_pp_h1 = r.rate_u_l2 = r.rate_u_h1 = r.rate_pf_l2 =
                nan_value;
            continue;
        }
        const ConvergenceRow& p = rows[k - 1];
        r.rate_eta_l2 = observed_rate(p.eta.l2, r.eta.l2, p.dx, r.dx);
        r.rate_eta_h1 = observed_rate(p.eta.h1, r.eta.h1, p.dx, r.dx);
        r.rate_pp_l2 = observed_rate(p.pp.l2, r.pp.l2, p.dx, r.dx);
        r.rate_pp_h1 = observed_rate(p.pp.h1, r.pp.h1, p.dx, r.dx);
        r.rate_u_l2 = observed_rate(p.u.l2, r.u.l2, p.dx, r.dx);
        r.rate_u_h1 = observed_rate(p.u.h1, r.u.h1, p.dx, r.dx);
        r.rate_pf_l2 = observed_rate(p.pf_l2, r.pf_l2, p.dx, r.dx);
    }
    return rows;
}

std::vector<PrecondRow> run_precond_study(const PrecondStudyConfig& cfg)
{
    if (cfg.meshes.empty()) throw ConfigError("preconditioner study: empty mesh list");
    const TimeConfig tc = TimeConfig::from(cfg.dt, cfg.t_final);
    ManufacturedCase mc;
    mc.params = cfg.params;
    std::vector<PrecondRow> rows;
    for (int n : cfg.meshes) {
        PrecondRow row;
        row.n = n;
        row.dx = 1.0 / n;
        try {
            const auto disc = make_disc(mc.meshes(n), mc.degrees);
            const SystemBlocks blocks = build_system(disc, mc.params, cfg.dt);
            row.schur_dim = blocks.schur_dim();
            const ProblemData data = mc.data();
            for (VariantResult* v : {&row.none, &row.pre, &row.pre_lb}) {
                v->variant = v == &row.none  ? PrecondVariant::None
                             : v == &row.pre ? PrecondVariant::Pre
                                             : PrecondVariant::PreLowerBlock;
                StepOptions opts;
                opts.precond = v->variant;
                opts.scale_lower_block_by_dt = cfg.scale_lower_block_by_dt;
                opts.scale_interface_rows = cfg.scale_interface_rows;
                opts.krylov = cfg.krylov;
                opts.require_convergence = false;
                const PartitionedSolver solver(blocks, opts);

                v->cond = nan_value;
                if (row.schur_dim <= cfg.probe_cap) {
                    const Preconditioner* m = solver.preconditioner();
                    const SchurOperator& op = solver.schur();
                    const DenseMatrix probed = probe_dense(
                        [&](const Vector& x) { return m ? op.apply(m->apply_inverse(x)) : op.apply(x); }, row.schur_dim,
                        cfg.probe_cap);
                    v->cond = cond2(probed);
                }

                TimeState s = mc.initial_state(blocks);
                double iters = 0.0;
                for (int k = 0; k < tc.n_steps; ++k) {
                    StepReport rep;
                    s = solver.step(s, data, &rep);
                    iters += rep.krylov.iterations;
                    v->all_converged = v->all_converged && rep.krylov.converged;
                    if (k == 0) v->history = rep.krylov.residual_history;
                }
                v->avg_iterations = iters / tc.n_steps;
            }
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

double max_relative_difference(const Vector& a, const Vector& b)
{
    if (a.size() != b.size()) throw ConfigError("max_relative_difference: size mismatch");
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

const std::array<const char*, 7>& state_vector_names()
{
    static const std::array<const char*, 7> names{"u", "eta", "p_p", "p_f", "g1", "g2", "lambda"};
    return names;
}

double OracleResult::max() const { return *std::max_element(max_diff.begin(), max_diff.end()); }

OracleResult run_oracle_check(const OracleConfig& cfg)
{
    if (cfg.steps < 1) throw ConfigError("oracle check: need at least one step");
    ManufacturedCase mc;
    mc.params = cfg.params;
    const auto disc = make_disc(mc.meshes(cfg.n), mc.degrees);
    const SystemBlocks blocks = build_system(disc, mc.params, cfg.dt);
    const PartitionedSolver solver(blocks, cfg.step);
    const ProblemData data = mc.data();

    OracleResult res;
    res.schur_dim = blocks.schur_dim();
    res.cond_precond = nan_value;
    if (res.schur_dim <= cfg.probe_cap) {
        const Preconditioner* m = solver.preconditioner();
        const SchurOperator& op = solver.schur();
        res.cond_precond = cond2(probe_dense(
            [&](const Vector& x) { return m ? op.apply(m->apply_inverse(x)) : op.apply(x); }, res.schur_dim,
            cfg.probe_cap));
    }
    TimeState part = mc.initial_state(blocks);
    TimeState mono = part;
    double iters = 0.0;
    for (int k = 0; k < cfg.steps; ++k) {
        StepReport rep;
        part = solver.step(part, data, &rep);
        mono = monolithic_step(blocks, mono, data);
        iters += rep.krylov.iterations;
        res.max_row_residual = std::max(res.max_row_residual, rep.residuals.relative);
        const std::array<std::pair<const Vector*, const Vector*>, 7> pairs{
            {{&part.u, &mono.u},
             {&part.eta, &mono.eta},
             {&part.pp, &mono.pp},
             {&part.pf, &mono.pf},
             {&part.g1, &mono.g1},
             {&part.g2, &mono.g2},
             {&part.lambda, &mono.lambda}}};
        for (std::size_t i = 0; i < pairs.size(); ++i)
            res.max_diff[i] = std::max(res.max_diff[i], max_relative_difference(*pairs[i].first, *pairs[i].second));
    }
    res.avg_iterations = iters / cfg.steps;
    return res;
}

Vec2 darcy_velocity(const Discretization& d, const PhysicalParams& p, const TimeState& s, double dt, int t,
                    const std::array<double, 3>& bary)
{
    const Vec2 eta_t = (evaluate_vector(d.eta, s.eta, t, bary) - evaluate_vector(d.eta, s.eta_prev, t, bary)) / dt;
    return eta_t - p.kappa * evaluate_scalar_gradient(d.pp, s.pp, t, bary);
}

std::vector<std::pair<double, double>> pore_pressure_probe(const Discretization& d, const TimeState& s, double x0,
                                                           int samples)
{
    if (samples < 2) throw ConfigError("pore_pressure_probe: need at least two samples");
    const SubdomainMesh& m = *d.mesh_p;
    std::vector<ElementGeometry> geo;
    geo.reserve(m.num_triangles());
    for (int t = 0; t < m.num_triangles(); ++t) geo.push_back(element_geometry(m, t));
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i < samples; ++i) {
        const double y = m.rect.y0 + (m.rect.y1 - m.rect.y0) * i / (samples - 1);
        const Vec2 x(x0, y);
        bool found = false;
        for (int t = 0; t < m.num_triangles() && !found; ++t) {
            const auto b = barycentric_of(geo[t], x);
            if (b[0] < -1e-12 || b[1] < -1e-12 || b[2] < -1e-12) continue;
            out.emplace_back(y, evaluate_scalar(d.pp, s.pp, t, b));
            found = true;
        }
        if (!found) throw ConfigError("pore_pressure_probe: point outside the structure mesh");
    }
    return out;
}

HydroResult run_hydro(const HydroConfig& cfg)
{
    const TimeConfig tc = TimeConfig::from(cfg.dt, cfg.t_final);
    HydroCase hc = HydroCase::make(cfg.which);
    hc.inflow_peak = cfg.inflow_peak;
    if (cfg.params) hc.params = *cfg.params;
    HydroResult res;
    res.params = hc.params;
    res.disc = make_disc(hc.meshes(cfg.n), hc.degrees);
    const SystemBlocks blocks = build_system(res.disc, hc.params, cfg.dt);
    const PartitionedSolver solver(blocks, cfg.step);
    const ProblemData data = hc.data();
    if (!cfg.vtk_dir.empty()) std::filesystem::create_directories(cfg.vtk_dir);

    TimeState s = zero_state(blocks);
    res.final_state = s;
    auto snapshot = [&](const TimeState& st) {
        std::ostringstream name;
        name << "hydro_case" << cfg.which << "_step" << std::setw(4) << std::setfill('0') << st.step << ".vtk";
        const std::string path = (std::filesystem::path(cfg.vtk_dir) / name.str()).string();
        write_vtk_snapshot(path, *res.disc, hc.params, st, cfg.dt, "hydro case " + std::to_string(cfg.which));
        res.vtk_files.push_back(path);
    };
    try {
        for (int k = 0; k < tc.n_steps; ++k) {
            StepReport rep;
            TimeState next = solver.step(s, data, &rep);
            const bool finite = next.u.allFinite() && next.eta.allFinite() && next.pp.allFinite() &&
                                next.pf.allFinite() && next.g1.allFinite() && next.g2.allFinite() &&
                                next.lambda.allFinite();
            if (!finite) {
                std::ostringstream os;
                os << "non-finite values at step " << next.step << " (t = " << next.t << "); last valid step "
                   << s.step;
                throw NumericalError(os.str());
            }
            s = std::move(next);
            HydroStepDiag dg;
            dg.step = s.step;
            dg.t = s.t;
            dg.krylov_iterations = rep.krylov.iterations;
            dg.krylov_residual = rep.krylov.final_residual;
            dg.converged = rep.krylov.converged;
            dg.row_residual = rep.residuals.relative;
            dg.u_max = s.u.cwiseAbs().maxCoeff();
            dg.eta_max = s.eta.cwiseAbs().maxCoeff();
            dg.pp_min = s.pp.minCoeff();
            dg.pp_max = s.pp.maxCoeff();
            dg.pf_min = s.pf.minCoeff();
            dg.pf_max = s.pf.maxCoeff();
            res.steps.push_back(dg);
            res.reports.push_back(std::move(rep.krylov));
            res.final_state = s;
            if (!cfg.vtk_dir.empty() && cfg.vtk_every > 0 && (s.step % cfg.vtk_every == 0 || k + 1 == tc.n_steps))
                snapshot(s);
        }
        res.completed = true;
    } catch (const std::exception& e) {
        res.error = e.what();
    }
    return res;
}

} // namespace fpsi
