#include "fpsi/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace fpsi {

std::string format_number(double x)
{
    if (!std::isfinite(x)) return "N/A";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows)
{
    os << "dx,err_eta_l2,rate,err_eta_h1,rate,err_pp_l2,rate,err_pp_h1,rate,err_u_l2,rate,err_u_h1,rate,err_pf_l2,"
          "rate\n";
    const double na = std::nan("");
    for (const ConvergenceRow& r : rows) {
        os << format_number(r.dx);
        const double cells[] = {r.eta.l2, r.rate_eta_l2, r.eta.h1, r.rate_eta_h1, r.pp.l2, r.rate_pp_l2,
                                r.pp.h1,  r.rate_pp_h1,  r.u.l2,   r.rate_u_l2,   r.u.h1,  r.rate_u_h1,
                                r.pf_l2,  r.rate_pf_l2};
        for (double c : cells) os << ',' << format_number(r.ok ? c : na);
        os << '\n';
    }
}

void write_precond_csv(std::ostream& os, const std::vector<PrecondRow>& rows)
{
    os << "dx,cond_S,iters_S,cond_noLB,iters_noLB,cond_LB,iters_LB\n";
    const double na = std::nan("");
    for (const PrecondRow& r : rows) {
        os << format_number(r.dx);
        for (const VariantResult* v : {&r.none, &r.pre, &r.pre_lb}) {
            os << ',' << format_number(r.ok ? v->cond : na);
            os << ',' << format_number(r.ok && v->all_converged ? v->avg_iterations : na);
        }
        os << '\n';
    }
}

void write_residuals_csv(std::ostream& os, const std::vector<PrecondRow>& rows, PrecondVariant variant, int l)
{
    os << "dx,inner_step,iteration,relative_residual\n";
    for (const PrecondRow& r : rows) {
        if (!r.ok) continue;
        const VariantResult& v = variant == PrecondVariant::None  ? r.none
                                 : variant == PrecondVariant::Pre ? r.pre
                                                                  : r.pre_lb;
        for (std::size_t k = 0; k < v.history.size(); ++k) {
            os << format_number(r.dx) << ',' << k << ',' << format_number(static_cast<double>(k) / l) << ','
               << format_number(v.history[k]) << '\n';
        }
    }
}

void write_hydro_csv(std::ostream& os, const std::vector<HydroStepDiag>& steps)
{
    os << "step,time,krylov_iters,residual,row_residual,converged,u_max,eta_max,pp_min,pp_max,pf_min,pf_max\n";
    for (const HydroStepDiag& d : steps) {
        os << d.step << ',' << format_number(d.t) << ',' << format_number(d.krylov_iterations) << ','
           << format_number(d.krylov_residual) << ',' << format_number(d.row_residual) << ',' << (d.converged ? 1 : 0);
        for (double x : {d.u_max, d.eta_max, d.pp_min, d.pp_max, d.pf_min, d.pf_max}) os << ',' << format_number(x);
        os << '\n';
    }
}

void write_text_file(const std::string& path, const std::string& contents)
{
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + path + "' for writing");
    f << contents;
    if (!f) throw ConfigError("failed while writing '" + path + "'");
}

} // namespace fpsi
