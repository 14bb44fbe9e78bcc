#include "fpsi/cli.hpp"
#include "fpsi/config.hpp"
#include "fpsi/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fpsi {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string path_in(const RunConfig& c, const std::string& name) { return (fs::path(c.out_dir) / name).string(); }

template <class Fn>
void write_csv(const std::string& path, Fn fn)
{
    std::ostringstream os;
    fn(os);
    write_text_file(path, os.str());
}

void write_summary(const RunConfig& c, json summary)
{
    summary["config"] = json::parse(c.to_json_text());
    write_text_file(path_in(c, "summary_" + c.command + ".json"), summary.dump(2) + "\n");
}

int single_mesh(const RunConfig& c)
{
    const std::vector<int> m = c.resolved_meshes();
    if (m.size() != 1) throw ConfigError(c.command + " takes exactly one --dx");
    return m.front();
}

int cmd_converge(const RunConfig& c, std::ostream& out)
{
    ConvergenceConfig cc;
    cc.dt = c.resolved_dt();
    cc.t_final = c.resolved_t_final();
    cc.meshes = c.resolved_meshes();
    cc.step = c.step_options();
    cc.params = c.resolved_params(PhysicalParams{});
    const std::vector<ConvergenceRow> rows = run_convergence_space(cc);

    write_csv(path_in(c, "convergence.csv"), [&](std::ostream& os) { write_convergence_csv(os, rows); });
    json jr = json::array();
    bool all_ok = true;
    for (const ConvergenceRow& r : rows) {
        all_ok = all_ok && r.ok;
        jr.push_back({{"dx", r.dx},
                      {"ok", r.ok},
                      {"error", r.error},
                      {"err_eta_l2", num(r.eta.l2)},
                      {"err_eta_h1", num(r.eta.h1)},
                      {"err_pp_l2", num(r.pp.l2)},
                      {"err_pp_h1", num(r.pp.h1)},
                      {"err_u_l2", num(r.u.l2)},
                      {"err_u_h1", num(r.u.h1)},
                      {"err_pf_l2", num(r.pf_l2)},
                      {"rate_eta_l2", num(r.rate_eta_l2)},
                      {"rate_eta_h1", num(r.rate_eta_h1)},
                      {"rate_pp_l2", num(r.rate_pp_l2)},
                      {"rate_pp_h1", num(r.rate_pp_h1)},
                      {"rate_u_l2", num(r.rate_u_l2)},
                      {"rate_u_h1", num(r.rate_u_h1)},
                      {"rate_pf_l2", num(r.rate_pf_l2)},
                      {"avg_iterations", num(r.avg_iterations)},
                      {"max_row_residual", num(r.max_row_residual)},
                      {"seconds", r.seconds}});
        out << "dx = 1/" << r.n << (r.ok ? "" : "  FAILED: " + r.error) << '\n';
        if (r.ok) {
            out << std::scientific << std::setprecision(3) << "  eta " << r.eta.l2 << " / " << r.eta.h1 << "  p_p "
                << r.pp.l2 << " / " << r.pp.h1 << "  u " << r.u.l2 << " / " << r.u.h1 << "  p_f " << r.pf_l2
                << "  iterations " << std::defaultfloat << r.avg_iterations << '\n';
        }
    }
    write_summary(c, {{"rows", jr}, {"ok", all_ok}});
    return all_ok ? exit_ok : exit_numerical;
}

int cmd_precond(const RunConfig& c, std::ostream& out)
{
    PrecondStudyConfig pc;
    pc.dt = c.resolved_dt();
    pc.t_final = c.resolved_t_final();
    pc.meshes = c.resolved_meshes();
    pc.krylov = c.krylov;
    pc.krylov.seed = c.seed;
    pc.params = c.resolved_params(PhysicalParams{});
    pc.scale_lower_block_by_dt = c.scale_lower_block_by_dt;
    pc.scale_interface_rows = c.scale_interface_rows;
    const std::vector<PrecondRow> rows = run_precond_study(pc);

    write_csv(path_in(c, "precond.csv"), [&](std::ostream& os) { write_precond_csv(os, rows); });
    for (PrecondVariant v : {PrecondVariant::None, PrecondVariant::Pre, PrecondVariant::PreLowerBlock}) {
        write_csv(path_in(c, std::string("residuals_") + to_string(v) + ".csv"),
                  [&](std::ostream& os) { write_residuals_csv(os, rows, v, pc.krylov.l); });
    }
    json jr = json::array();
    bool all_ok = true;
    for (const PrecondRow& r : rows) {
        all_ok = all_ok && r.ok;
        json row{{"dx", r.dx}, {"ok", r.ok}, {"error", r.error}, {"schur_dim", r.schur_dim}};
        out << "dx = 1/" << r.n << (r.ok ? "" : "  FAILED: " + r.error) << '\n';
        for (const VariantResult* v : {&r.none, &r.pre, &r.pre_lb}) {
            row[to_string(v->variant)] = {{"cond", num(v->cond)},
                                          {"avg_iterations", num(v->avg_iterations)},
                                          {"all_converged", v->all_converged}};
            if (r.ok) {
                out << "  " << std::setw(6) << to_string(v->variant) << "  cond " << std::scientific
                    << std::setprecision(4) << v->cond << std::defaultfloat << "  iterations "
                    << (v->all_converged ? format_number(v->avg_iterations) : "N/A") << '\n';
            }
        }
        jr.push_back(row);
    }
    write_summary(c, {{"rows", jr}, {"ok", all_ok}});
    return all_ok ? exit_ok : exit_numerical;
}

int cmd_hydro(const RunConfig& c, std::ostream& out)
{
    HydroConfig hc;
    hc.which = c.hydro_case;
    hc.dt = c.resolved_dt();
    hc.t_final = c.resolved_t_final();
    hc.n = single_mesh(c);
    hc.inflow_peak = c.inflow_peak;
    hc.params = c.resolved_params(HydroCase::make(c.hydro_case).params);
    hc.step = c.step_options();
    hc.vtk_dir = path_in(c, "vtk");
    hc.vtk_every = c.vtk_every;
    const HydroResult r = run_hydro(hc);

    write_csv(path_in(c, "hydro_diagnostics.csv"), [&](std::ostream& os) { write_hydro_csv(os, r.steps); });
    json probe = json::array();
    if (r.completed) {
        const auto line = pore_pressure_probe(*r.disc, r.final_state, 1.0, 41);
        write_csv(path_in(c, "pore_pressure_probe.csv"), [&](std::ostream& os) {
            os << "y,p_p\n";
            for (const auto& [y, p] : line) os << format_number(y) << ',' << format_number(p) << '\n';
        });
        for (const auto& [y, p] : line) probe.push_back({num(y), num(p)});
    }
    double iters = 0.0;
    for (const HydroStepDiag& d : r.steps) iters += d.krylov_iterations;
    const double avg = r.steps.empty() ? 0.0 : iters / r.steps.size();
    out << "hydro case " << c.hydro_case << ": " << r.steps.size() << " steps, average iterations " << avg << '\n';
    if (!r.completed) out << "FAILED: " << r.error << '\n';
    write_summary(c, {{"completed", r.completed},
                      {"error", r.error},
                      {"steps", r.steps.size()},
                      {"avg_iterations", num(avg)},
                      {"vtk_files", r.vtk_files},
                      {"pore_pressure_probe_x1", probe}});
    return r.completed ? exit_ok : exit_numerical;
}

int cmd_oracle(const RunConfig& c, std::ostream& out)
{
    OracleConfig oc;
    oc.dt = c.resolved_dt();
    oc.n = single_mesh(c);
    const TimeConfig tc = TimeConfig::from(oc.dt, c.resolved_t_final());
    oc.steps = tc.n_steps;
    oc.step = c.step_options();
    oc.params = c.resolved_params(PhysicalParams{});
    const OracleResult r = run_oracle_check(oc);

    const bool pass = r.max() < 1e-6;
    json diffs;
    out << "partitioned vs monolithic, dx = 1/" << oc.n << ", " << oc.steps << " steps\n";
    for (std::size_t i = 0; i < r.max_diff.size(); ++i) {
        diffs[state_vector_names()[i]] = num(r.max_diff[i]);
        out << "  " << std::setw(7) << state_vector_names()[i] << "  " << format_number(r.max_diff[i]) << '\n';
    }
    out << "  cond(S M^-1) " << (std::isfinite(r.cond_precond) ? format_number(r.cond_precond) : "not probed")
        << "\n  " << (pass ? "PASS" : "FAIL") << " (threshold 1e-6)\n";
    write_summary(c, {{"max_relative_difference", diffs},
                      {"max", num(r.max())},
                      {"max_row_residual", num(r.max_row_residual)},
                      {"avg_iterations", num(r.avg_iterations)},
                      {"cond_precond", num(r.cond_precond)},
                      {"pass", pass}});
    return pass ? exit_ok : exit_numerical;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Partitioned Stokes-Biot solver: convergence, preconditioner and hydrology studies"};
    app.require_subcommand(1);

    struct Flags {
        std::string config;
        double dt = 0.0, t_final = 0.0;
        std::vector<std::string> dx;
        std::string precond;
        int which = 1;
        std::string out_dir;
        std::uint64_t seed = 0;
        int vtk_every = 0;
        bool corrupt_w4 = false;
    } f;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"converge", "spatial convergence study on the manufactured solution"},
        {"precond-study", "condition numbers and iteration counts of the three preconditioner variants"},
        {"hydro", "surface/subsurface flow example"},
        {"oracle-check", "partitioned steps against the monolithic direct solve"}};
    std::vector<CLI::App*> subs;
    for (const auto& [name, desc] : commands) {
        CLI::App* s = app.add_subcommand(name, desc);
        s->add_option("--config", f.config, "JSON config file; flags override its values");
        s->add_option("--dt", f.dt, "time step")->check(CLI::PositiveNumber);
        s->add_option("--t-final", f.t_final, "final time")->check(CLI::PositiveNumber);
        s->add_option("--dx", f.dx, "mesh size, e.g. 1/8 or 0.125 (repeatable)")->take_all();
        s->add_option("--precond", f.precond, "none, pre or pre-lb");
        s->add_option("--case", f.which, "hydro case (1 or 2)")->check(CLI::IsMember({1, 2}));
        s->add_option("--out", f.out_dir, "output directory");
        s->add_option("--seed", f.seed, "seed of the BiCGStab restart shadow vector");
        if (name == "hydro") s->add_option("--vtk-every", f.vtk_every, "VTK snapshot interval in steps");
        if (name == "oracle-check") s->add_flag("--corrupt-w4", f.corrupt_w4, "flip the sign of w4 (test hook)");
        subs.push_back(s);
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    CLI::App* sub = nullptr;
    for (CLI::App* s : subs)
        if (s->parsed()) sub = s;
    auto set = [&](const char* flag) { return sub->count(flag) > 0; };

    try {
        RunConfig c;
        if (set("--config")) c = RunConfig::from_json_text(read_file(f.config));
        if (!c.command.empty() && c.command != sub->get_name())
            throw ConfigError("config file is for '" + c.command + "', not '" + sub->get_name() + "'");
        c.command = sub->get_name();
        if (set("--dt")) c.dt = f.dt;
        if (set("--t-final")) c.t_final = f.t_final;
        if (set("--dx")) {
            c.meshes.emplace();
            for (const std::string& d : f.dx) c.meshes->push_back(mesh_count_from_dx(d));
        }
        if (set("--precond")) c.precond = parse_precond_variant(f.precond);
        if (set("--case")) c.hydro_case = f.which;
        if (set("--out")) c.out_dir = f.out_dir;
        if (set("--seed")) c.seed = f.seed;
        if (c.command == "hydro" && set("--vtk-every")) c.vtk_every = f.vtk_every;
        if (c.command == "oracle-check" && f.corrupt_w4) c.corrupt_w4_sign = true;

        if (c.resolved_meshes().empty()) throw ConfigError("empty mesh list");
        for (int n : c.resolved_meshes())
            if (n < 1) throw ConfigError("mesh counts must be positive");
        if (c.hydro_case != 1 && c.hydro_case != 2) throw ConfigError("--case must be 1 or 2");
        c.resolved_params(PhysicalParams{});
        TimeConfig::from(c.resolved_dt(), c.resolved_t_final());

        if (c.command == "converge") return cmd_converge(c, out);
        if (c.command == "precond-study") return cmd_precond(c, out);
        if (c.command == "hydro") return cmd_hydro(c, out);
        return cmd_oracle(c, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    }
}

} // namespace fpsi
