#include "fpsi/cli.hpp"
#include "fpsi/config.hpp"
#include "fpsi/report.hpp"
#include "fpsi/vtk.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fpsi;
namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Every data cell is either N/A or a number that parses completely.
void expect_numeric_cells(const std::vector<std::vector<std::string>>& rows)
{
    for (std::size_t r = 1; r < rows.size(); ++r) {
        for (const std::string& c : rows[r]) {
            if (c == "N/A") continue;
            std::size_t used = 0;
            EXPECT_NO_THROW((void)std::stod(c, &used)) << c;
            EXPECT_EQ(used, c.size()) << c;
        }
    }
}

fs::path scratch_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("fpsi_test_" + name);
    fs::remove_all(p);
    return p;
}

struct Cli {
    int code = 0;
    std::string out, err;
};

Cli cli(const std::vector<std::string>& args)
{
    std::ostringstream o, e;
    Cli r;
    r.code = run_cli(args, o, e);
    r.out = o.str();
    r.err = e.str();
    return r;
}

} // namespace

TEST(Format, FullPrecisionRoundTrip)
{
    for (double x : {1.0 / 3.0, 1.8415606091246045e-09, -2.5e300, 0.0}) {
        const std::string s = format_number(x);
        EXPECT_EQ(std::stod(s), x) << s;
        EXPECT_NE(s.find('e'), std::string::npos);
    }
    EXPECT_EQ(format_number(std::nan("")), "N/A");
    EXPECT_EQ(format_number(INFINITY), "N/A");
}

TEST(Csv, ConvergenceLayout)
{
    ConvergenceRow a, b, c;
    a.dx = 0.5;
    a.eta.l2 = 1e-3;
    a.rate_eta_l2 = std::nan("");
    b.dx = 0.25;
    b.eta.l2 = 1.25e-4;
    b.rate_eta_l2 = 3.0;
    c.dx = 0.125;
    c.ok = false;
    std::ostringstream os;
    write_convergence_csv(os, {a, b, c});
    const auto rows = parse_csv(os.str());
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].size(), 15u);
    EXPECT_EQ(rows[0][0], "dx");
    EXPECT_EQ(rows[0][1], "err_eta_l2");
    EXPECT_EQ(rows[0][2], "rate");
    EXPECT_EQ(rows[0][13], "err_pf_l2");
    for (const auto& r : rows) EXPECT_EQ(r.size(), 15u);
    EXPECT_EQ(rows[1][2], "N/A");
    EXPECT_DOUBLE_EQ(std::stod(rows[2][2]), 3.0);
    for (std::size_t k = 1; k < 15; ++k) EXPECT_EQ(rows[3][k], "N/A");
    expect_numeric_cells(rows);
}

TEST(Csv, PrecondMarksNonConvergence)
{
    PrecondRow r;
    r.dx = 0.0625;
    r.none.cond = 5.5e5;
    r.none.avg_iterations = 99.1;
    r.none.all_converged = false;
    r.pre.cond = std::nan("");
    r.pre.avg_iterations = 1.0;
    r.pre_lb.cond = 1.05;
    r.pre_lb.avg_iterations = 1.0;
    std::ostringstream os;
    write_precond_csv(os, {r});
    const auto rows = parse_csv(os.str());
    ASSERT_EQ(rows.size(), 2u);
    const std::vector<std::string> header{"dx", "cond_S", "iters_S", "cond_noLB", "iters_noLB", "cond_LB", "iters_LB"};
    EXPECT_EQ(rows[0], header);
    EXPECT_EQ(rows[1][2], "N/A");
    EXPECT_EQ(rows[1][3], "N/A");
    EXPECT_DOUBLE_EQ(std::stod(rows[1][4]), 1.0);
    expect_numeric_cells(rows);
}

TEST(Csv, ResidualHistoriesStartAtOne)
{
    PrecondRow r;
    r.dx = 0.5;
    r.pre.history = {1.0, 1e-3, 1e-12};
    std::ostringstream os;
    write_residuals_csv(os, {r}, PrecondVariant::Pre, 2);
    const auto rows = parse_csv(os.str());
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_DOUBLE_EQ(std::stod(rows[1][3]), 1.0);
    EXPECT_DOUBLE_EQ(std::stod(rows[3][2]), 1.0);
    expect_numeric_cells(rows);
}

TEST(Csv, HydroDiagnostics)
{
    HydroStepDiag d;
    d.step = 3;
    d.t = 0.18;
    d.krylov_iterations = 2.5;
    std::ostringstream os;
    write_hydro_csv(os, {d});
    const auto rows = parse_csv(os.str());
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0][0], "step");
    EXPECT_EQ(rows[0][2], "krylov_iters");
    EXPECT_EQ(rows[1][0], "3");
    EXPECT_EQ(rows[0].size(), rows[1].size());
    expect_numeric_cells(rows);
}

TEST(Config, JsonRoundTrip)
{
    RunConfig c = RunConfig::from_json_text(
        R"({"command": "converge", "dt": 1e-6, "dx": ["1/2", 0.25], "precond": "pre", "seed": 9,
            "krylov": {"l": 4, "tol": 1e-10}, "params": {"kappa": 0.5}})");
    EXPECT_EQ(c.resolved_dt(), 1e-6);
    EXPECT_EQ(c.resolved_meshes(), (std::vector<int>{2, 4}));
    EXPECT_EQ(c.resolved_precond(), PrecondVariant::Pre);
    EXPECT_EQ(c.krylov.l, 4);
    EXPECT_EQ(c.resolved_params(PhysicalParams{}).kappa, 0.5);
    const RunConfig back = RunConfig::from_json_text(c.to_json_text());
    EXPECT_EQ(back.to_json_text(), c.to_json_text());
    EXPECT_EQ(back.seed, 9u);
}

TEST(Config, Defaults)
{
    RunConfig c;
    c.command = "hydro";
    EXPECT_EQ(c.resolved_dt(), 0.06);
    EXPECT_EQ(c.resolved_t_final(), 3.0);
    EXPECT_EQ(c.resolved_meshes(), std::vector<int>{32});
    c.command = "oracle-check";
    EXPECT_EQ(c.resolved_meshes(), std::vector<int>{4});
    EXPECT_NEAR(c.resolved_t_final(), 5e-5, 1e-18);
    c.command = "converge";
    EXPECT_EQ(c.resolved_meshes(), (std::vector<int>{2, 4, 8, 16, 32, 64}));
    c.command = "precond-study";
    EXPECT_EQ(c.resolved_meshes(), (std::vector<int>{2, 4, 8, 16, 32}));
    EXPECT_EQ(c.resolved_precond(), PrecondVariant::PreLowerBlock);
}

TEST(Config, RejectsBadInput)
{
    EXPECT_THROW(RunConfig::from_json_text("{"), ConfigError);
    EXPECT_THROW(RunConfig::from_json_text(R"({"unknown": 1})"), ConfigError);
    EXPECT_THROW(RunConfig::from_json_text(R"({"dt": "x"})"), ConfigError);
    EXPECT_THROW(RunConfig::from_json_text(R"({"params": {"viscosity": 1}})"), ConfigError);
    EXPECT_THROW(RunConfig::from_json_text(R"({"krylov": {"depth": 2}})"), ConfigError);
    EXPECT_THROW(RunConfig::from_json_text(R"({"precond": "ilu"})"), ConfigError);
    EXPECT_EQ(mesh_count_from_dx("1/8"), 8);
    EXPECT_EQ(mesh_count_from_dx("0.0625"), 16);
    EXPECT_THROW(mesh_count_from_dx("0.3"), ConfigError);
    EXPECT_THROW(mesh_count_from_dx("2"), ConfigError);
    EXPECT_THROW(mesh_count_from_dx("abc"), ConfigError);
}

TEST(Vtk, WriteAndReadBack)
{
    const fs::path dir = scratch_dir("vtk");
    HydroConfig cfg;
    cfg.n = 2;
    cfg.t_final = 2 * cfg.dt;
    cfg.vtk_dir = dir.string();
    cfg.vtk_every = 1;
    const HydroResult r = run_hydro(cfg);
    ASSERT_TRUE(r.completed) << r.error;
    ASSERT_EQ(r.vtk_files.size(), 2u);
    const VtkSummary s = read_vtk_summary(r.vtk_files.back());
    // 2n x n rectangles, two triangles each, split into four, on two subdomains.
    EXPECT_EQ(s.cells, 2 * (4 * 2 * 2 * 4));
    for (const char* f : {"u", "eta", "darcy_velocity", "velocity"}) EXPECT_EQ(s.point_fields.at(f), 3) << f;
    for (const char* f : {"p_p", "p_f"}) EXPECT_EQ(s.point_fields.at(f), 1) << f;
    EXPECT_EQ(s.cell_fields.at("subdomain"), 1);
    fs::remove_all(dir);
}

TEST(Vtk, RejectsMalformedFiles)
{
    const fs::path dir = scratch_dir("vtk_bad");
    fs::create_directories(dir);
    const fs::path p = dir / "bad.vtk";
    write_text_file(p.string(), "# vtk DataFile Version 3.0\nx\nBINARY\nDATASET UNSTRUCTURED_GRID\n");
    EXPECT_THROW(read_vtk_summary(p.string()), ConfigError);
    write_text_file(p.string(), "# vtk DataFile Version 3.0\nx\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS 3 double\n0 0 0 1 0 0 0 1 0\n"
                                "CELLS 1 4\n3 0 1 7\n");
    EXPECT_THROW(read_vtk_summary(p.string()), ConfigError);
    EXPECT_THROW(read_vtk_summary((dir / "missing.vtk").string()), ConfigError);
    fs::remove_all(dir);
}

TEST(Cli, ExitCodes)
{
    EXPECT_EQ(cli({}).code, exit_usage);
    EXPECT_EQ(cli({"converge", "--dx", "0.3"}).code, exit_usage);
    EXPECT_EQ(cli({"converge", "--precond", "ilu"}).code, exit_usage);
    EXPECT_EQ(cli({"converge", "--config", "/nonexistent.json"}).code, exit_usage);
    EXPECT_EQ(cli({"hydro", "--case", "3"}).code, exit_usage);
    EXPECT_EQ(cli({"oracle-check", "--dx", "1/2", "--dx", "1/4"}).code, exit_usage);
    EXPECT_EQ(cli({"converge", "--help"}).code, exit_ok);
}

TEST(Cli, EmptyMeshListIsUsageError)
{
    const fs::path dir = scratch_dir("cli_empty");
    write_text_file((dir / "c.json").string(), R"({"dx": []})");
    const Cli r = cli({"converge", "--config", (dir / "c.json").string(), "--out", dir.string()});
    EXPECT_EQ(r.code, exit_usage);
    EXPECT_NE(r.err.find("empty mesh list"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Cli, ConvergeIsDeterministic)
{
    const fs::path a = scratch_dir("cli_conv_a"), b = scratch_dir("cli_conv_b");
    for (const fs::path& d : {a, b})
        ASSERT_EQ(cli({"converge", "--dx", "1/2", "--dx", "1/4", "--t-final", "3e-5", "--out", d.string()}).code,
                  exit_ok);
    const std::string ca = slurp(a / "convergence.csv");
    EXPECT_EQ(ca, slurp(b / "convergence.csv"));
    const auto rows = parse_csv(ca);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].size(), 15u);
    expect_numeric_cells(rows);
    EXPECT_TRUE(fs::exists(a / "summary_converge.json"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Cli, ConfigFileWithFlagOverride)
{
    const fs::path dir = scratch_dir("cli_cfg");
    write_text_file((dir / "c.json").string(), R"({"command": "converge", "dx": ["1/2"], "t_final": 1e-3})");
    const Cli r = cli({"converge", "--config", (dir / "c.json").string(), "--t-final", "2e-5", "--out", dir.string()});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    const std::string summary = slurp(dir / "summary_converge.json");
    EXPECT_NE(summary.find("2e-05"), std::string::npos);
    EXPECT_EQ(cli({"hydro", "--config", (dir / "c.json").string()}).code, exit_usage);
    fs::remove_all(dir);
}

TEST(Cli, PrecondStudyArtifacts)
{
    const fs::path dir = scratch_dir("cli_pre");
    ASSERT_EQ(cli({"precond-study", "--dx", "1/2", "--t-final", "2e-5", "--out", dir.string()}).code, exit_ok);
    const auto pre = parse_csv(slurp(dir / "precond.csv"));
    ASSERT_EQ(pre.size(), 2u);
    EXPECT_EQ(pre[0].size(), 7u);
    expect_numeric_cells(pre);
    for (const char* v : {"none", "pre", "pre-lb"}) {
        const auto h = parse_csv(slurp(dir / (std::string("residuals_") + v + ".csv")));
        ASSERT_GE(h.size(), 2u) << v;
        EXPECT_DOUBLE_EQ(std::stod(h[1][3]), 1.0) << v;
    }
    fs::remove_all(dir);
}

TEST(Cli, OracleCheckPassesAndDetectsCorruption)
{
    const fs::path dir = scratch_dir("cli_oracle");
    const Cli ok = cli({"oracle-check", "--out", dir.string()});
    EXPECT_EQ(ok.code, exit_ok) << ok.out << ok.err;
    EXPECT_NE(ok.out.find("PASS"), std::string::npos);
    const Cli bad = cli({"oracle-check", "--corrupt-w4", "--out", dir.string()});
    EXPECT_EQ(bad.code, exit_numerical);
    EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
    const Cli finer = cli({"oracle-check", "--dx", "1/8", "--t-final", "2e-5", "--out", dir.string()});
    EXPECT_EQ(finer.code, exit_ok) << finer.out << finer.err;
    EXPECT_NE(finer.out.find("cond(S M^-1)"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Cli, HydroShortRun)
{
    const fs::path dir = scratch_dir("cli_hydro");
    const Cli r = cli({"hydro", "--case", "2", "--dx", "1/2", "--t-final", "0.18", "--out", dir.string()});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    const auto rows = parse_csv(slurp(dir / "hydro_diagnostics.csv"));
    EXPECT_EQ(rows.size(), 4u);
    expect_numeric_cells(rows);
    EXPECT_TRUE(fs::exists(dir / "pore_pressure_probe.csv"));
    ASSERT_TRUE(fs::exists(dir / "vtk"));
    int vtk = 0;
    for (const auto& e : fs::directory_iterator(dir / "vtk")) {
        ++vtk;
        EXPECT_NO_THROW(read_vtk_summary(e.path().string()));
    }
    EXPECT_EQ(vtk, 1);
    fs::remove_all(dir);
}
