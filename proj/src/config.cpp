#include "fpsi/config.hpp"

#include <json.hpp>

#include <cmath>
#include <set>

namespace fpsi {

namespace {

using nlohmann::json;

bool is(const std::string& cmd, const char* name) { return cmd == name; }

} // namespace

double RunConfig::resolved_dt() const
{
    if (dt) return *dt;
    return is(command, "hydro") ? 0.06 : 1e-5;
}

double RunConfig::resolved_t_final() const
{
    if (t_final) return *t_final;
    if (is(command, "hydro")) return 3.0;
    if (is(command, "oracle-check")) return oracle_steps * resolved_dt();
    return 1e-4;
}

std::vector<int> RunConfig::resolved_meshes() const
{
    if (meshes) return *meshes;
    if (is(command, "hydro")) return {32};
    if (is(command, "oracle-check")) return {4};
    if (is(command, "precond-study")) return {2, 4, 8, 16, 32};
    return {2, 4, 8, 16, 32, 64};
}

PrecondVariant RunConfig::resolved_precond() const { return precond.value_or(PrecondVariant::PreLowerBlock); }

PhysicalParams RunConfig::resolved_params(const PhysicalParams& base) const
{
    PhysicalParams p = base;
    for (const auto& [k, v] : params) set_param(p, k, v);
    p.validate();
    return p;
}

StepOptions RunConfig::step_options() const
{
    StepOptions o;
    o.precond = resolved_precond();
    o.scale_lower_block_by_dt = scale_lower_block_by_dt;
    o.scale_interface_rows = scale_interface_rows;
    o.krylov = krylov;
    o.krylov.seed = seed;
    o.corrupt_w4_sign = corrupt_w4_sign;
    return o;
}

void set_param(PhysicalParams& p, const std::string& name, double value)
{
    static const std::map<std::string, double PhysicalParams::*> fields{
        {"rho_f", &PhysicalParams::rho_f},   {"nu_f", &PhysicalParams::nu_f},   {"rho_p", &PhysicalParams::rho_p},
        {"nu_p", &PhysicalParams::nu_p},     {"lambda", &PhysicalParams::lambda}, {"alpha", &PhysicalParams::alpha},
        {"s0", &PhysicalParams::s0},         {"kappa", &PhysicalParams::kappa}, {"beta", &PhysicalParams::beta},
        {"eps_bar", &PhysicalParams::eps_bar}};
    const auto it = fields.find(name);
    if (it == fields.end()) throw ConfigError("unknown physical parameter '" + name + "'");
    p.*(it->second) = value;
}

int mesh_count_from_dx(const std::string& dx)
{
    double v = 0.0;
    try {
        std::size_t used = 0;
        const auto slash = dx.find('/');
        if (slash != std::string::npos) {
            const double num = std::stod(dx.substr(0, slash), &used);
            if (used != slash) throw ConfigError("");
            const std::string rest = dx.substr(slash + 1);
            const double den = std::stod(rest, &used);
            if (used != rest.size()) throw ConfigError("");
            v = num / den;
        } else {
            v = std::stod(dx, &used);
            if (used != dx.size()) throw ConfigError("");
        }
    } catch (const std::exception&) {
        throw ConfigError("--dx: cannot parse '" + dx + "'");
    }
    if (!(v > 0.0) || v > 1.0) throw ConfigError("--dx: '" + dx + "' must lie in (0, 1]");
    const double n = 1.0 / v;
    const long r = std::lround(n);
    if (std::abs(n - r) > 1e-9 * n) throw ConfigError("--dx: 1/dx must be an integer, got " + dx);
    return static_cast<int>(r);
}

RunConfig RunConfig::from_json_text(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    static const std::set<std::string> known{"command",        "dt",          "t_final",     "dx",
                                             "precond",        "case",        "out",         "seed",
                                             "krylov",         "params",      "scale_lower_block_by_dt",
                                             "scale_interface_rows",          "vtk_every",   "inflow_peak",
                                             "oracle_steps"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw ConfigError("config: unknown key '" + k + "'");

    RunConfig c;
    try {
        if (j.contains("command")) c.command = j["command"].get<std::string>();
        if (j.contains("dt")) c.dt = j["dt"].get<double>();
        if (j.contains("t_final")) c.t_final = j["t_final"].get<double>();
        if (j.contains("dx")) {
            c.meshes.emplace();
            for (const json& d : j["dx"]) {
                c.meshes->push_back(mesh_count_from_dx(d.is_string() ? d.get<std::string>() : json(d).dump()));
            }
        }
        if (j.contains("precond")) c.precond = parse_precond_variant(j["precond"].get<std::string>());
        if (j.contains("case")) c.hydro_case = j["case"].get<int>();
        if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("krylov")) {
            const json& k = j["krylov"];
            for (const auto& [key, v] : k.items())
                if (key != "l" && key != "tol" && key != "max_iter") throw ConfigError("config: unknown krylov key '" + key + "'");
            if (k.contains("l")) c.krylov.l = k["l"].get<int>();
            if (k.contains("tol")) c.krylov.tol = k["tol"].get<double>();
            if (k.contains("max_iter")) c.krylov.max_iter = k["max_iter"].get<int>();
        }
        if (j.contains("params")) {
            for (const auto& [k, v] : j["params"].items()) {
                PhysicalParams probe;
                set_param(probe, k, v.get<double>());
                c.params[k] = v.get<double>();
            }
        }
        if (j.contains("scale_lower_block_by_dt")) c.scale_lower_block_by_dt = j["scale_lower_block_by_dt"].get<bool>();
        if (j.contains("scale_interface_rows")) c.scale_interface_rows = j["scale_interface_rows"].get<bool>();
        if (j.contains("vtk_every")) c.vtk_every = j["vtk_every"].get<int>();
        if (j.contains("inflow_peak")) c.inflow_peak = j["inflow_peak"].get<double>();
        if (j.contains("oracle_steps")) c.oracle_steps = j["oracle_steps"].get<int>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

std::string RunConfig::to_json_text() const
{
    json j;
    j["command"] = command;
    j["dt"] = resolved_dt();
    j["t_final"] = resolved_t_final();
    json dx = json::array();
    for (int n : resolved_meshes()) dx.push_back("1/" + std::to_string(n));
    j["dx"] = dx;
    j["precond"] = to_string(resolved_precond());
    j["case"] = hydro_case;
    j["out"] = out_dir;
    j["seed"] = seed;
    j["krylov"] = {{"l", krylov.l}, {"tol", krylov.tol}, {"max_iter", krylov.max_iter}};
    j["params"] = params;
    j["scale_lower_block_by_dt"] = scale_lower_block_by_dt;
    j["scale_interface_rows"] = scale_interface_rows;
    j["vtk_every"] = vtk_every;
    j["inflow_peak"] = inflow_peak;
    j["oracle_steps"] = oracle_steps;
    return j.dump(2);
}

} // namespace fpsi
