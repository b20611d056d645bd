#include "toruskam/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "toruskam/errors.hpp"

namespace toruskam {

using json = nlohmann::json;

namespace {

double get_num(const json& j, const char* key, double def, bool required = false) {
    if (!j.contains(key)) {
        if (required) throw ConfigError(std::string("missing key '") + key + "'");
        return def;
    }
    if (!j[key].is_number())
        throw ConfigError(std::string("key '") + key + "' must be a number");
    return j[key].get<double>();
}

}  // namespace

std::string RunConfig::to_json() const {
    json g;
    g["c0"] = params.g.c0;
    g["k"] = params.g.k;
    g["cos"] = params.g.ck;
    g["sin"] = params.g.sk;
    json j = {
        {"version", version},
        {"system",
         {{"name", system_name},
          {"params",
           {{"T", params.T},
            {"omega", params.omega},
            {"alpha", params.alpha},
            {"mu", params.mu},
            {"eps", params.eps},
            {"a1", params.a1},
            {"a2", params.a2},
            {"r1", params.r1},
            {"r2", params.r2},
            {"forcing", g}}}}},
        {"grid", grid_sizes},
        {"integrator", {{"tol", integrator_tol}}},
        {"newton",
         {{"stop_tol", stop_tol},
          {"max_iters", max_iters},
          {"rho", rho},
          {"rho_inf", rho_inf},
          {"delta", delta},
          {"quad_order", quad_order},
          {"reduce_shear", reduce_shear}}},
        {"domain", {{"radius", domain_radius}}},
        {"cohomology",
         {{"tau", tau}, {"k_max", k_max}, {"c_russmann", c_russmann}}},
        {"perturbation",
         {{"amplitude", perturb_amplitude},
          {"modes", perturb_modes},
          {"seed", perturb_seed}}},
        {"bounds", {{"sigma_factor", sigma_factor}}},
        {"threads", threads},
    };
    return j.dump(2);
}

RunConfig parse_run_config(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("run config is not valid JSON");
    RunConfig c;
    if (!j.contains("version") || !j["version"].is_number_integer())
        throw ConfigError("missing integer key 'version'");
    c.version = j["version"].get<int>();
    if (c.version != 1) throw ConfigError("unsupported config version");
    if (!j.contains("system") || !j["system"].is_object())
        throw ConfigError("missing object key 'system'");
    const json& sys = j["system"];
    if (!sys.contains("name") || !sys["name"].is_string())
        throw ConfigError("missing string key 'system.name'");
    c.system_name = sys["name"].get<std::string>();
    const json params = sys.value("params", json::object());
    c.params.T = get_num(params, "T", 1.0, true);
    c.params.omega = get_num(params, "omega", 0.0);
    c.params.alpha = get_num(params, "alpha", 0.0, true);
    c.params.mu = get_num(params, "mu", 0.7);
    c.params.eps = get_num(params, "eps", 0.0);
    c.params.a1 = get_num(params, "a1", 1.0);
    c.params.a2 = get_num(params, "a2", 0.5);
    c.params.r1 = get_num(params, "r1", 0.2);
    c.params.r2 = get_num(params, "r2", 0.2);
    if (params.contains("forcing")) {
        const json& g = params["forcing"];
        c.params.g.c0 = get_num(g, "c0", 0.0);
        if (g.contains("k")) {
            c.params.g.k = g["k"].get<std::vector<int>>();
            c.params.g.ck = g["cos"].get<std::vector<double>>();
            c.params.g.sk = g["sin"].get<std::vector<double>>();
            if (c.params.g.ck.size() != c.params.g.k.size() ||
                c.params.g.sk.size() != c.params.g.k.size())
                throw ConfigError("forcing arrays must have equal length");
        }
    }
    if (!j.contains("grid") || !j["grid"].is_array())
        throw ConfigError("missing array key 'grid'");
    c.grid_sizes = j["grid"].get<std::vector<int>>();
    if (j.contains("integrator"))
        c.integrator_tol = get_num(j["integrator"], "tol", 1e-12);
    if (j.contains("newton")) {
        const json& nw = j["newton"];
        c.stop_tol = get_num(nw, "stop_tol", c.stop_tol);
        c.max_iters = static_cast<int>(get_num(nw, "max_iters", c.max_iters));
        c.rho = get_num(nw, "rho", c.rho);
        c.rho_inf = get_num(nw, "rho_inf", c.rho_inf);
        c.delta = get_num(nw, "delta", c.delta);
        c.quad_order = static_cast<int>(get_num(nw, "quad_order", c.quad_order));
        c.reduce_shear = nw.value("reduce_shear", false);
    }
    if (j.contains("domain"))
        c.domain_radius = get_num(j["domain"], "radius", c.domain_radius);
    if (j.contains("cohomology")) {
        const json& ch = j["cohomology"];
        c.tau = get_num(ch, "tau", 0.0);
        c.k_max = static_cast<int>(get_num(ch, "k_max", 0));
        c.c_russmann = get_num(ch, "c_russmann", 0.0);
    }
    if (j.contains("perturbation")) {
        const json& p = j["perturbation"];
        c.perturb_amplitude = get_num(p, "amplitude", 0.0);
        c.perturb_modes = static_cast<int>(get_num(p, "modes", 0));
        c.perturb_seed = static_cast<unsigned>(get_num(p, "seed", 7));
    }
    if (j.contains("bounds"))
        c.sigma_factor = get_num(j["bounds"], "sigma_factor", 2.0);
    if (j.contains("threads"))
        c.threads = static_cast<int>(get_num(j, "threads", 0));
    return c;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
}

RunConfig load_run_config(const std::string& path) {
    return parse_run_config(read_file(path));
}

}  // namespace toruskam
