#ifndef TORUSKAM_CONFIG_HPP
#define TORUSKAM_CONFIG_HPP

#include <string>
#include <vector>

#include "toruskam/system.hpp"

namespace toruskam {

// Run configuration, version 1. See README for the schema.
struct RunConfig {
    int version = 1;
    std::string system_name;
    BenchmarkParams params;
    std::vector<int> grid_sizes;

    double integrator_tol = 1e-12;

    double stop_tol = 1e-11;
    int max_iters = 12;
    double rho = 0.05;
    double rho_inf = 0.005;
    double delta = 0.0;  // 0 = (rho - rho_inf)/6
    int quad_order = 6;
    bool reduce_shear = false;

    double domain_radius = 0.5;

    double tau = 0.0;  // 0 = d + ell
    int k_max = 0;     // 0 = grid band
    double c_russmann = 0.0;  // 0 = empirical

    double perturb_amplitude = 0.0;
    int perturb_modes = 0;
    unsigned perturb_seed = 7;

    double sigma_factor = 2.0;
    int threads = 0;

    std::string to_json() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace toruskam

#endif
