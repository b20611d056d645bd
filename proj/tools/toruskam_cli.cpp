// Batch front door: compute / diagnose / certify pipelines over a JSON run
// configuration. Exit codes: 0 ok, 1 numerical failure, 2 config error.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "toruskam/errors.hpp"
#include "toruskam/runner.hpp"

namespace {

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void log_info(const std::string& msg) {
    if (g_log_level >= 1) std::cerr << "[toruskam] " << msg << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral computation of partially hyperbolic invariant "
                 "tori with an a-posteriori certificate"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", bounds_path, log_level = "info";
    int threads = 0;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", config_path, "run configuration JSON")
                ->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--threads", threads,
                        "worker threads (default: TORUSKAM_THREADS or all)");
        cmd->add_option("--log-level", log_level, "quiet|info|debug");
    };

    CLI::App* compute = app.add_subcommand(
        "compute", "run the quasi-Newton iteration and write dumps");
    add_common(compute, true);
    CLI::App* diagnose = app.add_subcommand(
        "diagnose", "recompute every geometric residual from the dumps");
    add_common(diagnose, true);
    CLI::App* certify = app.add_subcommand(
        "certify", "evaluate the KAM condition from dumps and bounds");
    add_common(certify, false);
    certify->add_option("--config", config_path, "run configuration JSON");
    certify->add_option("--bounds", bounds_path,
                        "hypothesis bounds JSON (default: <out>/bounds.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    g_log_level = log_level == "quiet" ? 0 : log_level == "debug" ? 2 : 1;
    if (threads > 0) toruskam::par::set_threads(threads);

    try {
        if (compute->parsed()) {
            toruskam::RunConfig cfg = toruskam::load_run_config(config_path);
            log_info("computing " + cfg.system_name + " into " + out_dir);
            toruskam::ComputeResult res = toruskam::cmd_compute(cfg, out_dir);
            log_info("converged=" + std::to_string(res.sol.converged) +
                     " iterations=" + std::to_string(res.sol.iterations) +
                     " lambda=" + std::to_string(res.sol.lambda.lambda));
            std::printf("converged %d iterations %d normEK0 %.3e normEW0 %.3e\n",
                        res.sol.converged ? 1 : 0, res.sol.iterations,
                        res.sol.errors.normEK0, res.sol.errors.normEW0);
        } else if (diagnose->parsed()) {
            toruskam::RunConfig cfg = toruskam::load_run_config(config_path);
            log_info("diagnosing dumps in " + out_dir);
            toruskam::DiagnoseResult res = toruskam::cmd_diagnose(cfg, out_dir);
            int failed = 0;
            for (const auto& e : res.geo.inequalities)
                if (!e.pass) ++failed;
            std::printf("normEK0 %.3e normEW0 %.3e inequalities_failed %d\n",
                        res.normEK0, res.normEW0, failed);
        } else if (certify->parsed()) {
            log_info("certifying dumps in " + out_dir);
            toruskam::CertifyResult res =
                toruskam::cmd_certify(out_dir, bounds_path);
            std::printf(
                "verdict_kam %s lhs_kam %.6e verdict_iter %s lhs_iter %.6e\n",
                res.cert.verdict_kam ? "true" : "false", res.cert.lhs_kam,
                res.cert.verdict_iter ? "true" : "false", res.cert.lhs_iter);
        }
    } catch (const toruskam::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
