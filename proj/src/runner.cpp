#include "toruskam/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "toruskam/errors.hpp"

namespace toruskam {

using json = nlohmann::json;
namespace fs = std::filesystem;

NewtonContext PipelineSetup::make_context() const {
    NewtonContext ctx;
    ctx.spec = &spec;
    ctx.omega = sys.omega_vec;
    ctx.alpha = sys.alpha_vec;
    ctx.T = cfg.params.T;
    ctx.integrator_tol = cfg.integrator_tol;
    ctx.dio = dio;
    return ctx;
}

NewtonOptions PipelineSetup::make_options() const {
    NewtonOptions o;
    o.stop_tol = cfg.stop_tol;
    o.max_iters = cfg.max_iters;
    o.rho = cfg.rho;
    o.rho_inf = cfg.rho_inf;
    o.delta = cfg.delta > 0 ? cfg.delta : (cfg.rho - cfg.rho_inf) / 6.0;
    o.quad_order = cfg.quad_order;
    o.frame.reduce_shear_to_constant = cfg.reduce_shear;
    return o;
}

PipelineSetup prepare_pipeline(const RunConfig& cfg) {
    PipelineSetup s;
    s.cfg = cfg;
    auto [spec, sys] = make_benchmark(cfg.system_name, cfg.params);
    s.spec = std::move(spec);
    s.sys = std::move(sys);
    s.grid = s.sys.make_grid(cfg.grid_sizes);
    s.K_ref = s.sys.K_exact(s.grid);
    s.W_ref = s.sys.W_exact(s.grid);
    s.K0 = cfg.perturb_amplitude > 0
               ? perturbed(s.K_ref, cfg.perturb_amplitude, cfg.perturb_modes,
                           cfg.perturb_seed)
               : s.K_ref;
    s.W0 = s.W_ref;
    s.lambda0 = ContractionPair(s.sys.lambda_exact);
    set_domain_from_torus_swept(s.spec, s.K_ref, cfg.domain_radius,
                                cfg.params.T, cfg.integrator_tol);

    s.dio.omega = s.sys.omega_vec;
    s.dio.alpha = s.sys.alpha_vec;
    s.dio.tau = cfg.tau > 0 ? cfg.tau : static_cast<double>(s.sys.d + s.sys.ell);
    int band = 0;
    for (int nx : cfg.grid_sizes) band += nx / 2;
    s.dio.certified_band = cfg.k_max > 0 ? cfg.k_max : band;
    s.dio.gamma = diophantine_gamma(s.dio.omega, s.dio.alpha, s.dio.tau,
                                    s.dio.certified_band);
    s.c_russmann =
        cfg.c_russmann > 0
            ? cfg.c_russmann
            : russmann_constant(s.dio.tau, s.dio, s.grid);
    return s;
}

namespace {

json solution_json(const PipelineSetup& setup, const TorusSolution& sol) {
    json j;
    j["system"] = setup.sys.name;
    j["lambda"] = sol.lambda.lambda;
    j["lambda_exact"] = setup.sys.lambda_exact;
    j["converged"] = sol.converged;
    j["iterations"] = sol.iterations;
    j["rho_final"] = sol.rho_final;
    j["normEK0"] = sol.errors.normEK0;
    j["normEW0"] = sol.errors.normEW0;
    j["normEK_rho"] = sol.errors.EK.strip_norm(setup.cfg.rho);
    j["normEW_rho"] = sol.errors.EW.strip_norm(setup.cfg.rho);
    j["gamma"] = setup.dio.gamma;
    j["tau"] = setup.dio.tau;
    j["certified_band"] = setup.dio.certified_band;
    j["c_russmann"] = setup.c_russmann;
    j["omega"] = setup.sys.omega_vec;
    j["alpha"] = setup.sys.alpha_vec;
    j["T"] = setup.cfg.params.T;
    j["avgS_inv_norm"] = sol.frame.avgS_inv_norm;
    return j;
}

std::string iter_record_json(const IterRecord& r) {
    json j = {{"j", r.j},
              {"rho_j", r.rho_j},
              {"delta_j", r.delta_j},
              {"normEK", r.normEK},
              {"normEW", r.normEW},
              {"normEK0", r.normEK0},
              {"normEW0", r.normEW0},
              {"lambda", r.lambda},
              {"avgS_inv_norm", r.avgS_inv_norm},
              {"E_j", r.E_j},
              {"truncation_tail", r.truncation_tail}};
    return j.dump();
}

}  // namespace

void write_solution(const std::string& out_dir, const PipelineSetup& setup,
                    const TorusSolution& sol, const HypothesisBounds& bounds,
                    const std::string& report_jsonl) {
    SolutionFiles files;
    fs::create_directories(out_dir);
    {
        std::ofstream os(fs::path(out_dir) / files.K);
        dump_text(os, sol.K);
    }
    {
        std::ofstream os(fs::path(out_dir) / files.W);
        dump_text(os, sol.W);
    }
    write_file((fs::path(out_dir) / files.solution).string(),
               solution_json(setup, sol).dump(2));
    write_file((fs::path(out_dir) / files.report).string(), report_jsonl);
    write_file((fs::path(out_dir) / files.bounds).string(), bounds.to_json());
}

LoadedSolution load_solution(const std::string& out_dir) {
    SolutionFiles files;
    LoadedSolution ls;
    {
        std::ifstream is(fs::path(out_dir) / files.K);
        if (!is) throw Error("missing dump " + files.K + " in " + out_dir);
        ls.K = load_dump(is);
    }
    {
        std::ifstream is(fs::path(out_dir) / files.W);
        if (!is) throw Error("missing dump " + files.W + " in " + out_dir);
        ls.W = load_dump(is);
    }
    json j = json::parse(read_file((fs::path(out_dir) / files.solution).string()));
    ls.lambda = ContractionPair(j["lambda"].get<double>());
    return ls;
}

ComputeResult cmd_compute(const RunConfig& cfg, const std::string& out_dir) {
    if (cfg.threads > 0) par::set_threads(cfg.threads);
    PipelineSetup setup = prepare_pipeline(cfg);
    NewtonContext ctx = setup.make_context();
    NewtonOptions opts = setup.make_options();
    std::ostringstream report;
    opts.on_iteration = [&report](const IterRecord& r) {
        report << iter_record_json(r) << "\n";
    };
    ComputeResult res;
    res.sol = iterate(ctx, setup.K0, setup.W0, setup.lambda0, opts);

    BoundsMeasurementOptions bopts;
    bopts.sigma_factor = cfg.sigma_factor;
    bopts.R = cfg.domain_radius;
    bopts.rho = cfg.rho;
    bopts.rho_inf = cfg.rho_inf;
    bopts.delta = opts.delta;
    bopts.c_R = setup.c_russmann;
    bopts.T = cfg.params.T;
    bopts.integrator_tol = cfg.integrator_tol;
    res.bounds = measure_hypothesis_bounds(setup.spec, res.sol.K, res.sol.W,
                                           res.sol.lambda, res.sol.frame,
                                           res.sol.errors, setup.dio, bopts);
    if (!out_dir.empty())
        write_solution(out_dir, setup, res.sol, res.bounds, report.str());
    return res;
}

DiagnoseResult cmd_diagnose(const RunConfig& cfg, const std::string& out_dir,
                            bool with_step) {
    if (cfg.threads > 0) par::set_threads(cfg.threads);
    PipelineSetup setup = prepare_pipeline(cfg);
    LoadedSolution ls = load_solution(out_dir);
    if (ls.K.grid() != setup.grid)
        throw ConfigError("dump grid does not match the run config");
    NewtonContext ctx = setup.make_context();
    NewtonOptions opts = setup.make_options();

    TorusFlowData flow =
        flow_on_torus(setup.spec, ls.K, ctx.T, ctx.integrator_tol);
    InvarianceErrors errors =
        compute_errors(ls.K, ls.W, ls.lambda, flow, ctx.omega, ctx.alpha);
    FrameBundle frame = build_frame(ls.K, ls.W, ls.lambda, setup.spec, flow,
                                    ctx.omega, ctx.alpha, opts.frame, &ctx.dio);
    DiagnoseResult out;
    out.normEK0 = errors.normEK0;
    out.normEW0 = errors.normEW0;
    out.normEK_rho = errors.EK.strip_norm(cfg.rho);
    out.normEW_rho = errors.EW.strip_norm(cfg.rho);
    out.geo = compute_geometric_diagnostics(ls.K, ls.W, ls.lambda, frame, flow,
                                            setup.spec, ctx.omega, ctx.alpha,
                                            errors, cfg.rho, opts.delta);

    ConstantsLedger ledger;
    bool have_ledger = false;
    SolutionFiles files;
    fs::path bpath = fs::path(out_dir) / files.bounds;
    if (fs::exists(bpath)) {
        HypothesisBounds b = HypothesisBounds::from_json(read_file(bpath.string()));
        ledger = build_ledger(b);
        have_ledger = true;
        check_residual_inequalities(out.geo, ledger, ctx.dio.gamma,
                                    ctx.dio.tau, opts.delta);
    }
    if (with_step)
        out.step = compute_step_diagnostics(ctx, ls.K, ls.W, ls.lambda, frame,
                                            flow, errors, cfg.rho, opts.delta,
                                            cfg.quad_order,
                                            have_ledger ? &ledger : nullptr);

    // serialize
    json j;
    j["normEK0"] = out.normEK0;
    j["normEW0"] = out.normEW0;
    j["normEK_rho"] = out.normEK_rho;
    j["normEW_rho"] = out.normEW_rho;
    j["EL"] = {{"norm", out.geo.normEL},
               {"norm_T", out.geo.normELT},
               {"definition_mismatch", out.geo.EL_direct_mismatch}};
    j["isotropy"] = {{"norm", out.geo.normOmDK},
                     {"avg_max", out.geo.avgOmDK_max}};
    j["lagrangianity"] = {{"norm", out.geo.normOmL},
                          {"OmcX_max", out.geo.OmcX_max},
                          {"OmW_max", out.geo.OmW_max},
                          {"avgOmDKcX_max", out.geo.avgOmDKcX_max}};
    j["hEsym"] = {{"norm", out.geo.norm_hEsym},
                  {"block_defect", out.geo.hEsym_block_defect}};
    j["hEred"] = {{"norm", out.geo.norm_hEred},
                  {"block12_max", out.geo.hEred12_max}};
    j["EinvhP"] = {{"norm", out.geo.norm_EinvhP}};
    j["symmetry"] = {{"invLahS", out.geo.norm_EsymInvLahS},
                     {"A_minus_AT", out.geo.norm_EsymA}};
    j["Esym"] = {{"norm", out.geo.norm_Esym}};
    j["Ered"] = {{"norm", out.geo.norm_Ered}};
    j["reducibility_defect"] = out.geo.reducibility_defect;
    j["unstable_residual"] = out.geo.unstable_residual;
    json ineq = json::array();
    for (const auto& e : out.geo.inequalities)
        ineq.push_back({{"name", e.name},
                        {"measured", e.measured},
                        {"rhs", e.rhs},
                        {"pass", e.pass}});
    if (with_step) {
        j["step"] = {{"normDeltaK", out.step.normDeltaK},
                     {"normDeltaW", out.step.normDeltaW},
                     {"abs_delta_lambda", out.step.abs_delta_lambda},
                     {"normEKnew", out.step.normEKnew},
                     {"normEWnew", out.step.normEWnew}};
        for (const auto& e : out.step.inequalities)
            ineq.push_back({{"name", e.name},
                            {"measured", e.measured},
                            {"rhs", e.rhs},
                            {"pass", e.pass}});
    }
    j["inequalities"] = ineq;
    write_file((fs::path(out_dir) / files.diagnostics).string(), j.dump(2));
    return out;
}

CertifyResult cmd_certify(const std::string& out_dir,
                          const std::string& bounds_path) {
    SolutionFiles files;
    std::string bpath = bounds_path.empty()
                            ? (fs::path(out_dir) / files.bounds).string()
                            : bounds_path;
    HypothesisBounds b = HypothesisBounds::from_json(read_file(bpath));
    CertifyResult res;
    res.ledger = build_ledger(b);
    res.cert = check_certificate(res.ledger, b);
    write_file((fs::path(out_dir) / files.certificate).string(),
               certificate_to_json(res.cert, res.ledger));
    return res;
}

}  // namespace toruskam
