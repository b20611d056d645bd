#ifndef TORUSKAM_RUNNER_HPP
#define TORUSKAM_RUNNER_HPP

#include <string>

#include "toruskam/certificate.hpp"
#include "toruskam/config.hpp"
#include "toruskam/newton.hpp"

namespace toruskam {

// Everything a pipeline run needs, owned in one place. The Newton context
// returned by make_context() borrows the spec, so keep the setup alive.
struct PipelineSetup {
    RunConfig cfg;
    VectorFieldSpec spec;
    BenchmarkSystem sys;
    GridSpec grid;
    MatSeries K0, W0;          // initial guess (perturbation applied)
    MatSeries K_ref, W_ref;    // exact benchmark objects
    ContractionPair lambda0;
    DiophantineParams dio;
    double c_russmann = 0.0;

    NewtonContext make_context() const;
    NewtonOptions make_options() const;
};

PipelineSetup prepare_pipeline(const RunConfig& cfg);

struct SolutionFiles {
    std::string K = "K.ft";
    std::string W = "W.ft";
    std::string solution = "solution.json";
    std::string report = "report.jsonl";
    std::string bounds = "bounds.json";
    std::string diagnostics = "diagnostics.json";
    std::string certificate = "certificate.json";
};

void write_solution(const std::string& out_dir, const PipelineSetup& setup,
                    const TorusSolution& sol, const HypothesisBounds& bounds,
                    const std::string& report_jsonl);

struct LoadedSolution {
    MatSeries K, W;
    ContractionPair lambda;
};
LoadedSolution load_solution(const std::string& out_dir);

// The three pipeline verbs behind the CLI. Each returns the payload it
// wrote, for callers that want the values in-process.
struct ComputeResult {
    TorusSolution sol;
    HypothesisBounds bounds;
};
ComputeResult cmd_compute(const RunConfig& cfg, const std::string& out_dir);

struct DiagnoseResult {
    GeometricDiagnostics geo;
    StepDiagnostics step;
    double normEK0 = 0.0, normEW0 = 0.0;
    double normEK_rho = 0.0, normEW_rho = 0.0;
};
DiagnoseResult cmd_diagnose(const RunConfig& cfg, const std::string& out_dir,
                            bool with_step = true);

struct CertifyResult {
    Certificate cert;
    ConstantsLedger ledger;
};
CertifyResult cmd_certify(const std::string& out_dir,
                          const std::string& bounds_path = "");

}  // namespace toruskam

#endif
