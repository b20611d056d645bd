#ifndef TORUSKAM_NEWTON_HPP
#define TORUSKAM_NEWTON_HPP

#include <functional>
#include <vector>

#include "toruskam/cohomology.hpp"
#include "toruskam/frames.hpp"

namespace toruskam {

struct InvarianceErrors {
    MatSeries EK, EW;  // 2n x 1
    double normEK0 = 0.0, normEW0 = 0.0;  // weighted-l1 bounds at rho = 0
};

// Four-way split (n-1, 1, n-1, 1) of a 2n-vector of series.
struct EtaSplit {
    MatSeries e1, e2, e3, e4;

    MatSeries concat() const;
    static EtaSplit split(const MatSeries& v, int n);
};

InvarianceErrors compute_errors(const MatSeries& K, const MatSeries& W,
                                const ContractionPair& lambda,
                                const TorusFlowData& flow,
                                const std::vector<double>& omega,
                                const std::vector<double>& alpha);

// eta = Omega_0 (P o R)^T Omega o (K o R) E, computed nodewise.
EtaSplit project_eta(const MatSeries& E, const FrameBundle& frame, int n);

struct TorusCorrection {
    EtaSplit xi;
    MatSeries xiK;     // 2n x 1
    MatSeries DeltaK;  // 2n x 1
    MatSeries Kbar;
    std::vector<double> avg_eta3;  // the obstruction average (n-1)
    std::vector<double> avg_xi3;
};

TorusCorrection solve_torus_correction(const EtaSplit& etaK,
                                       const FrameBundle& frame,
                                       const MatSeries& K,
                                       const ContractionPair& lambda,
                                       const std::vector<double>& omega,
                                       const std::vector<double>& alpha,
                                       const DiophantineParams& dio);

struct BundleEta {
    MatSeries tildeEW;  // EW + integral second-differential term
    EtaSplit etaW;
};

BundleEta compute_eta_W(const MatSeries& EW, const MatSeries& DeltaK,
                        const MatSeries& W, const VectorFieldSpec& spec,
                        const FrameBundle& frame, const MatSeries& K,
                        double T, double tol, int quad_order = 6,
                        par::Mode mode = par::Mode::openmp);

struct BundleCorrection {
    EtaSplit xi;
    MatSeries xiW, DeltaW, Wbar;
    double delta_lambda = 0.0;
    ContractionPair lambda_bar;
};

BundleCorrection solve_bundle_correction(const EtaSplit& etaW,
                                         const FrameBundle& frame,
                                         const MatSeries& W,
                                         const ContractionPair& lambda,
                                         const std::vector<double>& omega,
                                         const std::vector<double>& alpha,
                                         const DiophantineParams& dio);

struct IterRecord {
    int j = 0;
    double rho_j = 0.0, delta_j = 0.0;
    double normEK = 0.0, normEW = 0.0;  // strip norms at rho_j
    double normEK0 = 0.0, normEW0 = 0.0;
    double lambda = 0.0;
    double avgS_inv_norm = 0.0;
    double E_j = 0.0;  // max(normEK/(gamma^2 delta_j^{2 tau}), normEW)
    double truncation_tail = 0.0;
};

struct NewtonOptions {
    double stop_tol = 1e-11;
    int max_iters = 10;
    double rho = 0.05;
    double rho_inf = 0.005;
    double delta = 0.0;  // default (rho - rho_inf)/6
    int quad_order = 6;
    FrameOptions frame;
    double tail_warn = 1e-9;
    std::function<void(const IterRecord&)> on_iteration;
};

struct NewtonContext {
    const VectorFieldSpec* spec = nullptr;
    std::vector<double> omega, alpha;
    double T = 1.0;
    double integrator_tol = 1e-12;
    DiophantineParams dio;
};

struct TorusSolution {
    MatSeries K, W;
    ContractionPair lambda;
    FrameBundle frame;
    InvarianceErrors errors;
    std::vector<IterRecord> history;
    bool converged = false;
    int iterations = 0;
    double rho_final = 0.0;
};

// Outer quasi-Newton loop: frame build, torus step, bundle step, error
// recompute, with the geometric strip-bite schedule feeding the records.
TorusSolution iterate(const NewtonContext& ctx, MatSeries K, MatSeries W,
                      ContractionPair lambda, const NewtonOptions& opts);

}  // namespace toruskam

#endif
