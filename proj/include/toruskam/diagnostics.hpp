#ifndef TORUSKAM_DIAGNOSTICS_HPP
#define TORUSKAM_DIAGNOSTICS_HPP

#include <string>
#include <vector>

#include "toruskam/newton.hpp"

namespace toruskam {

class ConstantsLedger;

// One checked upper-bound inequality: measured <= rhs.
struct ResidualEntry {
    std::string name;
    double measured = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

// Every geometric residual of the approximate-invariance lemmas, computed
// nodewise from its definition, with the exact-zero structures reported as
// grid maxima.
struct GeometricDiagnostics {
    MatSeries EL;
    double EL_direct_mismatch = 0.0;  // assembled vs D phi L - L o R Lambda
    double normEL = 0.0;              // strip at rho - delta
    double normELT = 0.0;

    MatSeries OmDK;  // d x d
    double avgOmDK_max = 0.0;
    double normOmDK = 0.0;  // strip at rho - 2 delta

    MatSeries OmL;  // n x n
    double OmcX_max = 0.0;
    double OmW_max = 0.0;
    double avgOmDKcX_max = 0.0;
    double normOmL = 0.0;

    MatSeries hEsym;
    double hEsym_block_defect = 0.0;  // vs (OmL, 0; 0, B^T OmL B)
    double norm_hEsym = 0.0;

    MatSeries hEred;
    double hEred12_max = 0.0;
    double norm_hEred = 0.0;

    MatSeries EinvhP;
    double norm_EinvhP = 0.0;

    MatSeries EsymInvLahS;
    double norm_EsymInvLahS = 0.0;
    MatSeries EsymA;
    double norm_EsymA = 0.0;

    MatSeries Esym;
    double norm_Esym = 0.0;
    MatSeries Ered;
    double norm_Ered = 0.0;

    double reducibility_defect = 0.0;  // (P o R)^{-1} D phi P vs block form
    double unstable_residual = 0.0;    // D phi Wtilde - Wtilde o R / lambda

    double normEK_rho = 0.0, normEW_rho = 0.0;

    std::vector<ResidualEntry> inequalities;
};

GeometricDiagnostics compute_geometric_diagnostics(
    const MatSeries& K, const MatSeries& W, const ContractionPair& lambda,
    const FrameBundle& frame, const TorusFlowData& flow,
    const VectorFieldSpec& spec, const std::vector<double>& omega,
    const std::vector<double>& alpha, const InvarianceErrors& errors,
    double rho, double delta);

// Appends the Appendix-A-bounded inequalities for the residuals above.
void check_residual_inequalities(GeometricDiagnostics& diag,
                                 const ConstantsLedger& ledger, double gamma,
                                 double tau, double delta);

// One-step inequalities: corrections and the new invariance errors against
// their quadratic bounds. Runs a full torus+bundle step internally.
struct StepDiagnostics {
    double normDeltaK = 0.0;   // strip at rho - 2 delta
    double normDeltaW = 0.0;   // strip at rho - 3 delta
    double abs_delta_lambda = 0.0;
    double normEKnew = 0.0;    // strip at rho - 2 delta
    double normEWnew = 0.0;    // strip at rho - 3 delta
    std::vector<double> avg_eta3;
    std::vector<ResidualEntry> inequalities;
};

StepDiagnostics compute_step_diagnostics(
    const NewtonContext& ctx, const MatSeries& K, const MatSeries& W,
    const ContractionPair& lambda, const FrameBundle& frame,
    const TorusFlowData& flow, const InvarianceErrors& errors, double rho,
    double delta, int quad_order, const ConstantsLedger* ledger = nullptr);

}  // namespace toruskam

#endif
