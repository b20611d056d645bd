#ifndef TORUSKAM_CERTIFICATE_HPP
#define TORUSKAM_CERTIFICATE_HPP

#include <string>
#include <vector>

#include "toruskam/diagnostics.hpp"
#include "toruskam/newton.hpp"

namespace toruskam {

// Every input of the KAM condition: the H1 bounds on the geometry, vector
// field, and flow map over the working neighborhood, the H2/H3 sigma
// margins with the measured norms they must exceed, and the domain data.
struct HypothesisBounds {
    // H1 geometry
    double c_Omega = 0, c_DOmega = 0, c_Da = 0, c_DaT = 0, c_D2a = 0;
    double c_J = 0, c_JT = 0, c_DJ = 0, c_DJT = 0, c_G = 0, c_DG = 0;
    // H1 field and flow
    double c_X = 0, c_XT = 0, c_DzX = 0, c_DzXT = 0, c_D2H = 0;
    double c_Dphi = 0, c_DphiT = 0, c_D2phi = 0;
    // H2 sigma margins
    double s_DthK = 0, s_DthKT = 0, s_DphK = 0, s_DphKT = 0;
    double s_W = 0, s_WT = 0, s_N0 = 0, s_N0T = 0, s_B = 0;
    double s_lambda = 0, s_lambda_inv = 0;
    // H3
    double s_invavgS = 0;
    // domain data
    double r = 0, R = 0, rho = 0, rho_inf = 0, delta = 0;
    double gamma = 0, tau = 0, c_R = 0;
    // measured norms (strip norms at rho unless stated)
    double m_DthK = 0, m_DthKT = 0, m_DphK = 0, m_DphKT = 0;
    double m_W = 0, m_WT = 0, m_N0 = 0, m_N0T = 0, m_B = 0;
    double m_invavgS = 0, m_lambda = 0, m_lambda_inv = 0, m_K_K0 = 0;
    double m_EK = 0, m_EW = 0;
    // dimensions
    int n = 0, d = 0, ell = 1;
    double alpha_hat_abs = 0, alpha_hatT_abs = 0;

    // Checks completeness and that every sigma strictly exceeds its
    // measured value; throws ConfigError naming the offending symbol.
    void validate() const;

    std::string to_json() const;
    static HypothesisBounds from_json(const std::string& text);
};

class ConstantsLedger {
  public:
    struct Entry {
        std::string symbol;
        int table = 0;
        double value = 0.0;
    };

    void add(const std::string& symbol, int table, double value);
    double get(const std::string& symbol) const;
    bool has(const std::string& symbol) const;
    const std::vector<Entry>& entries() const { return entries_; }

  private:
    std::vector<Entry> entries_;
};

// Evaluates every Appendix-A table row in dependency order, together with
// nu-hat, nu, kappa, the schedule constant a, C_Delta, and fracC.
ConstantsLedger build_ledger(const HypothesisBounds& b);

struct Certificate {
    double E_composite = 0.0;
    double lhs_iter = 0.0;   // C_Delta E / (gamma delta^tau)
    double lhs_kam = 0.0;    // fracC E / (gamma^2 delta^{2 tau})
    bool verdict_iter = false;
    bool verdict_kam = false;
    double close_K = 0.0, close_W = 0.0;
    double close_lambda = 0.0, close_lambda_inv = 0.0;
    double nu = 0.0, nu_hat = 0.0, kappa = 0.0, a = 0.0;
    std::vector<std::string> notes;
};

Certificate check_certificate(const ConstantsLedger& ledger,
                              const HypothesisBounds& b);

std::string certificate_to_json(const Certificate& cert,
                                const ConstantsLedger& ledger);

// Lemma on perturbed inverses: given |M^{-1}| < sigma and
// sigma^2 |Mbar - M| / (sigma - |M^{-1}|) < 1, Mbar is invertible with
// |Mbar^{-1} - M^{-1}| <= sigma^2 |Mbar - M|.
struct InverseCheck {
    bool verdict = false;
    double bound = 0.0;
};
InverseCheck perturbed_inverse_check(const DMat& M, const DMat& Mbar,
                                     double sigma);

struct BoundsMeasurementOptions {
    double sigma_factor = 2.0;
    double R = 0.5;
    double rho = 0.05, rho_inf = 0.005, delta = 0.0;  // delta 0 = (rho-rho_inf)/6
    double c_R = 0.0;  // 0 = empirical
    double T = 1.0;
    double integrator_tol = 1e-12;
    int tube_samples = 32;
    int flow_samples = 16;
    unsigned seed = 7u;
};

// Samples the H1 suprema over the R-tube of K, measures every H2/H3 norm,
// and applies the sigma margins. Upper-bound estimates by sampling; the
// result is what cmd_compute writes next to the solution dumps.
HypothesisBounds measure_hypothesis_bounds(
    const VectorFieldSpec& spec, const MatSeries& K, const MatSeries& W,
    const ContractionPair& lambda, const FrameBundle& frame,
    const InvarianceErrors& errors, const DiophantineParams& dio,
    const BoundsMeasurementOptions& opts);

}  // namespace toruskam

#endif
