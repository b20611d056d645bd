#ifndef TORUSKAM_COHOMOLOGY_HPP
#define TORUSKAM_COHOMOLOGY_HPP

#include <optional>
#include <vector>

#include "toruskam/fourier.hpp"

namespace toruskam {

// Rotation vector (omega, alpha) with a Diophantine certificate gamma/tau
// valid up to the band |j|_1 + |k|_1 <= certified_band.
struct DiophantineParams {
    std::vector<double> omega;
    std::vector<double> alpha;
    double gamma = 0.0;
    double tau = 0.0;
    int certified_band = 0;
};

struct CohomologySolution {
    Series xi;
    double norm_bound = 0.0;   // certified bound for ||xi|| at rho_bound
    double rho_bound = 0.0;
    double divisor_min = 0.0;  // smallest |divisor| met across the band
};

// gamma = min over 0 < |j|_1+|k|_1 <= K_max of dist(j.omega + k.alpha, Z)
// * (|j|_1+|k|_1)^tau, by exhaustive scan. Throws ResonanceError on an
// exact (or sub-1e-14) resonance.
double diophantine_gamma(const std::vector<double>& omega,
                         const std::vector<double>& alpha, double tau,
                         int k_max);

// a xi - b xi o R = eta with |a| != |b|; exact per-mode division. The bound
// ||xi||_rho <= ||eta||_rho / ||a|-|b|| is attached at the given rho.
CohomologySolution solve_nonresonant(double a, double b, const Series& eta,
                                     const std::vector<double>& omega,
                                     const std::vector<double>& alpha,
                                     double rho = 0.0);

// Doubled-rotation variant used by the coupled torsion equations.
CohomologySolution solve_nonresonant_double_rotation(
    double a, double b, const Series& eta, const std::vector<double>& omega,
    const std::vector<double>& alpha, double rho = 0.0);

// xi - xi o R = eta - <eta>, zero-average solution; bound reported at
// rho - delta with the Ruessmann constant c_R.
CohomologySolution solve_small_divisor(const Series& eta,
                                       const DiophantineParams& rot,
                                       double rho, double delta,
                                       double c_russmann);

// Entrywise matrix versions.
MatSeries solve_nonresonant(double a, double b, const MatSeries& eta,
                            const std::vector<double>& omega,
                            const std::vector<double>& alpha);
MatSeries solve_nonresonant_double_rotation(double a, double b,
                                            const MatSeries& eta,
                                            const std::vector<double>& omega,
                                            const std::vector<double>& alpha);
MatSeries solve_small_divisor(const MatSeries& eta,
                              const DiophantineParams& rot);

// Empirical Ruessmann constant: max over sampled random eta of
// ||xi||_{rho-delta} gamma delta^tau / ||eta||_rho, times safety factor 2.
// An explicit override is returned verbatim.
double russmann_constant(double tau, const DiophantineParams& rot,
                         const GridSpec& grid,
                         std::optional<double> override_value = std::nullopt,
                         unsigned seed = 20240901u);

}  // namespace toruskam

#endif
