#include "toruskam/cohomology.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "toruskam/errors.hpp"

namespace toruskam {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kDivisorFloor = 1e-14;

double dist_to_integers(double x) {
    double frac = x - std::floor(x);
    return std::min(frac, 1.0 - frac);
}

// Recursive scan over multi-indices of |j|_1+|k|_1 <= k_max.
void scan_rec(const std::vector<double>& rot, std::size_t axis, int budget,
              double partial, int l1, double tau, double& best,
              std::vector<int>& idx, std::string& worst) {
    if (axis == rot.size()) {
        if (l1 == 0) return;
        double d = dist_to_integers(partial);
        double val = d * std::pow(static_cast<double>(l1), tau);
        if (val < best) {
            best = val;
            std::ostringstream os;
            for (std::size_t i = 0; i < idx.size(); ++i)
                os << (i ? "," : "(") << idx[i];
            os << ")";
            worst = os.str();
        }
        return;
    }
    for (int m = -budget; m <= budget; ++m) {
        idx[axis] = m;
        scan_rec(rot, axis + 1, budget - std::abs(m), partial + m * rot[axis],
                 l1 + std::abs(m), tau, best, idx, worst);
    }
}

}  // namespace

double diophantine_gamma(const std::vector<double>& omega,
                         const std::vector<double>& alpha, double tau,
                         int k_max) {
    std::vector<double> rot = omega;
    rot.insert(rot.end(), alpha.begin(), alpha.end());
    if (rot.empty()) throw ConfigError("diophantine_gamma: empty rotation");
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(rot.size(), 0);
    std::string worst;
    scan_rec(rot, 0, k_max, 0.0, 0, tau, best, idx, worst);
    if (!(best > kDivisorFloor))
        throw ResonanceError("rational resonance at mode " + worst +
                             " within band " + std::to_string(k_max));
    return best;
}

namespace {

Series per_mode_solve(double a, double b, const Series& eta,
                      const std::vector<double>& omega,
                      const std::vector<double>& alpha, int rot_multiple,
                      bool small_divisor, double& divisor_min) {
    const GridSpec& g = eta.grid();
    Series xi(g);
    divisor_min = std::numeric_limits<double>::infinity();
    std::vector<int> bins(g.axes());
    for (std::size_t i = 0; i < eta.coef().size(); ++i) {
        g.unflatten(i, bins);
        double phase = 0;
        bool zero_mode = true;
        for (int ax = 0; ax < g.axes(); ++ax) {
            int m = g.freq(ax, bins[ax]);
            if (m != 0) zero_mode = false;
            double r = ax < g.dims_internal() ? omega[ax]
                                              : alpha[ax - g.dims_internal()];
            phase += m * r * rot_multiple;
        }
        cplx e = cplx(std::cos(kTwoPi * phase), std::sin(kTwoPi * phase));
        if (small_divisor) {
            if (zero_mode) {
                xi.coef()[i] = cplx(0, 0);  // zero-average solution
                continue;
            }
            cplx div = cplx(1, 0) - e;
            double ad = std::abs(div);
            divisor_min = std::min(divisor_min, ad);
            if (ad < kDivisorFloor) {
                std::ostringstream os;
                os << "mode (";
                for (int ax = 0; ax < g.axes(); ++ax)
                    os << (ax ? "," : "") << g.freq(ax, bins[ax]);
                os << ") resonant in small-divisor solve";
                throw ResonanceError(os.str());
            }
            xi.coef()[i] = eta.coef()[i] / div;
        } else {
            cplx div = cplx(a, 0) - b * e;
            double ad = std::abs(div);
            divisor_min = std::min(divisor_min, ad);
            xi.coef()[i] = eta.coef()[i] / div;
        }
    }
    // pure per-mode division; conjugate modes meet conjugate divisors, so
    // Hermitian symmetry of eta carries over without projection
    return xi;
}

}  // namespace

CohomologySolution solve_nonresonant(double a, double b, const Series& eta,
                                     const std::vector<double>& omega,
                                     const std::vector<double>& alpha,
                                     double rho) {
    if (std::abs(std::abs(a) - std::abs(b)) < kDivisorFloor)
        throw ResonantFamilyError("|a| == |b| in non-small family");
    CohomologySolution sol;
    sol.xi = per_mode_solve(a, b, eta, omega, alpha, 1, false, sol.divisor_min);
    sol.rho_bound = rho;
    sol.norm_bound = eta.strip_norm(rho) / std::abs(std::abs(a) - std::abs(b));
    return sol;
}

CohomologySolution solve_nonresonant_double_rotation(
    double a, double b, const Series& eta, const std::vector<double>& omega,
    const std::vector<double>& alpha, double rho) {
    if (std::abs(std::abs(a) - std::abs(b)) < kDivisorFloor)
        throw ResonantFamilyError("|a| == |b| in non-small family");
    CohomologySolution sol;
    sol.xi = per_mode_solve(a, b, eta, omega, alpha, 2, false, sol.divisor_min);
    sol.rho_bound = rho;
    sol.norm_bound = eta.strip_norm(rho) / std::abs(std::abs(a) - std::abs(b));
    return sol;
}

CohomologySolution solve_small_divisor(const Series& eta,
                                       const DiophantineParams& rot,
                                       double rho, double delta,
                                       double c_russmann) {
    if (delta <= 0 || delta > rho)
        throw ConfigError("solve_small_divisor: need delta in (0, rho]");
    CohomologySolution sol;
    sol.xi = per_mode_solve(1, 1, eta, rot.omega, rot.alpha, 1, true,
                            sol.divisor_min);
    sol.rho_bound = rho - delta;
    sol.norm_bound = c_russmann / (rot.gamma * std::pow(delta, rot.tau)) *
                     eta.strip_norm(rho);
    return sol;
}

MatSeries solve_nonresonant(double a, double b, const MatSeries& eta,
                            const std::vector<double>& omega,
                            const std::vector<double>& alpha) {
    MatSeries out(eta.grid(), eta.rows(), eta.cols());
    for (int r = 0; r < eta.rows(); ++r)
        for (int c = 0; c < eta.cols(); ++c)
            out.at(r, c) = solve_nonresonant(a, b, eta.at(r, c), omega, alpha).xi;
    return out;
}

MatSeries solve_nonresonant_double_rotation(double a, double b,
                                            const MatSeries& eta,
                                            const std::vector<double>& omega,
                                            const std::vector<double>& alpha) {
    MatSeries out(eta.grid(), eta.rows(), eta.cols());
    for (int r = 0; r < eta.rows(); ++r)
        for (int c = 0; c < eta.cols(); ++c)
            out.at(r, c) =
                solve_nonresonant_double_rotation(a, b, eta.at(r, c), omega, alpha)
                    .xi;
    return out;
}

MatSeries solve_small_divisor(const MatSeries& eta,
                              const DiophantineParams& rot) {
    MatSeries out(eta.grid(), eta.rows(), eta.cols());
    for (int r = 0; r < eta.rows(); ++r)
        for (int c = 0; c < eta.cols(); ++c)
            out.at(r, c) =
                solve_small_divisor(eta.at(r, c), rot, 1.0, 1.0, 1.0).xi;
    return out;
}

double russmann_constant(double tau, const DiophantineParams& rot,
                         const GridSpec& grid,
                         std::optional<double> override_value, unsigned seed) {
    if (override_value) return *override_value;
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worst = 0.0;
    const double rho = 0.1;
    const std::vector<double> deltas = {0.02, 0.05, 0.1};
    for (int sample = 0; sample < 24; ++sample) {
        std::vector<double> vals(grid.node_count());
        for (double& v : vals) v = gauss(rng);
        Series eta = Series::from_real_values(grid, vals);
        eta.coef()[0] = cplx(0, 0);  // averages play no role here
        for (double delta : deltas) {
            CohomologySolution sol = solve_small_divisor(eta, rot, rho, delta, 1.0);
            double ratio = sol.xi.strip_norm(rho - delta) * rot.gamma *
                           std::pow(delta, tau) / eta.strip_norm(rho);
            worst = std::max(worst, ratio);
        }
    }
    return 2.0 * worst;
}

}  // namespace toruskam
