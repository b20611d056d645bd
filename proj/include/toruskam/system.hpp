#ifndef TORUSKAM_SYSTEM_HPP
#define TORUSKAM_SYSTEM_HPP

#include <functional>
#include <string>
#include <vector>

#include "toruskam/fourier.hpp"
#include "toruskam/geometry.hpp"

namespace toruskam {

// Axis-aligned box guard implementing the working neighborhood of the
// reference torus; leaving it during integration is an error.
struct DomainGuard {
    bool enabled = false;
    std::vector<double> lo, hi;

    bool contains(const double* z, int dim) const {
        if (!enabled) return true;
        for (int i = 0; i < dim; ++i)
            if (z[i] < lo[i] || z[i] > hi[i]) return false;
        return true;
    }
};

// Quasi-periodic Hamiltonian system: H on U x T^l, X = Omega^{-1} DzH^T,
// with the derivative callables the variational integrator needs. All
// callables must be safe to invoke concurrently.
struct VectorFieldSpec {
    int n = 0;    // half-dimension of phase space
    int ell = 1;  // forcing frequencies
    std::vector<double> alpha_hat;
    GeometryTriple geom;

    std::function<double(const double*, const double*)> H;
    std::function<void(const double*, const double*, double*)> X;     // 2n
    std::function<void(const double*, const double*, double*)> DzX;   // (2n)^2
    std::function<void(const double*, const double*, double*)> D2zX;  // (2n)^3
    std::function<void(const double*, const double*, double*)> DzH;   // 2n
    std::function<void(const double*, const double*, double*)> D2zH;  // (2n)^2

    DomainGuard domain;

    int dim() const { return 2 * n; }

    // Residual |Omega X - DzH^T| at one point, used by validation tests.
    double hamiltonian_residual(const std::vector<double>& z,
                                const std::vector<double>& phi) const;

    // Box of half-width R around the sampled reference torus.
    void set_domain_from_torus(const MatSeries& K0, double R);
};

// Finite trigonometric forcing g(phi) = c0 + sum_k ck cos(2 pi k phi)
//                                          + sk sin(2 pi k phi).
struct TrigPoly {
    double c0 = 0.0;
    std::vector<int> k;
    std::vector<double> ck, sk;

    double eval(double phi) const;
    int band() const;
};

struct BenchmarkParams {
    double T = 1.0;
    double omega = 0.0;  // internal map rotation (twisted-saddle only)
    double alpha = 0.0;  // external map rotation, alpha = alpha_hat * T
    double mu = 0.7;
    double eps = 0.0;
    double a1 = 1.0;     // internal-circle anharmonicity (twist)
    double a2 = 0.5;     // clock-circle anharmonicity
    double r1 = 0.2;     // internal circle radius
    double r2 = 0.2;     // clock circle radius (also `r` of linear-saddle)
    TrigPoly g;          // defaults to cos(2 pi phi) when empty
};

// Desk-scale closed-form system: exact torus, bundle, and rate.
struct BenchmarkSystem {
    std::string name;
    BenchmarkParams params;
    int n = 0, d = 0, ell = 1;
    double lambda_exact = 0.0;
    std::vector<double> omega_vec;  // length d
    std::vector<double> alpha_vec;  // length l

    std::function<MatSeries(const GridSpec&)> K_exact;  // 2n x 1
    std::function<MatSeries(const GridSpec&)> W_exact;  // 2n x 1

    GridSpec make_grid(const std::vector<int>& sizes) const;
};

// Known names: "linear-saddle-forced" (n=2, d=0) and "twisted-saddle"
// (n=3, d=1). Throws ConfigError for anything else.
std::pair<VectorFieldSpec, BenchmarkSystem> make_benchmark(
    const std::string& name, const BenchmarkParams& params);

// Adds `amplitude` to `n_modes` random low-frequency modes of random
// components of K; deterministic in `seed`. Used by stress fixtures.
MatSeries perturbed(const MatSeries& K, double amplitude, int n_modes,
                    unsigned seed, int max_mode = 3);

}  // namespace toruskam

#endif
