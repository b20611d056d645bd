#ifndef TORUSKAM_TEST_UTIL_HPP
#define TORUSKAM_TEST_UTIL_HPP

#include <complex>
#include <random>
#include <vector>

#include "toruskam/fourier.hpp"
#include "toruskam/system.hpp"

namespace tk_test {

using toruskam::cplx;
using toruskam::GridSpec;
using toruskam::Series;

inline Series random_series(const GridSpec& grid, unsigned seed,
                            int band = -1) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<double> vals(grid.node_count());
    for (double& v : vals) v = gauss(rng);
    Series s = Series::from_real_values(grid, vals);
    if (band >= 0) {
        // zero modes beyond |m|_1 <= band
        std::vector<int> bins(grid.axes());
        for (std::size_t i = 0; i < s.coef().size(); ++i) {
            if (grid.freq_l1(i) > band) s.coef()[i] = cplx(0, 0);
        }
        s.hermitize();
    }
    return s;
}

// Direct O(N^2) multidimensional DFT oracle (values -> coefficients).
inline std::vector<cplx> naive_dft(const GridSpec& grid,
                                   const std::vector<cplx>& values) {
    const double two_pi = 6.283185307179586476925286766559;
    const std::size_t nn = grid.node_count();
    std::vector<cplx> out(nn, cplx(0, 0));
    std::vector<int> kb(grid.axes()), jb(grid.axes());
    for (std::size_t k = 0; k < nn; ++k) {
        grid.unflatten(k, kb);
        cplx acc(0, 0);
        for (std::size_t j = 0; j < nn; ++j) {
            grid.unflatten(j, jb);
            double phase = 0;
            for (int a = 0; a < grid.axes(); ++a)
                phase += static_cast<double>(kb[a]) * jb[a] / grid.size(a);
            acc += values[j] * std::exp(cplx(0, -two_pi * phase));
        }
        out[k] = acc / static_cast<double>(nn);
    }
    return out;
}

inline double max_coef_diff(const Series& a, const Series& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.coef().size(); ++i)
        m = std::max(m, std::abs(a.coef()[i] - b.coef()[i]));
    return m;
}

inline toruskam::BenchmarkParams twisted_params(double eps = 0.01) {
    toruskam::BenchmarkParams p;
    p.T = 1.0;
    p.omega = 0.6180339887498949;   // golden mean fractional part
    p.alpha = 0.4142135623730951;   // sqrt(2) - 1
    p.mu = 0.7;
    p.eps = eps;
    p.a1 = 1.0;
    p.a2 = 0.8;
    p.r1 = 0.25;
    p.r2 = 0.25;
    return p;
}

inline toruskam::BenchmarkParams saddle_params(double eps = 0.05) {
    toruskam::BenchmarkParams p;
    p.T = 1.0;
    p.alpha = 0.4142135623730951;
    p.mu = 0.7;
    p.eps = eps;
    p.r2 = 0.3;  // clock radius
    return p;
}

}  // namespace tk_test

#endif
