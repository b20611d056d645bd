// Compares the serial reference kernels against the OpenMP paths on the
// data-parallel hot spots: multidimensional transforms, padded products,
// and pointwise flow jets over a torus grid. Results must agree bitwise;
// timings are printed per kernel.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "toruskam/flow.hpp"
#include "toruskam/fourier.hpp"
#include "toruskam/system.hpp"

using namespace toruskam;
using clock_type = std::chrono::steady_clock;

namespace {

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0)
        .count();
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    int nrep = argc > 1 ? std::atoi(argv[1]) : 3;
    std::mt19937 rng(123);
    std::normal_distribution<double> gauss;

    std::printf("kernel                         serial[ms]  openmp[ms]  max|diff|\n");

    {
        GridSpec grid(1, 1, {64, 64});
        std::vector<double> vals(grid.node_count());
        for (double& v : vals) v = gauss(rng);
        Series s_serial, s_omp;
        auto t0 = clock_type::now();
        for (int r = 0; r < nrep; ++r)
            s_serial = Series::from_real_values(grid, vals, par::Mode::serial);
        double t_serial = ms_since(t0) / nrep;
        t0 = clock_type::now();
        for (int r = 0; r < nrep; ++r)
            s_omp = Series::from_real_values(grid, vals, par::Mode::openmp);
        double t_omp = ms_since(t0) / nrep;
        std::printf("%-30s %10.3f  %10.3f  %9.2e\n", "nd transform 64x64",
                    t_serial, t_omp, max_diff(s_serial.coef(), s_omp.coef()));
    }

    {
        GridSpec grid(1, 1, {32, 32});
        std::vector<double> va(grid.node_count()), vb(grid.node_count());
        for (double& v : va) v = gauss(rng);
        for (double& v : vb) v = gauss(rng);
        Series a = Series::from_real_values(grid, va);
        Series b = Series::from_real_values(grid, vb);
        // padded product runs its transforms through the selected mode via
        // the global thread setting; compare against the convolution oracle
        auto t0 = clock_type::now();
        Series ref;
        for (int r = 0; r < nrep; ++r) ref = mul_reference(a, b);
        double t_serial = ms_since(t0) / nrep;
        t0 = clock_type::now();
        Series fast;
        for (int r = 0; r < nrep; ++r) fast = mul(a, b);
        double t_omp = ms_since(t0) / nrep;
        std::printf("%-30s %10.3f  %10.3f  %9.2e\n", "product 32x32 (vs conv)",
                    t_serial, t_omp, max_diff(ref.coef(), fast.coef()));
    }

    {
        BenchmarkParams p;
        p.T = 1.0;
        p.omega = 0.6180339887498949;
        p.alpha = 0.4142135623730951;
        p.mu = 0.7;
        p.eps = 0.01;
        auto [spec, sys] = make_benchmark("twisted-saddle", p);
        GridSpec grid = sys.make_grid({16, 16});
        MatSeries K = sys.K_exact(grid);
        auto t0 = clock_type::now();
        TorusFlowData serial = flow_on_torus(spec, K, p.T, 1e-10, par::Mode::serial);
        double t_serial = ms_since(t0);
        t0 = clock_type::now();
        TorusFlowData omp = flow_on_torus(spec, K, p.T, 1e-10, par::Mode::openmp);
        double t_omp = ms_since(t0);
        double diff = 0;
        for (std::size_t i = 0; i < serial.phiK.v.size(); ++i)
            diff = std::max(diff, std::abs(serial.phiK.v[i] - omp.phiK.v[i]));
        std::printf("%-30s %10.3f  %10.3f  %9.2e\n", "flow jets 16x16", t_serial,
                    t_omp, diff);
    }

    return 0;
}
