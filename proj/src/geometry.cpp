#include "toruskam/geometry.hpp"

#include <cmath>
#include <random>
#include <string>

namespace toruskam {

GeometryTriple GeometryTriple::standard(int n) {
    GeometryTriple g;
    g.n = n;
    const int N = 2 * n;
    DMat omega0(N, N), j0(N, N), g0 = DMat::identity(N), da(N, N);
    for (int i = 0; i < n; ++i) {
        omega0(i, n + i) = -1.0;
        omega0(n + i, i) = 1.0;
        j0(i, n + i) = -1.0;
        j0(n + i, i) = 1.0;
        da(n + i, i) = -1.0;  // a(q,p) = (0, -q)
    }
    DTen3 zero3(N, N, N);
    g.Omega = [omega0](const std::vector<double>&) { return omega0; };
    g.J = [j0](const std::vector<double>&) { return j0; };
    g.G = [g0](const std::vector<double>&) { return g0; };
    g.Da = [da](const std::vector<double>&) { return da; };
    g.action_a = [n, N](const std::vector<double>& z) {
        std::vector<double> a(N, 0.0);
        for (int i = 0; i < n; ++i) a[n + i] = -z[i];
        return a;
    };
    g.D2a = [zero3](const std::vector<double>&) { return zero3; };
    g.DOmega = [zero3](const std::vector<double>&) { return zero3; };
    g.DJ = [zero3](const std::vector<double>&) { return zero3; };
    g.DG = [zero3](const std::vector<double>&) { return zero3; };
    return g;
}

void GeometryTriple::validate(const std::vector<std::vector<double>>& samples,
                              double tol) const {
    const int N = 2 * n;
    for (const auto& z : samples) {
        DMat Om = Omega(z), Jm = J(z), Gm = G(z);
        DMat jj = Jm * Jm + DMat::identity(N);
        if (jj.max_abs() > 1e-12 * std::max(1.0, Jm.norm() * Jm.norm()) + tol)
            throw Error("geometry: J^2 != -I at a sample point");
        DMat sym = Jm.transposed() * Om * Jm - Om;
        if (sym.max_abs() > tol * std::max(1.0, Om.norm()))
            throw Error("geometry: J^T Omega J != Omega at a sample point");
        DMat anti = Om + Om.transposed();
        if (anti.max_abs() > tol * std::max(1.0, Om.norm()))
            throw Error("geometry: Omega not antisymmetric");
        DMat gsym = Gm - Gm.transposed();
        if (gsym.max_abs() > tol * std::max(1.0, Gm.norm()))
            throw Error("geometry: G not symmetric");
        // positive definiteness probed along random directions
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 8; ++trial) {
            std::vector<double> x(N);
            double nx = 0;
            for (double& xi : x) { xi = u(rng); nx += xi * xi; }
            double q = 0;
            for (int r = 0; r < N; ++r)
                for (int c = 0; c < N; ++c) q += x[r] * Gm(r, c) * x[c];
            if (q <= 0)
                throw Error("geometry: G not positive definite at a sample");
        }
        DMat dam = Da(z);
        DMat rebuilt = dam.transposed() - dam;
        if ((rebuilt - Om).max_abs() > tol * std::max(1.0, Om.norm()))
            throw Error("geometry: Omega != (Da)^T - Da at a sample");
    }
}

}  // namespace toruskam
