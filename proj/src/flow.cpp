#include "toruskam/flow.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "toruskam/errors.hpp"
#include "toruskam/parallel.hpp"

namespace toruskam {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                 e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640,
                 e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

// Augmented right-hand side. Layout depends on mode:
//  order 0: z(2n)
//  order 1: z, M (2n x 2n)
//  order 2: z, M, T ((2n)^3)
//  order -2 (directional): z, M, m1(2n), m2(2n), B(2n)
struct Rhs {
    const VectorFieldSpec& spec;
    int order;
    int N;
    mutable std::vector<double> dzx;   // (2n)^2 scratch
    mutable std::vector<double> d2zx;  // (2n)^3 scratch, order-2 only

    Rhs(const VectorFieldSpec& s, int ord)
        : spec(s), order(ord), N(s.dim()), dzx(static_cast<std::size_t>(N) * N) {
        if (order == 2 || order == -2)
            d2zx.resize(static_cast<std::size_t>(N) * N * N);
    }

    std::size_t size() const {
        std::size_t n = static_cast<std::size_t>(N);
        if (order == 0) return n;
        if (order == 1) return n + n * n;
        if (order == 2) return n + n * n + n * n * n;
        return n + n * n + 3 * n;  // directional
    }

    void operator()(double t, const double* y, double* dy,
                    const std::vector<double>& phi0) const {
        const std::size_t n = static_cast<std::size_t>(N);
        std::vector<double> phi(phi0);
        for (std::size_t i = 0; i < phi.size(); ++i)
            phi[i] += spec.alpha_hat[i] * t;
        spec.X(y, phi.data(), dy);
        if (order == 0) return;
        spec.DzX(y, phi.data(), dzx.data());
        const double* M = y + n;
        double* dM = dy + n;
        for (int r = 0; r < N; ++r)
            for (int c = 0; c < N; ++c) {
                double acc = 0;
                for (int k = 0; k < N; ++k) acc += dzx[r * n + k] * M[k * n + c];
                dM[r * n + c] = acc;
            }
        if (order == 1) return;
        if (order == 2) {
            spec.D2zX(y, phi.data(), d2zx.data());
            const double* T = y + n + n * n;
            double* dT = dy + n + n * n;
            for (int i = 0; i < N; ++i)
                for (int u = 0; u < N; ++u)
                    for (int v = 0; v < N; ++v) {
                        double acc = 0;
                        for (int j = 0; j < N; ++j)
                            acc += dzx[i * n + j] * T[(j * n + u) * n + v];
                        double bil = 0;
                        for (int j = 0; j < N; ++j) {
                            double mju = M[j * n + u];
                            if (mju == 0.0) continue;
                            for (int k = 0; k < N; ++k)
                                bil += d2zx[(i * n + j) * n + k] * mju * M[k * n + v];
                        }
                        dT[(i * n + u) * n + v] = acc + bil;
                    }
            return;
        }
        // directional: m1' = DX m1, m2' = DX m2, B' = DX B + D2X[m1, m2]
        spec.D2zX(y, phi.data(), d2zx.data());
        const double* m1 = y + n + n * n;
        const double* m2 = m1 + n;
        const double* B = m2 + n;
        double* dm1 = dy + n + n * n;
        double* dm2 = dm1 + n;
        double* dB = dm2 + n;
        for (int i = 0; i < N; ++i) {
            double s1 = 0, s2 = 0, sb = 0;
            for (int j = 0; j < N; ++j) {
                s1 += dzx[i * n + j] * m1[j];
                s2 += dzx[i * n + j] * m2[j];
                sb += dzx[i * n + j] * B[j];
            }
            double bil = 0;
            for (int j = 0; j < N; ++j) {
                if (m1[j] == 0.0) continue;
                for (int k = 0; k < N; ++k)
                    bil += d2zx[(i * n + j) * n + k] * m1[j] * m2[k];
            }
            dm1[i] = s1;
            dm2[i] = s2;
            dB[i] = sb + bil;
        }
    }
};

struct IntegrationResult {
    std::vector<double> y;
    int steps = 0;
    double max_error = 0.0;
};

IntegrationResult integrate(const Rhs& rhs, std::vector<double> y0, double T,
                            double tol, const std::vector<double>& phi0,
                            const VectorFieldSpec& spec) {
    const std::size_t m = y0.size();
    IntegrationResult res;
    if (T == 0.0) {
        res.y = std::move(y0);
        return res;
    }
    const double dir = T > 0 ? 1.0 : -1.0;
    std::vector<double> y = std::move(y0);
    std::vector<double> k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), k7(m), yt(m),
        ynew(m);
    double t = 0.0;
    double h = dir * std::min(std::abs(T), 0.1);
    double err_prev = 1.0;
    rhs(t, y.data(), k1.data(), phi0);  // FSAL seed
    int rejected_in_row = 0;
    while (dir * (T - t) > 0) {
        if (std::abs(h) > std::abs(T - t)) h = T - t;
        if (std::abs(h) < 1e-15 * std::max(1.0, std::abs(T)))
            throw FlowError("step-size underflow at t=" + std::to_string(t));
        auto stage = [&](const std::vector<double>& coefs, double cfrac,
                         std::vector<double>& kout) {
            for (std::size_t i = 0; i < m; ++i) {
                double acc = 0;
                if (coefs.size() > 0) acc += coefs[0] * k1[i];
                if (coefs.size() > 1) acc += coefs[1] * k2[i];
                if (coefs.size() > 2) acc += coefs[2] * k3[i];
                if (coefs.size() > 3) acc += coefs[3] * k4[i];
                if (coefs.size() > 4) acc += coefs[4] * k5[i];
                if (coefs.size() > 5) acc += coefs[5] * k6[i];
                yt[i] = y[i] + h * acc;
            }
            rhs(t + cfrac * h, yt.data(), kout.data(), phi0);
        };
        stage({a21}, c2, k2);
        stage({a31, a32}, c3, k3);
        stage({a41, a42, a43}, c4, k4);
        stage({a51, a52, a53, a54}, c5, k5);
        stage({a61, a62, a63, a64, a65}, 1.0, k6);
        for (std::size_t i = 0; i < m; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                  b5 * k5[i] + b6 * k6[i]);
        rhs(t + h, ynew.data(), k7.data(), phi0);
        double err = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double le = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                             e6 * k6[i] + e7 * k7[i]);
            double sc = tol + tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err = std::max(err, std::abs(le) / sc);
        }
        if (err <= 1.0) {
            t += h;
            y.swap(ynew);
            k1.swap(k7);  // FSAL
            ++res.steps;
            res.max_error = std::max(res.max_error, err);
            err_prev = std::max(err, 1e-10);
            rejected_in_row = 0;
            if (!spec.domain.contains(y.data(), spec.dim()))
                throw FlowError("escape from domain at t=" + std::to_string(t));
        } else if (++rejected_in_row > 64) {
            throw FlowError("integrator cannot satisfy tolerance");
        }
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2) *
                     std::pow(err_prev, 0.04);
        fac = std::min(5.0, std::max(0.2, fac));
        h *= fac;
        if (res.steps > 1000000)
            throw FlowError("step count exceeded");
    }
    res.y = std::move(y);
    return res;
}

}  // namespace

FlowJet flow_jet(const VectorFieldSpec& spec, const std::vector<double>& z,
                 const std::vector<double>& phi0, double T, double tol,
                 int order) {
    const int N = spec.dim();
    const std::size_t n = static_cast<std::size_t>(N);
    Rhs rhs(spec, order);
    std::vector<double> y0(rhs.size(), 0.0);
    std::copy(z.begin(), z.end(), y0.begin());
    if (order >= 1)
        for (int i = 0; i < N; ++i) y0[n + i * n + i] = 1.0;
    IntegrationResult res = integrate(rhs, std::move(y0), T, tol, phi0, spec);
    FlowJet jet;
    jet.tol = tol;
    jet.steps = res.steps;
    jet.max_error = res.max_error;
    jet.phi.assign(res.y.begin(), res.y.begin() + N);
    jet.dphi = DMat::identity(N);
    if (order >= 1)
        std::copy(res.y.begin() + N, res.y.begin() + N + N * N,
                  jet.dphi.a.begin());
    jet.d2phi = DTen3(N, N, N);
    if (order >= 2)
        std::copy(res.y.begin() + N + N * N, res.y.end(), jet.d2phi.a.begin());
    return jet;
}

std::vector<double> flow_second_directional(const VectorFieldSpec& spec,
                                            const std::vector<double>& z,
                                            const std::vector<double>& phi0,
                                            double T, double tol,
                                            const std::vector<double>& u,
                                            const std::vector<double>& v) {
    const int N = spec.dim();
    const std::size_t n = static_cast<std::size_t>(N);
    Rhs rhs(spec, -2);
    std::vector<double> y0(rhs.size(), 0.0);
    std::copy(z.begin(), z.end(), y0.begin());
    for (int i = 0; i < N; ++i) y0[n + i * n + i] = 1.0;
    std::copy(u.begin(), u.end(), y0.begin() + n + n * n);
    std::copy(v.begin(), v.end(), y0.begin() + n + n * n + n);
    IntegrationResult res = integrate(rhs, std::move(y0), T, tol, phi0, spec);
    return std::vector<double>(res.y.begin() + n + n * n + 2 * n, res.y.end());
}

TorusFlowData flow_on_torus(const VectorFieldSpec& spec, const MatSeries& K,
                            double T, double tol, par::Mode mode) {
    const int N = spec.dim();
    if (K.rows() != N || K.cols() != 1)
        throw ShapeError("flow_on_torus: K must be 2n x 1");
    GridField Kv = to_grid_field(K, mode);
    const GridSpec& grid = K.grid();
    TorusFlowData out;
    out.phiK = GridField(grid, N, 1);
    out.DphiK = GridField(grid, N, N);
    const std::size_t nodes = grid.node_count();
    std::vector<int> steps(nodes, 0);
    std::vector<std::string> failures(nodes);
    par::for_each(
        nodes,
        [&](std::size_t i) {
            std::vector<double> x;
            grid.node_point(i, x);
            std::vector<double> phi(x.begin() + grid.dims_internal(), x.end());
            std::vector<double> z(Kv.node(i), Kv.node(i) + N);
            try {
                FlowJet jet = flow_jet(spec, z, phi, T, tol, 1);
                std::copy(jet.phi.begin(), jet.phi.end(), out.phiK.node(i));
                std::copy(jet.dphi.a.begin(), jet.dphi.a.end(),
                          out.DphiK.node(i));
                steps[i] = jet.steps;
            } catch (const Error& e) {
                failures[i] = e.what();
            }
        },
        mode);
    for (std::size_t i = 0; i < nodes; ++i) {
        if (!failures[i].empty())
            throw FlowError(failures[i] + " (grid node " + std::to_string(i) + ")");
        out.total_steps += steps[i];
    }
    out.phiK_series = out.phiK.to_series(mode);
    out.DphiK_series = out.DphiK.to_series(mode);
    return out;
}

void set_domain_from_torus_swept(VectorFieldSpec& spec, const MatSeries& K,
                                 double R, double T, double tol,
                                 int substeps) {
    const int N = spec.dim();
    GridField Kv = to_grid_field(K);
    const GridSpec& grid = K.grid();
    spec.domain.enabled = false;
    std::vector<double> lo(N, std::numeric_limits<double>::infinity());
    std::vector<double> hi(N, -std::numeric_limits<double>::infinity());
    const std::size_t nodes = grid.node_count();
    std::vector<std::vector<double>> los(nodes, lo), his(nodes, hi);
    par::for_each(nodes, [&](std::size_t i) {
        std::vector<double> x;
        grid.node_point(i, x);
        std::vector<double> phi(x.begin() + grid.dims_internal(), x.end());
        std::vector<double> z(Kv.node(i), Kv.node(i) + N);
        auto absorb = [&](const std::vector<double>& p) {
            for (int c = 0; c < N; ++c) {
                los[i][c] = std::min(los[i][c], p[c]);
                his[i][c] = std::max(his[i][c], p[c]);
            }
        };
        absorb(z);
        for (int k = 1; k <= substeps; ++k) {
            FlowJet jet = flow_jet(spec, z, phi, T * k / substeps, tol, 0);
            absorb(jet.phi);
        }
    });
    for (std::size_t i = 0; i < nodes; ++i)
        for (int c = 0; c < N; ++c) {
            lo[c] = std::min(lo[c], los[i][c]);
            hi[c] = std::max(hi[c], his[i][c]);
        }
    for (int c = 0; c < N; ++c) {
        lo[c] -= R;
        hi[c] += R;
    }
    spec.domain.lo = std::move(lo);
    spec.domain.hi = std::move(hi);
    spec.domain.enabled = true;
}

double symplecticity_defect(const VectorFieldSpec& spec,
                            const std::vector<double>& z,
                            const std::vector<double>& phi0, double T,
                            double tol) {
    FlowJet jet = flow_jet(spec, z, phi0, T, tol, 1);
    DMat om_end = spec.geom.Omega(jet.phi);
    DMat om_start = spec.geom.Omega(z);
    DMat defect = jet.dphi.transposed() * om_end * jet.dphi - om_start;
    return defect.norm();
}

}  // namespace toruskam
