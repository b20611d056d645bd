#include "toruskam/system.hpp"

#include <cmath>
#include <random>

#include "toruskam/errors.hpp"

namespace toruskam {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double VectorFieldSpec::hamiltonian_residual(
    const std::vector<double>& z, const std::vector<double>& phi) const {
    const int N = dim();
    std::vector<double> x(N), dh(N);
    X(z.data(), phi.data(), x.data());
    DzH(z.data(), phi.data(), dh.data());
    DMat Om = geom.Omega(z);
    double worst = 0;
    for (int i = 0; i < N; ++i) {
        double acc = 0;
        for (int j = 0; j < N; ++j) acc += Om(i, j) * x[j];
        worst = std::max(worst, std::abs(acc - dh[i]));
    }
    return worst;
}

void VectorFieldSpec::set_domain_from_torus(const MatSeries& K0, double R) {
    const int N = dim();
    GridField kv = to_grid_field(K0);
    domain.lo.assign(N, std::numeric_limits<double>::infinity());
    domain.hi.assign(N, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < kv.nodes(); ++i) {
        const double* z = kv.node(i);
        for (int c = 0; c < N; ++c) {
            domain.lo[c] = std::min(domain.lo[c], z[c]);
            domain.hi[c] = std::max(domain.hi[c], z[c]);
        }
    }
    for (int c = 0; c < N; ++c) {
        domain.lo[c] -= R;
        domain.hi[c] += R;
    }
    domain.enabled = true;
}

double TrigPoly::eval(double phi) const {
    double v = c0;
    for (std::size_t i = 0; i < k.size(); ++i)
        v += ck[i] * std::cos(kTwoPi * k[i] * phi) +
             sk[i] * std::sin(kTwoPi * k[i] * phi);
    return v;
}

int TrigPoly::band() const {
    int b = 0;
    for (int kk : k) b = std::max(b, std::abs(kk));
    return b;
}

GridSpec BenchmarkSystem::make_grid(const std::vector<int>& sizes) const {
    return GridSpec(d, ell, sizes);
}

namespace {

TrigPoly default_forcing(const TrigPoly& g) {
    if (!g.k.empty() || g.c0 != 0.0) return g;
    TrigPoly def;
    def.k = {1};
    def.ck = {1.0};
    def.sk = {0.0};
    return def;
}

// Quasi-periodic response of pdot = -mu p - eps g(phi(t)), phi advancing at
// rate alpha_hat: P_hat(k) = -eps g_hat(k) / (mu + 2 pi i k alpha_hat).
Series dichotomy_response(const GridSpec& grid, int phi_axis,
                          const TrigPoly& g, double mu, double eps,
                          double alpha_hat) {
    Series p(grid);
    auto set_mode = [&](int kk, cplx ghat) {
        std::vector<int> m(grid.axes(), 0);
        m[phi_axis] = kk;
        cplx denom(mu, kTwoPi * kk * alpha_hat);
        p.set_freq(m, -eps * ghat / denom);
    };
    if (g.c0 != 0.0) set_mode(0, cplx(g.c0, 0));
    for (std::size_t i = 0; i < g.k.size(); ++i) {
        cplx ghat(0.5 * g.ck[i], -0.5 * g.sk[i]);
        set_mode(g.k[i], ghat);
        set_mode(-g.k[i], std::conj(ghat));
    }
    p.hermitize();
    return p;
}

std::pair<VectorFieldSpec, BenchmarkSystem> make_linear_saddle(
    BenchmarkParams params) {
    params.g = default_forcing(params.g);
    const int n = 2, N = 4;
    const double T = params.T;
    if (T <= 0) throw ConfigError("linear-saddle-forced: T must be positive");
    const double w1 = kTwoPi / T;  // clock returns after time T
    const double mu = params.mu, eps = params.eps, r = params.r2;
    const double ahat = params.alpha / T;
    const TrigPoly g = params.g;

    VectorFieldSpec spec;
    spec.n = n;
    spec.ell = 1;
    spec.alpha_hat = {ahat};
    spec.geom = GeometryTriple::standard(n);
    spec.H = [w1, mu, eps, g](const double* z, const double* phi) {
        return w1 * 0.5 * (z[0] * z[0] + z[2] * z[2]) + mu * z[1] * z[3] +
               eps * g.eval(phi[0]) * z[1];
    };
    spec.X = [w1, mu, eps, g](const double* z, const double* phi, double* out) {
        out[0] = w1 * z[2];
        out[1] = mu * z[1];
        out[2] = -w1 * z[0];
        out[3] = -mu * z[3] - eps * g.eval(phi[0]);
    };
    spec.DzX = [w1, mu](const double* /*z*/, const double* /*phi*/, double* out) {
        for (int i = 0; i < N * N; ++i) out[i] = 0;
        out[0 * N + 2] = w1;
        out[1 * N + 1] = mu;
        out[2 * N + 0] = -w1;
        out[3 * N + 3] = -mu;
    };
    spec.D2zX = [](const double*, const double*, double* out) {
        for (int i = 0; i < N * N * N; ++i) out[i] = 0;
    };
    spec.DzH = [w1, mu, eps, g](const double* z, const double* phi, double* out) {
        out[0] = w1 * z[0];
        out[1] = mu * z[3] + eps * g.eval(phi[0]);
        out[2] = w1 * z[2];
        out[3] = mu * z[1];
    };
    spec.D2zH = [w1, mu](const double*, const double*, double* out) {
        for (int i = 0; i < N * N; ++i) out[i] = 0;
        out[0 * N + 0] = w1;
        out[2 * N + 2] = w1;
        out[1 * N + 3] = mu;
        out[3 * N + 1] = mu;
    };

    BenchmarkSystem sys;
    sys.name = "linear-saddle-forced";
    sys.params = params;
    sys.n = n;
    sys.d = 0;
    sys.ell = 1;
    sys.lambda_exact = std::exp(-mu * T);
    sys.omega_vec = {};
    sys.alpha_vec = {params.alpha};
    sys.K_exact = [r, g, mu, eps, ahat](const GridSpec& grid) {
        if (grid.dims_internal() != 0 || grid.dims_external() != 1)
            throw ShapeError("linear-saddle-forced expects a T^1 grid");
        MatSeries K(grid, N, 1);
        K.at(0, 0) = Series::constant(grid, r);
        K.at(3, 0) = dichotomy_response(grid, 0, g, mu, eps, ahat);
        return K;
    };
    sys.W_exact = [](const GridSpec& grid) {
        MatSeries W(grid, N, 1);
        W.at(3, 0) = Series::constant(grid, 1.0);
        return W;
    };
    return {spec, sys};
}

std::pair<VectorFieldSpec, BenchmarkSystem> make_twisted_saddle(
    BenchmarkParams params) {
    params.g = default_forcing(params.g);
    const int n = 3, N = 6;
    const double T = params.T;
    if (T <= 0) throw ConfigError("twisted-saddle: T must be positive");
    const double a1 = params.a1, a2 = params.a2;
    const double r1 = params.r1, r2 = params.r2;
    if (r1 <= 0 || r2 <= 0)
        throw ConfigError("twisted-saddle: circle radii must be positive");
    // Frequencies pinned so the internal circle rotates by omega and the
    // clock circle closes after time T.
    const double w1 = kTwoPi * params.omega / T - a1 * r1 * r1;
    const double w2 = kTwoPi / T - a2 * r2 * r2;
    const double mu = params.mu, eps = params.eps;
    const double ahat = params.alpha / T;
    const TrigPoly g = params.g;

    VectorFieldSpec spec;
    spec.n = n;
    spec.ell = 1;
    spec.alpha_hat = {ahat};
    spec.geom = GeometryTriple::standard(n);
    // index map: q1 q2 q3 p1 p2 p3 = 0 1 2 3 4 5
    spec.H = [=](const double* z, const double* phi) {
        double I1 = 0.5 * (z[0] * z[0] + z[3] * z[3]);
        double I2 = 0.5 * (z[1] * z[1] + z[4] * z[4]);
        return w1 * I1 + a1 * I1 * I1 + w2 * I2 + a2 * I2 * I2 +
               mu * z[2] * z[5] + eps * g.eval(phi[0]) * z[2];
    };
    spec.X = [=](const double* z, const double* phi, double* out) {
        double O1 = w1 + a1 * (z[0] * z[0] + z[3] * z[3]);
        double O2 = w2 + a2 * (z[1] * z[1] + z[4] * z[4]);
        out[0] = O1 * z[3];
        out[1] = O2 * z[4];
        out[2] = mu * z[2];
        out[3] = -O1 * z[0];
        out[4] = -O2 * z[1];
        out[5] = -mu * z[5] - eps * g.eval(phi[0]);
    };
    spec.DzX = [=](const double* z, const double* /*phi*/, double* out) {
        for (int i = 0; i < N * N; ++i) out[i] = 0;
        auto pair = [&](int q, int p, double w, double a) {
            double u = z[q], v = z[p];
            double O = w + a * (u * u + v * v);
            out[q * N + q] = 2 * a * u * v;
            out[q * N + p] = O + 2 * a * v * v;
            out[p * N + q] = -O - 2 * a * u * u;
            out[p * N + p] = -2 * a * u * v;
        };
        pair(0, 3, w1, a1);
        pair(1, 4, w2, a2);
        out[2 * N + 2] = mu;
        out[5 * N + 5] = -mu;
    };
    spec.D2zX = [=](const double* z, const double* /*phi*/, double* out) {
        for (int i = 0; i < N * N * N; ++i) out[i] = 0;
        auto set = [&](int i, int j, int k, double v) {
            out[(i * N + j) * N + k] = v;
            out[(i * N + k) * N + j] = v;
        };
        auto fill = [&](int i, int j, int k, double v) {
            if (j == k)
                out[(i * N + j) * N + k] = v;
            else
                set(i, j, k, v);
        };
        auto pair = [&](int q, int p, double a) {
            double u = z[q], v = z[p];
            // X_q = w v + a u^2 v + a v^3 ; X_p = -(w u + a u^3 + a u v^2)
            fill(q, q, q, 2 * a * v);
            fill(q, q, p, 2 * a * u);
            fill(q, p, p, 6 * a * v);
            fill(p, q, q, -6 * a * u);
            fill(p, q, p, -2 * a * v);
            fill(p, p, p, -2 * a * u);
        };
        pair(0, 3, a1);
        pair(1, 4, a2);
    };
    spec.DzH = [=](const double* z, const double* phi, double* out) {
        double O1 = w1 + a1 * (z[0] * z[0] + z[3] * z[3]);
        double O2 = w2 + a2 * (z[1] * z[1] + z[4] * z[4]);
        out[0] = O1 * z[0];
        out[1] = O2 * z[1];
        out[2] = mu * z[5] + eps * g.eval(phi[0]);
        out[3] = O1 * z[3];
        out[4] = O2 * z[4];
        out[5] = mu * z[2];
    };
    spec.D2zH = [=](const double* z, const double* /*phi*/, double* out) {
        for (int i = 0; i < N * N; ++i) out[i] = 0;
        auto pair = [&](int q, int p, double w, double a) {
            double u = z[q], v = z[p];
            double O = w + a * (u * u + v * v);
            out[q * N + q] = O + 2 * a * u * u;
            out[q * N + p] = 2 * a * u * v;
            out[p * N + q] = 2 * a * u * v;
            out[p * N + p] = O + 2 * a * v * v;
        };
        pair(0, 3, w1, a1);
        pair(1, 4, w2, a2);
        out[2 * N + 5] = mu;
        out[5 * N + 2] = mu;
    };

    BenchmarkSystem sys;
    sys.name = "twisted-saddle";
    sys.params = params;
    sys.n = n;
    sys.d = 1;
    sys.ell = 1;
    sys.lambda_exact = std::exp(-mu * T);
    sys.omega_vec = {params.omega};
    sys.alpha_vec = {params.alpha};
    sys.K_exact = [r1, r2, g, mu, eps, ahat](const GridSpec& grid) {
        if (grid.dims_internal() != 1 || grid.dims_external() != 1)
            throw ShapeError("twisted-saddle expects a T^2 grid");
        MatSeries K(grid, N, 1);
        // q1 = r1 cos(2 pi theta), p1 = -r1 sin(2 pi theta)
        K.at(0, 0).set_freq({1, 0}, cplx(0.5 * r1, 0));
        K.at(0, 0).set_freq({-1, 0}, cplx(0.5 * r1, 0));
        K.at(3, 0).set_freq({1, 0}, cplx(0, 0.5 * r1));
        K.at(3, 0).set_freq({-1, 0}, cplx(0, -0.5 * r1));
        K.at(1, 0) = Series::constant(grid, r2);
        K.at(5, 0) = dichotomy_response(grid, 1, g, mu, eps, ahat);
        return K;
    };
    sys.W_exact = [](const GridSpec& grid) {
        MatSeries W(grid, N, 1);
        W.at(5, 0) = Series::constant(grid, 1.0);
        return W;
    };
    return {spec, sys};
}

}  // namespace

std::pair<VectorFieldSpec, BenchmarkSystem> make_benchmark(
    const std::string& name, const BenchmarkParams& params) {
    if (name == "linear-saddle-forced") return make_linear_saddle(params);
    if (name == "twisted-saddle") return make_twisted_saddle(params);
    throw ConfigError("unknown benchmark system '" + name + "'");
}

MatSeries perturbed(const MatSeries& K, double amplitude, int n_modes,
                    unsigned seed, int max_mode) {
    MatSeries out = K;
    if (amplitude == 0.0 || n_modes <= 0) return out;
    const GridSpec& g = K.grid();
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> comp(0, K.rows() - 1);
    std::uniform_real_distribution<double> phase(0.0, 1.0);
    for (int mode = 0; mode < n_modes; ++mode) {
        std::vector<int> m(g.axes());
        bool nonzero = false;
        for (int a = 0; a < g.axes(); ++a) {
            int cap = std::min(max_mode, g.size(a) / 2 - 1);
            std::uniform_int_distribution<int> mi(-cap, cap);
            m[a] = mi(rng);
            nonzero = nonzero || m[a] != 0;
        }
        if (!nonzero) m[g.axes() - 1] = 1;
        double ph = kTwoPi * phase(rng);
        int r = comp(rng);
        Series& s = out.at(r, 0);
        cplx bump = 0.5 * amplitude * cplx(std::cos(ph), std::sin(ph));
        s.set_freq(m, s.at_freq(m) + bump);
        std::vector<int> mneg(m);
        for (auto& x : mneg) x = -x;
        s.set_freq(mneg, s.at_freq(mneg) + std::conj(bump));
        s.hermitize();
    }
    return out;
}

}  // namespace toruskam
