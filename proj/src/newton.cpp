#include "toruskam/newton.hpp"

#include <cmath>
#include <string>

#include "toruskam/errors.hpp"
#include "toruskam/parallel.hpp"

namespace toruskam {

namespace {

// Gauss-Legendre nodes/weights on [0,1].
void gauss_legendre_01(int order, std::vector<double>& x,
                       std::vector<double>& w) {
    std::vector<double> t, v;
    switch (order) {
        case 4:
            t = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                 0.8611363115940526};
            v = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                 0.3478548451374538};
            break;
        case 8:
            t = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                 -0.1834346424956498, 0.1834346424956498, 0.5255324099163290,
                 0.7966664774136267, 0.9602898564975363};
            v = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                 0.2223810344533745, 0.1012285362903763};
            break;
        case 6:
        default:
            t = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                 0.2386191860831969, 0.6612093864662645, 0.9324695142031521};
            v = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                 0.4679139345726910, 0.3607615730481386, 0.1713244923791704};
            break;
    }
    x.resize(t.size());
    w.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        x[i] = 0.5 * (t[i] + 1.0);
        w[i] = 0.5 * v[i];
    }
}

}  // namespace

MatSeries EtaSplit::concat() const {
    const int nm1 = e1.rows();
    const int n = nm1 + 1;
    const GridSpec& g = e2.grid();
    MatSeries v(g, 2 * n, 1);
    for (int r = 0; r < nm1; ++r) v.at(r, 0) = e1.at(r, 0);
    v.at(n - 1, 0) = e2.at(0, 0);
    for (int r = 0; r < nm1; ++r) v.at(n + r, 0) = e3.at(r, 0);
    v.at(2 * n - 1, 0) = e4.at(0, 0);
    return v;
}

EtaSplit EtaSplit::split(const MatSeries& v, int n) {
    if (v.rows() != 2 * n || v.cols() != 1)
        throw ShapeError("split expects a 2n x 1 vector of series");
    EtaSplit s;
    s.e1 = v.block(0, 0, n - 1, 1);
    s.e2 = v.block(n - 1, 0, 1, 1);
    s.e3 = v.block(n, 0, n - 1, 1);
    s.e4 = v.block(2 * n - 1, 0, 1, 1);
    return s;
}

InvarianceErrors compute_errors(const MatSeries& K, const MatSeries& W,
                                const ContractionPair& lambda,
                                const TorusFlowData& flow,
                                const std::vector<double>& omega,
                                const std::vector<double>& alpha) {
    InvarianceErrors e;
    e.EK = flow.phiK_series - K.rotated(omega, alpha);
    GridField Wv = to_grid_field(W);
    GridField DphiW = gf_matmul(flow.DphiK, Wv);
    e.EW = DphiW.to_series() - W.rotated(omega, alpha).scaled(lambda.lambda);
    e.normEK0 = e.EK.strip_norm(0.0);
    e.normEW0 = e.EW.strip_norm(0.0);
    return e;
}

EtaSplit project_eta(const MatSeries& E, const FrameBundle& frame, int n) {
    GridField Ev = to_grid_field(E);
    GridField M = gf_matmul(gf_matmul(gf_transpose(frame.PRv), frame.OmKRv), Ev);
    // eta = Omega_0 M: top block = -M_bottom, bottom block = +M_top
    GridField eta(M.grid, 2 * n, 1);
    const std::size_t nodes = eta.nodes();
    for (std::size_t i = 0; i < nodes; ++i) {
        const double* m = M.node(i);
        double* o = eta.node(i);
        for (int r = 0; r < n; ++r) {
            o[r] = -m[n + r];
            o[n + r] = m[r];
        }
    }
    return EtaSplit::split(eta.to_series(), n);
}

TorusCorrection solve_torus_correction(const EtaSplit& etaK,
                                       const FrameBundle& frame,
                                       const MatSeries& K,
                                       const ContractionPair& lambda,
                                       const std::vector<double>& omega,
                                       const std::vector<double>& alpha,
                                       const DiophantineParams& dio) {
    const int n = frame.L.cols();
    TorusCorrection out;

    // xi2: la xi - xi o R = eta2
    MatSeries xi2 = solve_nonresonant(lambda.lambda, 1.0, etaK.e2, omega, alpha);
    // R eta3 (zero average)
    MatSeries Reta3 = solve_small_divisor(etaK.e3, dio);
    // <xi3> = <S>^{-1} <eta1 - S R eta3>
    MatSeries S_Reta3 = matmul(frame.S, Reta3);
    MatSeries obstruction = etaK.e1 - S_Reta3;
    std::vector<double> avg_ob = obstruction.average();
    out.avg_eta3 = etaK.e3.average();
    std::vector<double> avg_xi3 = frame.avgS_inv * avg_ob;
    out.avg_xi3 = avg_xi3;
    MatSeries xi3 = Reta3;
    for (int r = 0; r < n - 1; ++r) xi3.at(r, 0).coef()[0] += cplx(avg_xi3[r], 0);
    // xi1 = R(eta1 - S xi3), average 0 by the gauge choice
    MatSeries rhs1 = etaK.e1 - matmul(frame.S, xi3);
    MatSeries xi1 = solve_small_divisor(rhs1, dio);
    // xi4: la^{-1} xi - xi o R = eta4
    MatSeries xi4 =
        solve_nonresonant(lambda.lambda_inv, 1.0, etaK.e4, omega, alpha);

    out.xi.e1 = xi1;
    out.xi.e2 = xi2;
    out.xi.e3 = xi3;
    out.xi.e4 = xi4;
    out.xiK = out.xi.concat();
    out.DeltaK = matmul(frame.P, out.xiK);
    out.DeltaK.zero_band_edge(2);  // corrections keep a band-edge margin
    out.Kbar = K + out.DeltaK;
    return out;
}

BundleEta compute_eta_W(const MatSeries& EW, const MatSeries& DeltaK,
                        const MatSeries& W, const VectorFieldSpec& spec,
                        const FrameBundle& frame, const MatSeries& K,
                        double T, double tol, int quad_order, par::Mode mode) {
    const int N = spec.dim();
    const int n = spec.n;
    BundleEta out;
    std::vector<double> xs, ws;
    gauss_legendre_01(quad_order, xs, ws);

    const GridSpec& grid = K.grid();
    GridField acc(grid, N, 1);
    GridField dKv = to_grid_field(DeltaK, mode);
    GridField Wv = to_grid_field(W, mode);
    const std::size_t nodes = grid.node_count();

    if (dKv.max_abs() > 0) {
        for (std::size_t q = 0; q < xs.size(); ++q) {
            MatSeries Ks = K + DeltaK.scaled(xs[q]);
            GridField Ksv = to_grid_field(Ks, mode);
            std::vector<std::string> failures(nodes);
            par::for_each(
                nodes,
                [&](std::size_t i) {
                    std::vector<double> x;
                    grid.node_point(i, x);
                    std::vector<double> phi(x.begin() + grid.dims_internal(),
                                            x.end());
                    std::vector<double> z(Ksv.node(i), Ksv.node(i) + N);
                    std::vector<double> u(dKv.node(i), dKv.node(i) + N);
                    std::vector<double> v(Wv.node(i), Wv.node(i) + N);
                    try {
                        std::vector<double> b = flow_second_directional(
                            spec, z, phi, T, tol, u, v);
                        double* o = acc.node(i);
                        for (int r = 0; r < N; ++r) o[r] += ws[q] * b[r];
                    } catch (const Error& e) {
                        failures[i] = e.what();
                    }
                },
                mode);
            for (std::size_t i = 0; i < nodes; ++i)
                if (!failures[i].empty())
                    throw FlowError(failures[i] + " (homotopy node " +
                                    std::to_string(i) + ")");
        }
    }
    out.tildeEW = EW + acc.to_series(mode);
    out.etaW = project_eta(out.tildeEW, frame, n);
    return out;
}

BundleCorrection solve_bundle_correction(const EtaSplit& etaW,
                                         const FrameBundle& frame,
                                         const MatSeries& W,
                                         const ContractionPair& lambda,
                                         const std::vector<double>& omega,
                                         const std::vector<double>& alpha,
                                         const DiophantineParams& dio) {
    const double la = lambda.lambda;
    BundleCorrection out;

    out.delta_lambda = -etaW.e2.average()[0];

    // xi3: xi - xi o R la = eta3
    MatSeries xi3 = solve_nonresonant(1.0, la, etaW.e3, omega, alpha);
    // xi1: xi - xi o R la = eta1 - S xi3
    MatSeries xi1 =
        solve_nonresonant(1.0, la, etaW.e1 - matmul(frame.S, xi3), omega, alpha);
    // xi2: la (xi - xi o R) = eta2 - <eta2>, average free and set to zero
    MatSeries xi2 = solve_small_divisor(etaW.e2, dio);
    for (int r = 0; r < 1; ++r)
        xi2.at(r, 0) *= 1.0 / la;
    // xi4: la^{-1} xi - xi o R la = eta4
    MatSeries xi4 =
        solve_nonresonant(lambda.lambda_inv, la, etaW.e4, omega, alpha);

    out.xi.e1 = xi1;
    out.xi.e2 = xi2;
    out.xi.e3 = xi3;
    out.xi.e4 = xi4;
    out.xiW = out.xi.concat();
    out.DeltaW = matmul(frame.P, out.xiW);
    out.DeltaW.zero_band_edge(2);  // corrections keep a band-edge margin
    out.Wbar = W + out.DeltaW;

    double lb = la + out.delta_lambda;
    if (lb == 0.0 || std::abs(lb) >= 1.0)
        throw HyperbolicityError("corrected lambda " + std::to_string(lb) +
                                 " left (-1,1) \\ {0}");
    out.lambda_bar = ContractionPair(lb);
    return out;
}

TorusSolution iterate(const NewtonContext& ctx, MatSeries K, MatSeries W,
                      ContractionPair lambda, const NewtonOptions& opts) {
    const VectorFieldSpec& spec = *ctx.spec;
    const int n = spec.n;
    const double rho = opts.rho, rho_inf = opts.rho_inf;
    double delta0 = opts.delta > 0 ? opts.delta : (rho - rho_inf) / 6.0;
    if (!(rho > rho_inf && rho_inf > 0))
        throw ConfigError("need rho > rho_inf > 0");
    if (!(delta0 < (rho - rho_inf) / 3.0))
        throw ConfigError("need delta < (rho - rho_inf)/3");
    const double a = (rho - rho_inf) / (rho - 3.0 * delta0 - rho_inf);

    TorusSolution sol;
    double rho_j = rho;
    double prevE = std::numeric_limits<double>::infinity();
    int growth_streak = 0;

    for (int j = 0; j <= opts.max_iters; ++j) {
        TorusFlowData flow = flow_on_torus(spec, K, ctx.T, ctx.integrator_tol);
        InvarianceErrors errors =
            compute_errors(K, W, lambda, flow, ctx.omega, ctx.alpha);
        double delta_j = delta0 / std::pow(a, j);
        IterRecord rec;
        rec.j = j;
        rec.rho_j = rho_j;
        rec.delta_j = delta_j;
        rec.normEK = errors.EK.strip_norm(rho_j);
        rec.normEW = errors.EW.strip_norm(rho_j);
        rec.normEK0 = errors.normEK0;
        rec.normEW0 = errors.normEW0;
        rec.lambda = lambda.lambda;
        rec.E_j = std::max(
            rec.normEK / (ctx.dio.gamma * ctx.dio.gamma *
                          std::pow(delta_j, 2.0 * ctx.dio.tau)),
            rec.normEW);
        rec.truncation_tail =
            std::max(errors.EK.truncation_tail(), K.truncation_tail());

        double e0 = std::max(errors.normEK0, errors.normEW0);
        if (!std::isfinite(e0))
            throw DivergenceError("invariance error is not finite");

        if (e0 <= opts.stop_tol) {
            FrameBundle frame =
                build_frame(K, W, lambda, spec, flow, ctx.omega, ctx.alpha,
                            opts.frame, &ctx.dio);
            rec.avgS_inv_norm = frame.avgS_inv_norm;
            if (opts.on_iteration) opts.on_iteration(rec);
            sol.history.push_back(rec);
            sol.K = std::move(K);
            sol.W = std::move(W);
            sol.lambda = lambda;
            sol.frame = std::move(frame);
            sol.errors = std::move(errors);
            sol.converged = true;
            sol.iterations = j;
            sol.rho_final = rho_j;
            return sol;
        }
        if (j == opts.max_iters) break;

        if (e0 > prevE) {
            if (++growth_streak >= 2)
                throw DivergenceError(
                    "invariance error grew twice in a row (" +
                    std::to_string(prevE) + " -> " + std::to_string(e0) + ")");
        } else {
            growth_streak = 0;
        }
        prevE = e0;

        FrameBundle frame = build_frame(K, W, lambda, spec, flow, ctx.omega,
                                        ctx.alpha, opts.frame, &ctx.dio);
        rec.avgS_inv_norm = frame.avgS_inv_norm;
        if (opts.on_iteration) opts.on_iteration(rec);
        sol.history.push_back(rec);

        EtaSplit etaK = project_eta(errors.EK, frame, n);
        TorusCorrection tc = solve_torus_correction(etaK, frame, K, lambda,
                                                    ctx.omega, ctx.alpha,
                                                    ctx.dio);
        BundleEta be =
            compute_eta_W(errors.EW, tc.DeltaK, W, spec, frame, K, ctx.T,
                          ctx.integrator_tol, opts.quad_order);
        BundleCorrection bc = solve_bundle_correction(
            be.etaW, frame, W, lambda, ctx.omega, ctx.alpha, ctx.dio);

        K = tc.Kbar;
        W = bc.Wbar;
        lambda = bc.lambda_bar;
        rho_j = std::max(rho_inf, rho_j - 3.0 * delta_j);
    }

    throw DivergenceError("no convergence within " +
                          std::to_string(opts.max_iters) + " iterations");
}

}  // namespace toruskam
