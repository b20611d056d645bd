#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "toruskam/errors.hpp"
#include "toruskam/newton.hpp"

using namespace toruskam;
using tk_test::twisted_params;

namespace {

struct Ctx {
    VectorFieldSpec spec;
    BenchmarkSystem sys;
    GridSpec grid;
    MatSeries K, W;
    ContractionPair lambda;
    DiophantineParams dio;

    NewtonContext context() const {
        NewtonContext c;
        c.spec = &spec;
        c.omega = sys.omega_vec;
        c.alpha = sys.alpha_vec;
        c.T = sys.params.T;
        c.integrator_tol = 1e-12;
        c.dio = dio;
        return c;
    }
};

Ctx make_ctx(double eps = 0.02, int ngrid = 16, double domain_R = 0.6) {
    BenchmarkParams p = twisted_params(eps);
    auto [spec, sys] = make_benchmark("twisted-saddle", p);
    Ctx c;
    c.spec = std::move(spec);
    c.sys = std::move(sys);
    c.grid = c.sys.make_grid({ngrid, ngrid});
    c.K = c.sys.K_exact(c.grid);
    c.W = c.sys.W_exact(c.grid);
    c.lambda = ContractionPair(c.sys.lambda_exact);
    set_domain_from_torus_swept(c.spec, c.K, domain_R, p.T, 1e-12);
    c.dio.omega = c.sys.omega_vec;
    c.dio.alpha = c.sys.alpha_vec;
    c.dio.tau = 2.0;
    c.dio.certified_band = ngrid;
    c.dio.gamma =
        diophantine_gamma(c.dio.omega, c.dio.alpha, 2.0, c.dio.certified_band);
    return c;
}

}  // namespace

TEST_CASE("compute_errors: scaling in the perturbation and in delta-lambda") {
    Ctx c = make_ctx(0.02);
    NewtonContext ctx = c.context();

    TorusFlowData flow = flow_on_torus(c.spec, c.K, ctx.T, 1e-12);
    InvarianceErrors e0 =
        compute_errors(c.K, c.W, c.lambda, flow, ctx.omega, ctx.alpha);
    CHECK(e0.normEK0 < 1e-9);
    CHECK(e0.normEW0 < 1e-9);

    // ||EK|| = Theta(eps): slope 1 in log-log over three decades
    std::vector<double> eps_list = {1e-3, 1e-4, 1e-5}, errs;
    for (double ep : eps_list) {
        MatSeries Kp = c.K;
        Series bump(c.grid);
        bump.set_freq({1, 1}, cplx(0.5 * ep, 0));
        bump.set_freq({-1, -1}, cplx(0.5 * ep, 0));
        Kp.at(2, 0) += bump;
        TorusFlowData fp = flow_on_torus(c.spec, Kp, ctx.T, 1e-12);
        InvarianceErrors ep_err =
            compute_errors(Kp, c.W, c.lambda, fp, ctx.omega, ctx.alpha);
        errs.push_back(ep_err.normEK0);
    }
    double slope01 = std::log(errs[0] / errs[1]) / std::log(10.0);
    double slope12 = std::log(errs[1] / errs[2]) / std::log(10.0);
    CHECK(slope01 == doctest::Approx(1.0).epsilon(0.05));
    CHECK(slope12 == doctest::Approx(1.0).epsilon(0.05));

    // lambda -> lambda + 1e-3 with exact W: EW = -W o R * 1e-3
    InvarianceErrors el = compute_errors(
        c.K, c.W, ContractionPair(c.lambda.lambda + 1e-3), flow, ctx.omega,
        ctx.alpha);
    MatSeries expected = c.W.rotated(ctx.omega, ctx.alpha).scaled(-1e-3);
    double diff = 0;
    for (int r = 0; r < 6; ++r)
        diff = std::max(
            diff, tk_test::max_coef_diff(el.EW.at(r, 0), expected.at(r, 0)));
    CHECK(diff < 1e-9);
}

TEST_CASE("project_eta: zero input, dense per-node solve consistency, "
          "quadratically small averages") {
    Ctx c = make_ctx(0.02);
    NewtonContext ctx = c.context();
    TorusFlowData flow = flow_on_torus(c.spec, c.K, ctx.T, 1e-12);
    FrameBundle frame = build_frame(c.K, c.W, c.lambda, c.spec, flow, ctx.omega,
                                    ctx.alpha);

    SUBCASE("EK = 0 gives all-zero blocks") {
        MatSeries zero(c.grid, 6, 1);
        EtaSplit eta = project_eta(zero, frame, 3);
        CHECK(eta.e1.strip_norm(0) == 0.0);
        CHECK(eta.e2.strip_norm(0) == 0.0);
        CHECK(eta.e3.strip_norm(0) == 0.0);
        CHECK(eta.e4.strip_norm(0) == 0.0);
    }

    SUBCASE("E = (P o R) v recovers -v through the projection") {
        MatSeries v(c.grid, 6, 1);
        for (int r = 0; r < 6; ++r)
            v.at(r, 0) = tk_test::random_series(c.grid, 900 + r, 2);
        GridField vv = to_grid_field(v);
        GridField E = gf_matmul(frame.PRv, vv);
        EtaSplit eta = project_eta(E.to_series(), frame, 3);
        MatSeries etas = eta.concat();
        GridField etav = to_grid_field(etas);
        double worst = 0;
        for (std::size_t i = 0; i < vv.nodes(); ++i) {
            DMat PR(6, 6), Om(6, 6);
            std::copy(frame.PRv.node(i), frame.PRv.node(i) + 36, PR.a.begin());
            std::copy(frame.OmKRv.node(i), frame.OmKRv.node(i) + 36,
                      Om.a.begin());
            std::vector<double> Ei(E.node(i), E.node(i) + 6);
            std::vector<double> t = Om * Ei;
            std::vector<double> pt = PR.transposed() * t;
            std::vector<double> oracle(6);
            for (int r = 0; r < 3; ++r) {
                oracle[r] = -pt[3 + r];
                oracle[3 + r] = pt[r];
            }
            for (int r = 0; r < 6; ++r)
                worst = std::max(worst, std::abs(oracle[r] - etav.node(i)[r]));
        }
        CHECK(worst < 1e-11);
        double apx = 0;
        for (std::size_t i = 0; i < vv.nodes(); ++i)
            for (int r = 0; r < 6; ++r)
                apx = std::max(apx, std::abs(etav.node(i)[r] + vv.node(i)[r]));
        CHECK(apx < 1e-6);
    }

    SUBCASE("averages of eta3 are quadratically small in the error") {
        std::vector<double> eps_list = {1e-3, 1e-4, 1e-5};
        std::vector<double> ek_norms, eta3_avgs;
        for (double ep : eps_list) {
            MatSeries Kp = perturbed(c.K, ep, 3, 12345u);
            TorusFlowData fp = flow_on_torus(c.spec, Kp, ctx.T, 1e-12);
            InvarianceErrors errs =
                compute_errors(Kp, c.W, c.lambda, fp, ctx.omega, ctx.alpha);
            FrameBundle fr = build_frame(Kp, c.W, c.lambda, c.spec, fp,
                                         ctx.omega, ctx.alpha);
            EtaSplit eta = project_eta(errs.EK, fr, 3);
            std::vector<double> avg = eta.e3.average();
            double a = std::max(std::abs(avg[0]), std::abs(avg[1]));
            ek_norms.push_back(errs.normEK0);
            eta3_avgs.push_back(a);
        }
        double slope = std::log(eta3_avgs[0] / eta3_avgs[2]) /
                       std::log(ek_norms[0] / ek_norms[2]);
        CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
    }
}

TEST_CASE("solve_torus_correction: trivial input, residuals, zero-mode "
          "algebra, gauge") {
    Ctx c = make_ctx(0.02);
    NewtonContext ctx = c.context();
    TorusFlowData flow = flow_on_torus(c.spec, c.K, ctx.T, 1e-12);
    FrameBundle frame = build_frame(c.K, c.W, c.lambda, c.spec, flow, ctx.omega,
                                    ctx.alpha);

    EtaSplit zero;
    zero.e1 = MatSeries(c.grid, 2, 1);
    zero.e2 = MatSeries(c.grid, 1, 1);
    zero.e3 = MatSeries(c.grid, 2, 1);
    zero.e4 = MatSeries(c.grid, 1, 1);

    SUBCASE("etaK = 0 gives xiK = 0 and Kbar = K") {
        TorusCorrection tc = solve_torus_correction(
            zero, frame, c.K, c.lambda, ctx.omega, ctx.alpha, c.dio);
        CHECK(tc.xiK.strip_norm(0) == 0.0);
        for (int r = 0; r < 6; ++r)
            CHECK(tk_test::max_coef_diff(tc.Kbar.at(r, 0), c.K.at(r, 0)) == 0.0);
    }

    SUBCASE("random eta: the reduced cohomological system holds to 1e-11") {
        EtaSplit eta = zero;
        for (int r = 0; r < 2; ++r) {
            eta.e1.at(r, 0) = tk_test::random_series(c.grid, 70 + r, 3);
            eta.e3.at(r, 0) = tk_test::random_series(c.grid, 80 + r, 3);
        }
        eta.e2.at(0, 0) = tk_test::random_series(c.grid, 90, 3);
        eta.e4.at(0, 0) = tk_test::random_series(c.grid, 91, 3);
        TorusCorrection tc = solve_torus_correction(
            eta, frame, c.K, c.lambda, ctx.omega, ctx.alpha, c.dio);
        double scale = eta.concat().strip_norm(0);
        const double la = c.lambda.lambda;

        MatSeries lhs1 = tc.xi.e1 + matmul(frame.S, tc.xi.e3) -
                         tc.xi.e1.rotated(ctx.omega, ctx.alpha);
        MatSeries d1 = lhs1 - eta.e1;
        std::vector<double> d1avg = d1.average();
        for (int r = 0; r < 2; ++r) {
            Series e = d1.at(r, 0);
            e.coef()[0] -= cplx(d1avg[r], 0);
            CHECK(e.strip_norm(0) < 1e-11 * scale);
        }
        CHECK(std::abs(d1avg[0]) < 1e-11 * scale);
        CHECK(std::abs(d1avg[1]) < 1e-11 * scale);

        MatSeries r2 = tc.xi.e2.scaled(la) -
                       tc.xi.e2.rotated(ctx.omega, ctx.alpha) - eta.e2;
        CHECK(r2.strip_norm(0) < 1e-11 * scale);

        MatSeries lhs3 = tc.xi.e3 - tc.xi.e3.rotated(ctx.omega, ctx.alpha);
        std::vector<double> e3avg = eta.e3.average();
        double w3 = 0;
        for (int r = 0; r < 2; ++r) {
            Series rhs3 = eta.e3.at(r, 0);
            rhs3.coef()[0] -= cplx(e3avg[r], 0);
            w3 = std::max(w3, (lhs3.at(r, 0) - rhs3).strip_norm(0));
        }
        CHECK(w3 < 1e-11 * scale);

        MatSeries r4 = tc.xi.e4.scaled(c.lambda.lambda_inv) -
                       tc.xi.e4.rotated(ctx.omega, ctx.alpha) - eta.e4;
        CHECK(r4.strip_norm(0) < 1e-11 * scale);

        std::vector<double> g1 = tc.xi.e1.average();
        CHECK(g1[0] == 0.0);
        CHECK(g1[1] == 0.0);
    }

    SUBCASE("zero-mode algebra: constant eta1 gives <xi3> = <S>^{-1} <eta1>") {
        EtaSplit eta = zero;
        eta.e1.at(0, 0) = Series::constant(c.grid, 0.7);
        eta.e1.at(1, 0) = Series::constant(c.grid, -0.2);
        TorusCorrection tc = solve_torus_correction(
            eta, frame, c.K, c.lambda, ctx.omega, ctx.alpha, c.dio);
        std::vector<double> expect =
            frame.avgS_inv * std::vector<double>{0.7, -0.2};
        CHECK(tc.avg_xi3[0] == doctest::Approx(expect[0]).epsilon(1e-12));
        CHECK(tc.avg_xi3[1] == doctest::Approx(expect[1]).epsilon(1e-12));
    }
}

TEST_CASE("compute_eta_W: trivial cases and quadrature self-convergence") {
    Ctx c = make_ctx(0.02);
    NewtonContext ctx = c.context();
    TorusFlowData flow = flow_on_torus(c.spec, c.K, ctx.T, 1e-12);
    FrameBundle frame = build_frame(c.K, c.W, c.lambda, c.spec, flow, ctx.omega,
                                    ctx.alpha);
    InvarianceErrors errs =
        compute_errors(c.K, c.W, c.lambda, flow, ctx.omega, ctx.alpha);

    SUBCASE("DeltaK = 0 leaves tildeEW = EW") {
        MatSeries zero(c.grid, 6, 1);
        BundleEta be = compute_eta_W(errs.EW, zero, c.W, c.spec, frame, c.K,
                                     ctx.T, 1e-12, 6);
        for (int r = 0; r < 6; ++r)
            CHECK(tk_test::max_coef_diff(be.tildeEW.at(r, 0),
                                         errs.EW.at(r, 0)) == 0.0);
    }

    SUBCASE("linear benchmark: D2 phi = 0 makes tildeEW = EW exactly") {
        BenchmarkParams p = tk_test::saddle_params(0.05);
        auto [spec1, sys1] = make_benchmark("linear-saddle-forced", p);
        GridSpec g1 = sys1.make_grid({16});
        MatSeries K1 = sys1.K_exact(g1), W1 = sys1.W_exact(g1);
        set_domain_from_torus_swept(spec1, K1, 0.6, p.T, 1e-12);
        TorusFlowData f1 = flow_on_torus(spec1, K1, p.T, 1e-12);
        ContractionPair l1(sys1.lambda_exact);
        InvarianceErrors e1 =
            compute_errors(K1, W1, l1, f1, sys1.omega_vec, sys1.alpha_vec);
        FrameBundle fr1 = build_frame(K1, W1, l1, spec1, f1, sys1.omega_vec,
                                      sys1.alpha_vec);
        MatSeries dK(g1, 4, 1);
        dK.at(0, 0) = Series::constant(g1, 0.01);
        dK.at(3, 0) = tk_test::random_series(g1, 5, 2) * 0.01;
        BundleEta be =
            compute_eta_W(e1.EW, dK, W1, spec1, fr1, K1, p.T, 1e-12, 6);
        double diff = 0;
        for (int r = 0; r < 4; ++r)
            diff = std::max(diff, tk_test::max_coef_diff(be.tildeEW.at(r, 0),
                                                         e1.EW.at(r, 0)));
        CHECK(diff < 1e-12);
    }

    SUBCASE("quadrature order 4 -> 8 changes tildeEW below 1e-11") {
        MatSeries Kp = perturbed(c.K, 1e-3, 3, 2024u);
        TorusFlowData fp = flow_on_torus(c.spec, Kp, ctx.T, 1e-12);
        InvarianceErrors ep =
            compute_errors(Kp, c.W, c.lambda, fp, ctx.omega, ctx.alpha);
        FrameBundle frp = build_frame(Kp, c.W, c.lambda, c.spec, fp, ctx.omega,
                                      ctx.alpha);
        EtaSplit etaK = project_eta(ep.EK, frp, 3);
        TorusCorrection tc = solve_torus_correction(
            etaK, frp, Kp, c.lambda, ctx.omega, ctx.alpha, c.dio);
        BundleEta b4 = compute_eta_W(ep.EW, tc.DeltaK, c.W, c.spec, frp, Kp,
                                     ctx.T, 1e-12, 4);
        BundleEta b8 = compute_eta_W(ep.EW, tc.DeltaK, c.W, c.spec, frp, Kp,
                                     ctx.T, 1e-12, 8);
        double diff = 0;
        for (int r = 0; r < 6; ++r)
            diff = std::max(diff, tk_test::max_coef_diff(b4.tildeEW.at(r, 0),
                                                         b8.tildeEW.at(r, 0)));
        CHECK(diff < 1e-11);
    }
}

TEST_CASE("solve_bundle_correction: trivial and constant-eta2 cases, gauge, "
          "reduced system") {
    Ctx c = make_ctx(0.02);
    NewtonContext ctx = c.context();
    TorusFlowData flow = flow_on_torus(c.spec, c.K, ctx.T, 1e-12);
    FrameBundle frame = build_frame(c.K, c.W, c.lambda, c.spec, flow, ctx.omega,
                                    ctx.alpha);

    EtaSplit zero;
    zero.e1 = MatSeries(c.grid, 2, 1);
    zero.e2 = MatSeries(c.grid, 1, 1);
    zero.e3 = MatSeries(c.grid, 2, 1);
    zero.e4 = MatSeries(c.grid, 1, 1);
    BundleCorrection bc = solve_bundle_correction(
        zero, frame, c.W, c.lambda, ctx.omega, ctx.alpha, c.dio);
    CHECK(bc.delta_lambda == 0.0);
    for (int r = 0; r < 6; ++r)
        CHECK(tk_test::max_coef_diff(bc.Wbar.at(r, 0), c.W.at(r, 0)) == 0.0);

    EtaSplit eta = zero;
    eta.e2.at(0, 0) = Series::constant(c.grid, 0.37);
    BundleCorrection bc2 = solve_bundle_correction(
        eta, frame, c.W, c.lambda, ctx.omega, ctx.alpha, c.dio);
    CHECK(bc2.delta_lambda == doctest::Approx(-0.37).epsilon(1e-14));
    CHECK(bc2.xi.e2.strip_norm(0) < 1e-14);

    EtaSplit etar = zero;
    etar.e2.at(0, 0) = tk_test::random_series(c.grid, 55, 3);
    BundleCorrection bc3 = solve_bundle_correction(
        etar, frame, c.W, c.lambda, ctx.omega, ctx.alpha, c.dio);
    CHECK(std::abs(bc3.xi.e2.at(0, 0).average()) == 0.0);

    EtaSplit etaf = zero;
    for (int r = 0; r < 2; ++r) {
        etaf.e1.at(r, 0) = tk_test::random_series(c.grid, 60 + r, 3);
        etaf.e3.at(r, 0) = tk_test::random_series(c.grid, 62 + r, 3);
    }
    etaf.e2.at(0, 0) = tk_test::random_series(c.grid, 64, 3);
    etaf.e4.at(0, 0) = tk_test::random_series(c.grid, 65, 3);
    BundleCorrection bcf = solve_bundle_correction(
        etaf, frame, c.W, c.lambda, ctx.omega, ctx.alpha, c.dio);
    const double la = c.lambda.lambda;
    double scale = etaf.concat().strip_norm(0);
    MatSeries q1 = bcf.xi.e1 + matmul(frame.S, bcf.xi.e3) -
                   bcf.xi.e1.rotated(ctx.omega, ctx.alpha).scaled(la) - etaf.e1;
    CHECK(q1.strip_norm(0) < 1e-11 * scale);
    MatSeries q2 = bcf.xi.e2.scaled(la) -
                   bcf.xi.e2.rotated(ctx.omega, ctx.alpha).scaled(la) - etaf.e2;
    q2.at(0, 0).coef()[0] -= cplx(bcf.delta_lambda, 0);
    CHECK(q2.strip_norm(0) < 1e-11 * scale);
    MatSeries q3 = bcf.xi.e3 -
                   bcf.xi.e3.rotated(ctx.omega, ctx.alpha).scaled(la) - etaf.e3;
    CHECK(q3.strip_norm(0) < 1e-11 * scale);
    MatSeries q4 = bcf.xi.e4.scaled(c.lambda.lambda_inv) -
                   bcf.xi.e4.rotated(ctx.omega, ctx.alpha).scaled(la) - etaf.e4;
    CHECK(q4.strip_norm(0) < 1e-11 * scale);
}

TEST_CASE("iterate: immediate return on the exact torus") {
    Ctx c = make_ctx(0.02);
    NewtonContext ctx = c.context();
    NewtonOptions opts;
    opts.stop_tol = 1e-9;
    opts.max_iters = 4;
    opts.rho = 0.05;
    opts.rho_inf = 0.005;
    TorusSolution sol = iterate(ctx, c.K, c.W, c.lambda, opts);
    CHECK(sol.converged);
    CHECK(sol.iterations == 0);
}

TEST_CASE("iterate: quadratic convergence from a perturbed torus") {
    Ctx c = make_ctx(0.01, 16);
    NewtonContext ctx = c.context();
    MatSeries K0 = perturbed(c.K, 1e-3, 3, 5u);
    NewtonOptions opts;
    opts.stop_tol = 1e-12;
    opts.max_iters = 10;
    opts.rho = 0.05;
    opts.rho_inf = 0.005;
    TorusSolution sol = iterate(ctx, K0, c.W, c.lambda, opts);
    CHECK(sol.converged);
    CHECK(std::abs(sol.lambda.lambda - c.sys.lambda_exact) < 1e-10);

    std::vector<double> errs;
    for (const IterRecord& r : sol.history) {
        double e = std::max(r.normEK0, r.normEW0);
        if (e > 1e-12) errs.push_back(e);
    }
    REQUIRE(errs.size() >= 3);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = static_cast<int>(errs.size()) - 1;
    for (int i = 0; i < m; ++i) {
        double x = std::log(errs[i]), y = std::log(errs[i + 1]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.075));

    for (std::size_t i = 2; i + 1 < sol.history.size(); ++i) {
        double di = std::abs(sol.history[i].lambda - c.sys.lambda_exact);
        double dn = std::abs(sol.history[i + 1].lambda - c.sys.lambda_exact);
        CHECK(dn <= di * 1.5 + 1e-12);
    }
}

TEST_CASE("iterate: a too-far start fails with a controlled error") {
    Ctx c = make_ctx(0.01, 16, 0.35);
    NewtonContext ctx = c.context();
    MatSeries K0 = perturbed(c.K, 0.3, 3, 99u);
    NewtonOptions opts;
    opts.stop_tol = 1e-12;
    opts.max_iters = 8;
    opts.rho = 0.05;
    opts.rho_inf = 0.005;
    CHECK_THROWS_AS(iterate(ctx, K0, c.W, c.lambda, opts), Error);
}

TEST_CASE("one torus step removes the linear error (remainder is quadratic)") {
    Ctx c = make_ctx(0.01, 16);
    NewtonContext ctx = c.context();
    std::vector<double> eps_list = {1e-3, 1e-4};
    std::vector<double> before, after;
    for (double ep : eps_list) {
        MatSeries Kp = perturbed(c.K, ep, 3, 31u);
        TorusFlowData fp = flow_on_torus(c.spec, Kp, ctx.T, 1e-12);
        InvarianceErrors errs =
            compute_errors(Kp, c.W, c.lambda, fp, ctx.omega, ctx.alpha);
        FrameBundle fr = build_frame(Kp, c.W, c.lambda, c.spec, fp, ctx.omega,
                                     ctx.alpha);
        EtaSplit etaK = project_eta(errs.EK, fr, 3);
        TorusCorrection tc = solve_torus_correction(
            etaK, fr, Kp, c.lambda, ctx.omega, ctx.alpha, c.dio);
        TorusFlowData fb = flow_on_torus(c.spec, tc.Kbar, ctx.T, 1e-12);
        InvarianceErrors errb =
            compute_errors(tc.Kbar, c.W, c.lambda, fb, ctx.omega, ctx.alpha);
        before.push_back(errs.normEK0);
        after.push_back(errb.normEK0);
    }
    double order =
        std::log(after[0] / after[1]) / std::log(before[0] / before[1]);
    CHECK(order == doctest::Approx(2.0).epsilon(0.1));
}
