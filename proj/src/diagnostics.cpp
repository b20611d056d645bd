#include "toruskam/diagnostics.hpp"

#include <cmath>

#include "toruskam/certificate.hpp"
#include "toruskam/errors.hpp"
#include "toruskam/parallel.hpp"

namespace toruskam {

namespace {

// Lambda = diag(I_{n-1}, lambda): scale of the last column / row.
GridField scale_last_col(const GridField& m, double s) {
    GridField out = m;
    for (std::size_t i = 0; i < out.nodes(); ++i) {
        double* p = out.node(i);
        for (int r = 0; r < out.rows; ++r) p[r * out.cols + (out.cols - 1)] *= s;
    }
    return out;
}

DMat omega0_mat(int n) {
    DMat m(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        m(i, n + i) = -1.0;
        m(n + i, i) = 1.0;
    }
    return m;
}

GridField constant_field(const GridSpec& g, const DMat& m) {
    GridField out(g, m.rows, m.cols);
    for (std::size_t i = 0; i < out.nodes(); ++i)
        std::copy(m.a.begin(), m.a.end(), out.node(i));
    return out;
}

// -Omega_0 F^T o R OmbarK Dphi F for a 2n x k subframe F (value fields).
GridField reduced_transport(const GridField& FRv, const GridField& OmKRv,
                            const GridField& DphiK, const GridField& Fv,
                            int n) {
    GridField M =
        gf_matmul(gf_matmul(gf_matmul(gf_transpose(FRv), OmKRv), DphiK), Fv);
    (void)n;
    return M;
}

double grid_max_abs_block(const GridField& f, int r0, int c0, int rs, int cs) {
    double m = 0;
    for (std::size_t i = 0; i < f.nodes(); ++i) {
        const double* p = f.node(i);
        for (int r = 0; r < rs; ++r)
            for (int c = 0; c < cs; ++c)
                m = std::max(m, std::abs(p[(r0 + r) * f.cols + (c0 + c)]));
    }
    return m;
}

}  // namespace

GeometricDiagnostics compute_geometric_diagnostics(
    const MatSeries& K, const MatSeries& W, const ContractionPair& lambda,
    const FrameBundle& frame, const TorusFlowData& flow,
    const VectorFieldSpec& spec, const std::vector<double>& omega,
    const std::vector<double>& alpha, const InvarianceErrors& errors,
    double rho, double delta) {
    GeometricDiagnostics d;
    (void)W;
    const int n = spec.n;
    const int N = spec.dim();
    const int dd = K.grid().dims_internal();
    const GridSpec& grid = K.grid();
    const double la = lambda.lambda;

    d.normEK_rho = errors.EK.strip_norm(rho);
    d.normEW_rho = errors.EW.strip_norm(rho);

    // ---- E_L from its definition ----------------------------------------
    MatSeries DthEK(grid, N, dd);
    for (int a = 0; a < dd; ++a) {
        MatSeries de = errors.EK.differentiated(a);
        for (int r = 0; r < N; ++r) DthEK.at(r, a) = de.at(r, 0);
    }
    // Delta X = X o (phi_T(K), R_alpha) - X o (K o R, R_alpha)
    MatSeries KR = K.rotated(omega, alpha);
    GridField KRv = to_grid_field(KR);
    GridField XphiK(grid, N, 1), XKR(grid, N, 1);
    const std::size_t nodes = grid.node_count();
    par::for_each(nodes, [&](std::size_t i) {
        std::vector<double> x;
        grid.node_point(i, x);
        std::vector<double> phi(x.begin() + grid.dims_internal(), x.end());
        for (std::size_t q = 0; q < phi.size(); ++q) phi[q] += alpha[q];
        std::vector<double> z1(flow.phiK.node(i), flow.phiK.node(i) + N);
        std::vector<double> z2(KRv.node(i), KRv.node(i) + N);
        spec.X(z1.data(), phi.data(), XphiK.node(i));
        spec.X(z2.data(), phi.data(), XKR.node(i));
    });
    MatSeries DeltaX = gf_sub(XphiK, XKR).to_series();
    MatSeries EcX = DeltaX;
    for (int a = 0; a < grid.dims_external(); ++a) {
        MatSeries de = errors.EK.differentiated(dd + a);
        EcX -= de.scaled(spec.alpha_hat[a]);
    }
    d.EL = MatSeries::hcat(DthEK, MatSeries::hcat(EcX, errors.EW));

    // direct check: E_L = Dphi L - L o R Lambda
    GridField direct = gf_sub(
        gf_matmul(flow.DphiK, frame.Lv),
        scale_last_col(to_grid_field(frame.L.rotated(omega, alpha)), la));
    d.EL_direct_mismatch = gf_sub(direct, to_grid_field(d.EL)).max_abs();
    d.normEL = d.EL.strip_norm(rho - delta);
    d.normELT = d.EL.transposed().strip_norm(rho - delta);

    // ---- isotropy --------------------------------------------------------
    GridField DthKv(grid, N, dd);
    {
        MatSeries DthK(grid, N, dd);
        for (int a = 0; a < dd; ++a) {
            MatSeries dk = K.differentiated(a);
            for (int r = 0; r < N; ++r) DthK.at(r, a) = dk.at(r, 0);
        }
        DthKv = to_grid_field(DthK);
    }
    if (dd > 0) {
        GridField OmDKv =
            gf_matmul(gf_matmul(gf_transpose(DthKv), frame.OmKv), DthKv);
        d.OmDK = OmDKv.to_series();
        std::vector<double> avg = d.OmDK.average();
        for (double v : avg) d.avgOmDK_max = std::max(d.avgOmDK_max, std::abs(v));
        d.normOmDK = d.OmDK.strip_norm(rho - 2 * delta);
    } else {
        d.OmDK = MatSeries(grid, 0, 0);
    }

    // ---- Lagrangianity ----------------------------------------------------
    GridField OmLv = gf_matmul(gf_matmul(gf_transpose(frame.Lv), frame.OmKv),
                               frame.Lv);
    d.OmL = OmLv.to_series();
    d.OmcX_max = grid_max_abs_block(OmLv, dd, dd, 1, 1);
    d.OmW_max = grid_max_abs_block(OmLv, n - 1, n - 1, 1, 1);
    if (dd > 0) {
        MatSeries OmDKcX = d.OmL.block(0, dd, dd, 1);
        for (const double v : OmDKcX.average())
            d.avgOmDKcX_max = std::max(d.avgOmDKcX_max, std::abs(v));
    }
    d.normOmL = d.OmL.strip_norm(rho - 2 * delta);

    // ---- symplecticity of hat P -------------------------------------------
    GridField hPv = gf_hcat(frame.Lv, frame.N0v);
    DMat Om0 = omega0_mat(n);
    GridField hEsymv = gf_sub(
        gf_matmul(gf_matmul(gf_transpose(hPv), frame.OmKv), hPv),
        constant_field(grid, Om0));
    d.hEsym = hEsymv.to_series();
    d.norm_hEsym = d.hEsym.strip_norm(rho - 2 * delta);
    {
        // expected block structure: (OmL, 0; 0, B^T OmL B)
        GridField Bv = to_grid_field(frame.B);
        GridField BtOmLB = gf_matmul(gf_matmul(gf_transpose(Bv), OmLv), Bv);
        GridField expect(grid, 2 * n, 2 * n);
        for (std::size_t i = 0; i < expect.nodes(); ++i) {
            double* e = expect.node(i);
            const double* a11 = OmLv.node(i);
            const double* a22 = BtOmLB.node(i);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) {
                    e[r * 2 * n + c] = a11[r * n + c];
                    e[(n + r) * 2 * n + (n + c)] = a22[r * n + c];
                }
        }
        d.hEsym_block_defect = gf_sub(hEsymv, expect).max_abs();
    }

    // ---- reducibility of hat P ---------------------------------------------
    GridField hPRv = gf_hcat(to_grid_field(frame.L.rotated(omega, alpha)),
                             to_grid_field(frame.N0.rotated(omega, alpha)));
    GridField Mh = reduced_transport(hPRv, frame.OmKRv, flow.DphiK, hPv, n);
    GridField hShat = to_grid_field(frame.Shat);
    GridField hEredv(grid, 2 * n, 2 * n);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double* m = Mh.node(i);
        const double* sh = hShat.node(i);
        double* o = hEredv.node(i);
        // -Omega_0 M: top = +M_bottom... note (-Om0 M)_top = M_bottom rows?
        // Omega_0 = (0 -I; I 0): (Omega_0 M)_top = -M_bottom, bottom = M_top.
        // Ered_hat = -Omega_0 hP^T o R Ombar Dphi hP - hLambda, and
        // M = hP^T o R Ombar Dphi hP, so -Omega_0 M has top = +M_bottom,
        // bottom = -M_top.
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < 2 * n; ++c) {
                o[r * 2 * n + c] = m[(n + r) * 2 * n + c];
                o[(n + r) * 2 * n + c] = -m[r * 2 * n + c];
            }
        // subtract hLambda = (Lambda, Shat; 0, Lambda^{-T})
        for (int r = 0; r < n; ++r) o[r * 2 * n + r] -= (r == n - 1) ? la : 1.0;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) o[r * 2 * n + (n + c)] -= sh[r * n + c];
        for (int r = 0; r < n; ++r)
            o[(n + r) * 2 * n + (n + r)] -= (r == n - 1) ? lambda.lambda_inv : 1.0;
    }
    d.hEred = hEredv.to_series();
    d.hEred12_max = grid_max_abs_block(hEredv, 0, n, n, n);
    d.norm_hEred = d.hEred.strip_norm(rho - 2 * delta);

    // ---- invertibility of hat P ---------------------------------------------
    {
        GridField t = gf_matmul(gf_matmul(gf_transpose(hPv), frame.OmKv), hPv);
        // E = hP (-Omega_0 hP^T Omega o K) - I; build -Omega_0 (hP^T Om K) first
        GridField OmhPt = gf_matmul(gf_transpose(hPv), frame.OmKv);
        GridField minusOm0(grid, 2 * n, 2 * n);
        (void)t;
        for (std::size_t i = 0; i < nodes; ++i) {
            const double* m = OmhPt.node(i);
            double* o = minusOm0.node(i);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < 2 * n; ++c) {
                    o[r * 2 * n + c] = m[(n + r) * 2 * n + c];
                    o[(n + r) * 2 * n + c] = -m[r * 2 * n + c];
                }
        }
        GridField EinvhPv = gf_sub(gf_matmul(hPv, minusOm0),
                                   constant_field(grid, DMat::identity(2 * n)));
        d.EinvhP = EinvhPv.to_series();
        d.norm_EinvhP = d.EinvhP.strip_norm(rho - 2 * delta);
    }

    // ---- symmetry errors ----------------------------------------------------
    {
        GridField Sh = to_grid_field(frame.Shat);
        GridField invLaSh = Sh;
        for (std::size_t i = 0; i < nodes; ++i) {
            double* p = invLaSh.node(i);
            for (int c = 0; c < n; ++c)
                p[(n - 1) * n + c] *= lambda.lambda_inv;
        }
        GridField e = gf_sub(invLaSh, gf_transpose(invLaSh));
        d.EsymInvLahS = e.to_series();
        d.norm_EsymInvLahS = d.EsymInvLahS.strip_norm(rho - 2 * delta);
    }
    d.EsymA = frame.A - frame.A.transposed();
    d.norm_EsymA = d.EsymA.strip_norm(rho - 2 * delta);

    // ---- symplecticity and reducibility of P ---------------------------------
    GridField Esymv = gf_sub(
        gf_matmul(gf_matmul(gf_transpose(frame.Pv), frame.OmKv), frame.Pv),
        constant_field(grid, Om0));
    d.Esym = Esymv.to_series();
    d.norm_Esym = d.Esym.strip_norm(rho - 2 * delta);

    GridField Mp = reduced_transport(frame.PRv, frame.OmKRv, flow.DphiK,
                                     frame.Pv, n);
    GridField Sred = to_grid_field(frame.S);
    GridField Eredv(grid, 2 * n, 2 * n);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double* m = Mp.node(i);
        const double* sr = Sred.node(i);
        double* o = Eredv.node(i);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < 2 * n; ++c) {
                o[r * 2 * n + c] = m[(n + r) * 2 * n + c];
                o[(n + r) * 2 * n + c] = -m[r * 2 * n + c];
            }
        for (int r = 0; r < n; ++r) o[r * 2 * n + r] -= (r == n - 1) ? la : 1.0;
        for (int r = 0; r < n - 1; ++r)
            for (int c = 0; c < n - 1; ++c)
                o[r * 2 * n + (n + c)] -= sr[r * (n - 1) + c];
        for (int r = 0; r < n; ++r)
            o[(n + r) * 2 * n + (n + r)] -= (r == n - 1) ? lambda.lambda_inv : 1.0;
    }
    d.Ered = Eredv.to_series();
    d.norm_Ered = d.Ered.strip_norm(rho - 2 * delta);

    // ---- reducibility via the true inverse (P o R)^{-1} ----------------------
    {
        double worst = 0.0;
        GridField Sfull = Sred;
        for (std::size_t i = 0; i < nodes; ++i) {
            DMat PR(2 * n, 2 * n), Pm(2 * n, 2 * n), Dp(2 * n, 2 * n);
            std::copy(frame.PRv.node(i), frame.PRv.node(i) + 4 * n * n,
                      PR.a.begin());
            std::copy(frame.Pv.node(i), frame.Pv.node(i) + 4 * n * n,
                      Pm.a.begin());
            std::copy(flow.DphiK.node(i), flow.DphiK.node(i) + 4 * n * n,
                      Dp.a.begin());
            DMat red = invert(PR, 1e14) * Dp * Pm;
            const double* sr = Sfull.node(i);
            for (int r = 0; r < n; ++r) red(r, r) -= (r == n - 1) ? la : 1.0;
            for (int r = 0; r < n - 1; ++r)
                for (int c = 0; c < n - 1; ++c)
                    red(r, n + c) -= sr[r * (n - 1) + c];
            for (int r = 0; r < n; ++r)
                red(n + r, n + r) -= (r == n - 1) ? lambda.lambda_inv : 1.0;
            worst = std::max(worst, red.max_abs());
        }
        d.reducibility_defect = worst;
    }

    // ---- unstable bundle residual --------------------------------------------
    {
        GridField Wt = to_grid_field(frame.Wtilde);
        GridField lhs = gf_matmul(flow.DphiK, Wt);
        GridField rhs = gf_scale(
            to_grid_field(frame.Wtilde.rotated(omega, alpha)), lambda.lambda_inv);
        d.unstable_residual = gf_sub(lhs, rhs).to_series().strip_norm(0.0);
    }

    return d;
}

void check_residual_inequalities(GeometricDiagnostics& d,
                                 const ConstantsLedger& L, double gamma,
                                 double tau, double delta) {
    const double EK = d.normEK_rho, EW = d.normEW_rho;
    const double sd = gamma * std::pow(delta, tau + 1.0);
    auto add = [&d](const std::string& name, double measured, double rhs) {
        d.inequalities.push_back({name, measured, rhs, measured <= rhs});
    };
    add("estEL", d.normEL, L.get("C_EL,K") / delta * EK + L.get("C_EL,W") * EW);
    add("estELT", d.normELT,
        L.get("C_EL^T,K") / delta * EK + L.get("C_EL^T,W") * EW);
    add("estOmDK", d.normOmDK, L.get("C_OmDK") / sd * EK);
    add("estOmL", d.normOmL,
        L.get("C_OmL,K") / sd * EK + L.get("C_OmL,W") * EW);
    add("esthEsym", d.norm_hEsym,
        L.get("C_hEsym,K") / sd * EK + L.get("C_hEsym,W") * EW);
    add("esthEred", d.norm_hEred,
        L.get("C_hEred,K") / sd * EK + L.get("C_hEred,W") * EW);
    add("estEinvhP", d.norm_EinvhP,
        L.get("C_EinvhP,K") / sd * EK + L.get("C_EinvhP,W") * EW);
    add("esthSsym", d.norm_EsymInvLahS,
        L.get("C_invLahS,K") / sd * EK + L.get("C_invLahS,W") * EW);
    add("estA-AT", d.norm_EsymA,
        L.get("C_symA,K") / sd * EK + L.get("C_symA,W") * EW);
    add("estEsym", d.norm_Esym,
        L.get("C_Esym,K") / sd * EK + L.get("C_Esym,W") * EW);
    add("estEred", d.norm_Ered,
        L.get("C_Ered,K") / sd * EK + L.get("C_Ered,W") * EW);
}

StepDiagnostics compute_step_diagnostics(
    const NewtonContext& ctx, const MatSeries& K, const MatSeries& W,
    const ContractionPair& lambda, const FrameBundle& frame,
    const TorusFlowData& flow, const InvarianceErrors& errors, double rho,
    double delta, int quad_order, const ConstantsLedger* ledger) {
    StepDiagnostics sd;
    (void)flow;
    const int n = ctx.spec->n;
    EtaSplit etaK = project_eta(errors.EK, frame, n);
    TorusCorrection tc = solve_torus_correction(etaK, frame, K, lambda,
                                                ctx.omega, ctx.alpha, ctx.dio);
    BundleEta be = compute_eta_W(errors.EW, tc.DeltaK, W, *ctx.spec, frame, K,
                                 ctx.T, ctx.integrator_tol, quad_order);
    BundleCorrection bc = solve_bundle_correction(be.etaW, frame, W, lambda,
                                                  ctx.omega, ctx.alpha, ctx.dio);
    sd.avg_eta3 = tc.avg_eta3;
    sd.normDeltaK = tc.DeltaK.strip_norm(rho - 2 * delta);
    sd.normDeltaW = bc.DeltaW.strip_norm(rho - 3 * delta);
    sd.abs_delta_lambda = std::abs(bc.delta_lambda);

    TorusFlowData flow_new =
        flow_on_torus(*ctx.spec, tc.Kbar, ctx.T, ctx.integrator_tol);
    InvarianceErrors errs_new = compute_errors(tc.Kbar, bc.Wbar, bc.lambda_bar,
                                               flow_new, ctx.omega, ctx.alpha);
    sd.normEKnew = errs_new.EK.strip_norm(rho - 2 * delta);
    sd.normEWnew = errs_new.EW.strip_norm(rho - 3 * delta);

    if (ledger != nullptr) {
        const ConstantsLedger& L = *ledger;
        const double gamma = ctx.dio.gamma, tau = ctx.dio.tau;
        const double EK = errors.EK.strip_norm(rho);
        const double EW = errors.EW.strip_norm(rho);
        const double g2d2 = gamma * gamma * std::pow(delta, 2 * tau);
        const double g3d3 = std::pow(gamma, 3) * std::pow(delta, 3 * tau);
        const double g4d4 = g2d2 * g2d2;
        const double g5d5 = g2d2 * g3d3;
        auto add = [&sd](const std::string& name, double measured, double rhs) {
            sd.inequalities.push_back({name, measured, rhs, measured <= rhs});
        };
        add("estDeK", sd.normDeltaK, L.get("C_DeK") / g2d2 * EK);
        add("estDeW", sd.normDeltaW,
            L.get("C_DeW,K") / g3d3 * EK + L.get("C_DeW,W") /
                (gamma * std::pow(delta, tau)) * EW);
        add("estDela", sd.abs_delta_lambda,
            L.get("C_Dela,K") / g2d2 * EK + L.get("C_Dela,W") * EW);
        add("estEKnew", sd.normEKnew,
            L.get("C_EK,KK") / g4d4 * EK * EK +
                L.get("C_EK,KW") / g2d2 * EK * EW);
        add("estEWnew", sd.normEWnew,
            L.get("C_EW,KK") / g5d5 * EK * EK +
                L.get("C_EW,WW") / (gamma * std::pow(delta, tau)) * EW * EW +
                L.get("C_EW,KW") / g3d3 * EK * EW);
    }
    return sd;
}

}  // namespace toruskam
