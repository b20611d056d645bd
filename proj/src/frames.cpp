#include "toruskam/frames.hpp"

#include <cmath>
#include <string>

#include "toruskam/errors.hpp"
#include "toruskam/parallel.hpp"

namespace toruskam {

ContractionPair::ContractionPair(double l) : lambda(l) {
    if (l == 0.0 || std::abs(l) >= 1.0)
        throw HyperbolicityError("lambda must satisfy 0 < |lambda| < 1");
    lambda_inv = 1.0 / l;
}

MatSeries embed_along(const MatSeries& K,
                      const std::function<DMat(const std::vector<double>&)>& field,
                      int rows, int cols) {
    const GridSpec base = K.grid();
    const GridSpec fine = base.padded(2);
    const int N = K.rows();
    // sample K on the padded grid (exact: K is band-limited)
    std::vector<std::vector<double>> kvals(N);
    for (int r = 0; r < N; ++r)
        kvals[r] = K.at(r, 0).padded_to(fine).to_real_values();
    GridField out(fine, rows, cols);
    const std::size_t nodes = fine.node_count();
    par::for_each(nodes, [&](std::size_t i) {
        std::vector<double> z(N);
        for (int r = 0; r < N; ++r) z[r] = kvals[r][i];
        DMat m = field(z);
        std::copy(m.a.begin(), m.a.end(), out.node(i));
    });
    MatSeries fine_series = out.to_series();
    MatSeries res(base, rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            res.at(r, c) = fine_series.at(r, c).truncated_to(base);
    return res;
}

MatSeries embed_along_with_phase(
    const MatSeries& K,
    const std::function<void(const double*, const double*, double*)>& field,
    int rows) {
    const GridSpec base = K.grid();
    const GridSpec fine = base.padded(2);
    const int N = K.rows();
    std::vector<std::vector<double>> kvals(N);
    for (int r = 0; r < N; ++r)
        kvals[r] = K.at(r, 0).padded_to(fine).to_real_values();
    GridField out(fine, rows, 1);
    const std::size_t nodes = fine.node_count();
    par::for_each(nodes, [&](std::size_t i) {
        std::vector<double> z(N), x;
        for (int r = 0; r < N; ++r) z[r] = kvals[r][i];
        fine.node_point(i, x);
        std::vector<double> phi(x.begin() + fine.dims_internal(), x.end());
        field(z.data(), phi.data(), out.node(i));
    });
    MatSeries fine_series = out.to_series();
    MatSeries res(base, rows, 1);
    for (int r = 0; r < rows; ++r)
        res.at(r, 0) = fine_series.at(r, 0).truncated_to(base);
    return res;
}

LPair build_L(const MatSeries& K, const MatSeries& W,
              const VectorFieldSpec& spec) {
    if (K.grid() != W.grid() || K.rows() != W.rows())
        throw ShapeError("build_L: K and W must share grid and dimension");
    const GridSpec& g = K.grid();
    const int N = spec.dim();
    const int d = g.dims_internal();
    const int l = g.dims_external();

    MatSeries DthK(g, N, d);
    for (int a = 0; a < d; ++a) {
        MatSeries da = K.differentiated(a);
        for (int r = 0; r < N; ++r) DthK.at(r, a) = da.at(r, 0);
    }

    MatSeries XK = embed_along_with_phase(K, spec.X, N);
    MatSeries cX = XK;
    for (int a = 0; a < l; ++a) {
        MatSeries dka = K.differentiated(d + a);
        cX -= dka.scaled(spec.alpha_hat[a]);
    }

    LPair out;
    out.cX = cX;
    out.L = MatSeries::hcat(DthK, MatSeries::hcat(cX, W));
    return out;
}

N0Triple build_N0(const MatSeries& K, const MatSeries& L,
                  const GeometryTriple& geom, double cond_guard) {
    const int n = L.cols();
    MatSeries GK = embed_along(K, geom.G, 2 * geom.n, 2 * geom.n);
    MatSeries JK = embed_along(K, geom.J, 2 * geom.n, 2 * geom.n);

    GridField Lv = to_grid_field(L);
    GridField GKv = to_grid_field(GK);
    GridField JKv = to_grid_field(JK);
    GridField GLv = gf_matmul(gf_matmul(gf_transpose(Lv), GKv), Lv);

    GridField Bv(L.grid(), n, n);
    const std::size_t nodes = Bv.nodes();
    std::vector<std::string> failures(nodes);
    par::for_each(nodes, [&](std::size_t i) {
        DMat gl(n, n);
        std::copy(GLv.node(i), GLv.node(i) + n * n, gl.a.begin());
        try {
            DMat b = invert(gl, cond_guard);
            std::copy(b.a.begin(), b.a.end(), Bv.node(i));
        } catch (const Error& e) {
            failures[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < nodes; ++i)
        if (!failures[i].empty())
            throw EmbeddingDegeneracyError(
                "G_L singular or ill-conditioned at grid node " +
                std::to_string(i) + ": K is not a fiberwise embedding");

    GridField N0v = gf_matmul(gf_matmul(JKv, Lv), Bv);
    N0Triple out;
    out.GL = GLv.to_series();
    out.B = Bv.to_series();
    out.N0 = N0v.to_series();
    return out;
}

MatSeries torsion_hatS(const GridField& DphiK, const MatSeries& N0,
                       const GeometryTriple& geom, const MatSeries& K,
                       const std::vector<double>& omega,
                       const std::vector<double>& alpha) {
    MatSeries KR = K.rotated(omega, alpha);
    MatSeries OmKR = embed_along(KR, geom.Omega, 2 * geom.n, 2 * geom.n);
    GridField N0Rv = to_grid_field(N0.rotated(omega, alpha));
    GridField OmKRv = to_grid_field(OmKR);
    GridField N0v = to_grid_field(N0);
    GridField Sv = gf_matmul(
        gf_matmul(gf_matmul(gf_transpose(N0Rv), OmKRv), DphiK), N0v);
    return Sv.to_series();
}

APair solve_A(const MatSeries& Shat, const ContractionPair& lambda,
              const std::vector<double>& omega,
              const std::vector<double>& alpha, const FrameOptions& opts,
              const DiophantineParams* dio) {
    const int n = Shat.rows();
    if (1.0 - std::abs(lambda.lambda) < opts.hyperbolicity_gap)
        throw HyperbolicityError("|lambda| within " +
                                 std::to_string(opts.hyperbolicity_gap) +
                                 " of 1");
    const double la = lambda.lambda, li = lambda.lambda_inv;
    const GridSpec& g = Shat.grid();

    MatSeries S1 = Shat.block(0, 0, n - 1, n - 1);
    MatSeries S2 = Shat.block(0, n - 1, n - 1, 1);
    MatSeries S3 = Shat.block(n - 1, 0, 1, n - 1);
    MatSeries S4 = Shat.block(n - 1, n - 1, 1, 1);

    // A4: 0 = S4 + la A4 - A4 o R * li
    MatSeries A4 = solve_nonresonant(la, li, S4.scaled(-1.0), omega, alpha);
    // A2: 0 = (S2 la + S3^T o R li) + la A2 - li A2 o R^2
    MatSeries rhs2 = S2.scaled(la) + S3.transposed().rotated(omega, alpha).scaled(li);
    MatSeries A2 =
        solve_nonresonant_double_rotation(la, li, rhs2.scaled(-1.0), omega, alpha);
    // A3: 0 = (S3 + S2^T o R) + la A3 - li A3 o R^2
    MatSeries rhs3 = S3 + S2.transposed().rotated(omega, alpha);
    MatSeries A3 =
        solve_nonresonant_double_rotation(la, li, rhs3.scaled(-1.0), omega, alpha);

    MatSeries A(g, n, n);
    MatSeries S = S1;
    if (opts.reduce_shear_to_constant) {
        if (dio == nullptr)
            throw ConfigError("constant-shear reduction needs Diophantine data");
        // L A1 = <S1> - S1, small-divisor solve; S becomes the constant <S1>.
        std::vector<double> avg = S1.average();
        MatSeries rhs(g, n - 1, n - 1);
        for (int r = 0; r < n - 1; ++r)
            for (int c = 0; c < n - 1; ++c) {
                Series e = S1.at(r, c) * (-1.0);
                e.coef()[0] += cplx(avg[static_cast<std::size_t>(r) * (n - 1) + c], 0);
                rhs.at(r, c) = e;
            }
        MatSeries A1 = solve_small_divisor(rhs, *dio);
        for (int r = 0; r < n - 1; ++r)
            for (int c = 0; c < n - 1; ++c) A.at(r, c) = A1.at(r, c);
        MatSeries Sconst(g, n - 1, n - 1);
        for (int r = 0; r < n - 1; ++r)
            for (int c = 0; c < n - 1; ++c)
                Sconst.at(r, c) = Series::constant(
                    g, avg[static_cast<std::size_t>(r) * (n - 1) + c]);
        S = Sconst;
    }
    for (int r = 0; r < n - 1; ++r) A.at(r, n - 1) = A2.at(r, 0);
    for (int c = 0; c < n - 1; ++c) A.at(n - 1, c) = A3.at(0, c);
    A.at(n - 1, n - 1) = A4.at(0, 0);

    return {A, S};
}

PTriple assemble_P(const MatSeries& L, const MatSeries& N0, const MatSeries& A) {
    PTriple out;
    out.N = N0 + matmul(L, A);
    out.P = MatSeries::hcat(L, out.N);
    out.Wtilde = out.P.block(0, out.P.cols() - 1, out.P.rows(), 1);
    return out;
}

FrameBundle build_frame(const MatSeries& K, const MatSeries& W,
                        const ContractionPair& lambda,
                        const VectorFieldSpec& spec, const TorusFlowData& flow,
                        const std::vector<double>& omega,
                        const std::vector<double>& alpha,
                        const FrameOptions& opts, const DiophantineParams* dio) {
    FrameBundle f;
    LPair lp = build_L(K, W, spec);
    f.L = lp.L;
    f.cX = lp.cX;
    N0Triple nt = build_N0(K, f.L, spec.geom, opts.cond_guard);
    f.GL = nt.GL;
    f.B = nt.B;
    f.N0 = nt.N0;
    f.Shat = torsion_hatS(flow.DphiK, f.N0, spec.geom, K, omega, alpha);
    APair ap = solve_A(f.Shat, lambda, omega, alpha, opts, dio);
    f.A = ap.A;
    f.S = ap.S;
    PTriple pt = assemble_P(f.L, f.N0, f.A);
    f.P = pt.P;
    f.N = pt.N;
    f.Wtilde = pt.Wtilde;

    f.Lv = to_grid_field(f.L);
    f.N0v = to_grid_field(f.N0);
    f.Nv = to_grid_field(f.N);
    f.Pv = to_grid_field(f.P);
    f.PRv = to_grid_field(f.P.rotated(omega, alpha));
    f.OmKv = to_grid_field(
        embed_along(K, spec.geom.Omega, spec.dim(), spec.dim()));
    f.OmKRv = to_grid_field(embed_along(K.rotated(omega, alpha),
                                        spec.geom.Omega, spec.dim(), spec.dim()));
    f.JKv = to_grid_field(embed_along(K, spec.geom.J, spec.dim(), spec.dim()));
    f.GKv = to_grid_field(embed_along(K, spec.geom.G, spec.dim(), spec.dim()));

    f.avgS = f.S.average();
    const int m = f.S.rows();
    DMat avg(m, m);
    avg.a = f.avgS;
    try {
        f.avgS_inv = invert(avg, opts.twist_guard);
    } catch (const Error&) {
        throw TwistDegeneracyError("<S> is singular within the twist guard");
    }
    f.avgS_inv_norm = f.avgS_inv.norm();
    return f;
}

}  // namespace toruskam
