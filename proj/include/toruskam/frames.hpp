#ifndef TORUSKAM_FRAMES_HPP
#define TORUSKAM_FRAMES_HPP

#include <functional>
#include <vector>

#include "toruskam/cohomology.hpp"
#include "toruskam/flow.hpp"
#include "toruskam/fourier.hpp"
#include "toruskam/system.hpp"

namespace toruskam {

struct ContractionPair {
    double lambda = 0.0;
    double lambda_inv = 0.0;

    ContractionPair() = default;
    explicit ContractionPair(double l);
};

// Evaluate a phase-space matrix field along K on the 2x padded grid and
// truncate back to K's band.
MatSeries embed_along(const MatSeries& K,
                      const std::function<DMat(const std::vector<double>&)>& field,
                      int rows, int cols);

// Same, for fields that also see the external phase (X along (K, id)).
MatSeries embed_along_with_phase(
    const MatSeries& K,
    const std::function<void(const double*, const double*, double*)>& field,
    int rows);

struct FrameOptions {
    double cond_guard = 1e12;        // pointwise inversion guard for B
    double hyperbolicity_gap = 1e-6; // reject 1 - |lambda| below this
    bool reduce_shear_to_constant = false;
    double twist_guard = 1e8;        // |<S>^{-1}| guard
};

// Adapted frame P = (L | N) with N = N0 + L A, plus the torsion and the
// reduced shear. Series are canonical; the value caches carry the exact
// nodewise products the residual computations rely on.
struct FrameBundle {
    MatSeries L;       // 2n x n
    MatSeries cX;      // 2n x 1
    MatSeries GL;      // n x n
    MatSeries B;       // n x n
    MatSeries N0;      // 2n x n
    MatSeries A;       // n x n
    MatSeries N;       // 2n x n
    MatSeries P;       // 2n x 2n
    MatSeries Shat;    // n x n
    MatSeries S;       // (n-1) x (n-1)
    MatSeries Wtilde;  // 2n x 1

    GridField Lv, N0v, Nv, Pv;
    GridField PRv;     // P o R values
    GridField OmKv;    // Omega o K values
    GridField OmKRv;   // Omega o (K o R) values
    GridField JKv, GKv;

    std::vector<double> avgS;      // <S> row-major
    DMat avgS_inv;
    double avgS_inv_norm = 0.0;
};

struct LPair {
    MatSeries L, cX;
};
LPair build_L(const MatSeries& K, const MatSeries& W,
              const VectorFieldSpec& spec);

struct N0Triple {
    MatSeries GL, B, N0;
};
N0Triple build_N0(const MatSeries& K, const MatSeries& L,
                  const GeometryTriple& geom, double cond_guard = 1e12);

MatSeries torsion_hatS(const GridField& DphiK, const MatSeries& N0,
                       const GeometryTriple& geom, const MatSeries& K,
                       const std::vector<double>& omega,
                       const std::vector<double>& alpha);

struct APair {
    MatSeries A, S;
};
APair solve_A(const MatSeries& Shat, const ContractionPair& lambda,
              const std::vector<double>& omega,
              const std::vector<double>& alpha,
              const FrameOptions& opts = {},
              const DiophantineParams* dio = nullptr);

struct PTriple {
    MatSeries P, N, Wtilde;
};
PTriple assemble_P(const MatSeries& L, const MatSeries& N0, const MatSeries& A);

FrameBundle build_frame(const MatSeries& K, const MatSeries& W,
                        const ContractionPair& lambda,
                        const VectorFieldSpec& spec,
                        const TorusFlowData& flow,
                        const std::vector<double>& omega,
                        const std::vector<double>& alpha,
                        const FrameOptions& opts = {},
                        const DiophantineParams* dio = nullptr);

}  // namespace toruskam

#endif
