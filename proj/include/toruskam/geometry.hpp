#ifndef TORUSKAM_GEOMETRY_HPP
#define TORUSKAM_GEOMETRY_HPP

#include <functional>
#include <vector>

#include "toruskam/linalg.hpp"

namespace toruskam {

// Matrix fields of the symplectic structure on phase space R^{2n}:
// Omega = (Da)^T - Da exact, J the compatible almost-complex structure,
// G = -Omega J the induced metric. Derivative fields are rank-3 tensors
// with (i,j,k) = d(M_ij)/dz_k, except D2a with (i,j,k) = d^2 a_i/dz_j dz_k.
struct GeometryTriple {
    int n = 0;  // half-dimension

    std::function<DMat(const std::vector<double>&)> Omega;
    std::function<std::vector<double>(const std::vector<double>&)> action_a;
    std::function<DMat(const std::vector<double>&)> Da;
    std::function<DTen3(const std::vector<double>&)> D2a;
    std::function<DMat(const std::vector<double>&)> J;
    std::function<DMat(const std::vector<double>&)> G;
    std::function<DTen3(const std::vector<double>&)> DOmega;
    std::function<DTen3(const std::vector<double>&)> DJ;
    std::function<DTen3(const std::vector<double>&)> DG;

    static GeometryTriple standard(int n);

    // Invariant checks at sample points: J^2 = -I, J^T Omega J = Omega,
    // Omega antisymmetric, G symmetric positive definite,
    // Omega = (Da)^T - Da. Throws on violation beyond tol.
    void validate(const std::vector<std::vector<double>>& samples,
                  double tol = 1e-10) const;
};

}  // namespace toruskam

#endif
