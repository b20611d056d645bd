#ifndef TORUSKAM_FLOW_HPP
#define TORUSKAM_FLOW_HPP

#include <vector>

#include "toruskam/fourier.hpp"
#include "toruskam/linalg.hpp"
#include "toruskam/system.hpp"

namespace toruskam {

// Time-T jet of the flow map: phi_T, D_z phi_T, and (order 2) D^2_z phi_T,
// from the first and second variational equations.
struct FlowJet {
    std::vector<double> phi;  // 2n
    DMat dphi;                // 2n x 2n, I at t=0
    DTen3 d2phi;              // 2n x 2n x 2n, 0 at t=0
    int steps = 0;
    double tol = 0.0;         // local tolerance requested
    double max_error = 0.0;   // largest accepted scaled error estimate
};

FlowJet flow_jet(const VectorFieldSpec& spec, const std::vector<double>& z,
                 const std::vector<double>& phi0, double T, double tol,
                 int order = 1);

// D^2_z phi_T(z, phi0)[u, v] by the directional second variational
// equation (payload 4*2n instead of the full (2n)^3 tensor).
std::vector<double> flow_second_directional(const VectorFieldSpec& spec,
                                            const std::vector<double>& z,
                                            const std::vector<double>& phi0,
                                            double T, double tol,
                                            const std::vector<double>& u,
                                            const std::vector<double>& v);

// Pointwise flow jets on every grid node of the sampled torus K, with the
// external phase advanced internally. Nodes are independent and run in
// parallel; errors are tagged with the offending node.
struct TorusFlowData {
    GridField phiK;   // 2n x 1 values
    GridField DphiK;  // 2n x 2n values
    MatSeries phiK_series;
    MatSeries DphiK_series;
    int total_steps = 0;
};

TorusFlowData flow_on_torus(const VectorFieldSpec& spec, const MatSeries& K,
                            double T, double tol,
                            par::Mode mode = par::Mode::openmp);

// Fiberwise symplecticity defect dphi^T Omega(phi_T) dphi - Omega(z).
double symplecticity_defect(const VectorFieldSpec& spec,
                            const std::vector<double>& z,
                            const std::vector<double>& phi0, double T,
                            double tol);

// Domain box of half-width R around the set swept by the torus under the
// flow for t in [0, T]; the flow traverses the clock circle even though
// the section stays put, so the box from K alone is too tight.
void set_domain_from_torus_swept(VectorFieldSpec& spec, const MatSeries& K,
                                 double R, double T, double tol,
                                 int substeps = 8);

}  // namespace toruskam

#endif
