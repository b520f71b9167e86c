#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "grating/bounds.hpp"
#include "grating/fem.hpp"
#include "grating/postprocess.hpp"

namespace grating {

/// Closed-form complex field with analytic gradient and Laplacian,
/// alpha-quasiperiodic by construction.
struct ManufacturedField {
    std::function<std::complex<double>(double, double)> value;
    std::function<Eigen::Vector2cd(double, double)> gradient;
    std::function<std::complex<double>(double, double)> laplacian;
    double alpha = 0.0;
    std::string tag;
};

/// Single plane-wave mode amp * e^{i (n+alpha) x1 +- i beta_n x2}.
ManufacturedField plane_wave_mode(double k, double alpha, int n, bool upgoing,
                                  std::complex<double> amp);

/// Pointwise sum (both fields must share the quasimomentum).
ManufacturedField sum(const ManufacturedField& a, const ManufacturedField& b);

/// Exact solution of the Dirichlet problem over the flat profile x2 = c:
///   u = gamma e^{i alpha x1 - i beta x2} - gamma e^{-2 i beta c} e^{i alpha x1 + i beta x2},
/// scattered coefficient u0 = -gamma e^{-2 i beta c}, all other orders zero.
struct FlatDirichletOracle {
    ManufacturedField field;
    std::complex<double> u0;
};
FlatDirichletOracle flat_dirichlet_oracle(const IncidentWave& wave, double c);

/// Exact impedance solution over x2 = c; reflected amplitude
/// A = gamma e^{-2 i beta c} (beta - lambda) / (beta + lambda).
struct FlatImpedanceOracle {
    ManufacturedField field;
    std::complex<double> reflection;
};
FlatImpedanceOracle flat_impedance_oracle(const IncidentWave& wave, double lambda, double c);

/// Exact transmission solution over the flat interface x2 = 0:
/// r = (beta+ - lambda beta-) / (beta+ + lambda beta-), t = 2 beta+ / (beta+ + lambda beta-).
struct FlatTransmissionOracle {
    ManufacturedField upper; // total field above
    ManufacturedField lower; // transmitted field below
    std::complex<double> r, t;
    std::complex<double> beta_minus;
    double flux_residual; // |r^2 beta+ + lambda t^2 beta- - beta+| for the algebraic identity
};
FlatTransmissionOracle flat_transmission_oracle(const IncidentWave& wave, double k_minus,
                                                double lambda);

/// Relative defect of the Rellich identity for the manufactured field over
/// the (polygonal) one-sided domain, evaluated by quadrature of both sides:
/// |LHS - RHS| / (|LHS| + |RHS| + 1). Identity holds for any smooth field,
/// Helmholtz or not, so the defect is purely quadrature-limited.
double rellich_residual(const ManufacturedField& v, double c, const TruncatedDomain& domain,
                        double k, int quad_degree, double mesh_h = 0.2);

/// Results of one randomized inequality suite.
struct CheckSummary {
    std::string name;
    int trials = 0;
    double min_margin = 0.0;     // most negative absolute margin observed
    double min_rel_margin = 0.0; // margin / problem scale
    bool pass = false;           // min_rel_margin >= -1e-9
};

/// sqrt(2 pi) || v ||_{H^{1/2}} <= || v ||_{X_R} on random multi-mode fields
/// vanishing at a flat profile.
CheckSummary trace_inequality_suite(int trials, unsigned seed);

/// || v ||^2 <= (R-f_-)^2 || d2 v ||^2 + 2 (R-f_-) || v ||^2_{Gamma} on random
/// trigonometric strip fields.
CheckSummary poincare_suite(int trials, unsigned seed);

/// |w_0| <= || w ||_{L^2(D)} / sqrt(2 pi), D the unit-height top strip, on
/// random truncated Rayleigh fields of the conjugate quasimomentum.
CheckSummary mode_amplitude_suite(int trials, unsigned seed);

/// Margins of the same inequalities for solved/interpolated fields.
double trace_inequality_margin(const DiscreteField& field, double k, int N);
double poincare_margin(const DiscreteField& field, double f_minus);
double mode_amplitude_margin(const RayleighSpectrum& spectrum, double k, double R);

/// Auxiliary-problem estimate: solve the impedance problem, feed it through
/// the adjoint-type auxiliary solve, and compare ||w|| + ||dw/dnu||_Gamma
/// against Ctilde ||u||. Runs on two refinement levels; the check is
/// indeterminate unless they agree within 5%.
struct AuxiliaryCheck {
    double u_norm = 0.0;
    double w_norm = 0.0;
    double flux_norm = 0.0;
    double lhs_fine = 0.0, lhs_coarse = 0.0;
    double Ctilde = 0.0;
    double ratio = 0.0;
    bool converged = false;
    bool pass = false;
};
AuxiliaryCheck auxiliary_bound_check(const GratingProfile& profile, double R,
                                     const IncidentWave& wave, double lambda, double h, int order,
                                     int N);

/// Refinement study against the analytic oracle (flat profiles) or the finest
/// level (otherwise). Slopes are least-squares fits of log(err) vs log(h).
struct ConvergenceStudy {
    std::vector<double> hs;
    std::vector<double> l2_errors;
    std::vector<double> energy_errors;
    double l2_slope = 0.0;
    double energy_slope = 0.0;
    bool monotone = true;
    bool against_oracle = true;
};
ConvergenceStudy convergence_study(const GratingProfile& profile, double R,
                                   const IncidentWave& wave, const BoundaryModel& bc, double h0,
                                   int levels, int order, int N);

} // namespace grating
