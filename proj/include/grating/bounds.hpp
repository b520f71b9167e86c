#pragma once

#include <complex>
#include <optional>
#include <string>

#include "grating/geometry.hpp"

namespace grating {

/// Explicit stability constants. All formulas are evaluated exactly as
/// stated; the internal consistency identities
///   C^2     = k M^2 + 4 k^4 (R-f_-)^3
///   C*^2    = k (1 + 4 k^2 Ctilde^2 / lambda)^2 + 8 k^4 Ctilde^2
/// are checkable from the returned breakdowns.
struct DirichletBoundResult {
    double M = 0.0;
    double C = 0.0;
    double bound = 0.0; // 2 sqrt(2 pi) cos(theta) |gamma| C
};

DirichletBoundResult dirichlet_bound(double k, double theta, std::complex<double> gamma, double R,
                                     double f_minus);

struct ImpedanceBoundResult {
    double Ctilde2 = 0.0; // Ctilde^2
    double Cstar = 0.0;
    double bound = 0.0; // 2 sqrt(2 pi) cos(theta) |gamma| C*
    bool valid = false; // requires R - f_minus > 1
};

ImpedanceBoundResult impedance_bound(double k, double theta, std::complex<double> gamma,
                                     double lambda, double R, double f_minus, double L);

struct TransmissionBoundResult {
    int parameter_case = 0; // 1, 2, or 0 when neither holds (no certified bound)
    double C_TS = 0.0;      // C_T (case 1) or C_S (case 2)
    double C_123 = 0.0;     // C_12 or C_13
    double bound = 0.0;     // 2 sqrt(2 pi k) cos(theta) |gamma| C_12/13
};

TransmissionBoundResult transmission_bound(double k_plus, double k_minus, double lambda,
                                           double theta, std::complex<double> gamma, double R,
                                           double f_minus, double f_plus, double L);

enum class CertificationStatus {
    Certified,           // converged norm, hypotheses pass, ratio <= 1
    RatioExceedsBound,   // converged and hypotheses pass but ratio > 1
    NoCertificateHypotheses,
    NoCertificateWood,
    NoCertificateCase,   // transmission outside both parameter cases
    Indeterminate        // norm not mesh-converged
};

/// Inputs and outcome of checking one solved instance against its bound.
struct StabilityReport {
    std::string problem;
    double k = 0.0, theta = 0.0, lambda = 0.0, k_minus = 0.0;
    std::complex<double> gamma;
    double R = 0.0, f_minus = 0.0, f_plus = 0.0, L = 0.0;
    double computed_norm = 0.0;
    double coarse_norm = 0.0; // second-finest level, for the convergence test
    double bound = 0.0;
    double ratio = 0.0;
    HypothesisReport hypotheses;
    bool wood = false;
    CertificationStatus status = CertificationStatus::Indeterminate;
    // constants breakdown (fields unused by a problem stay zero)
    double M = 0.0, C = 0.0, Ctilde2 = 0.0, Cstar = 0.0, C_TS = 0.0, C_123 = 0.0;
    int parameter_case = 0;

    bool certified() const { return status == CertificationStatus::Certified; }
};

/// Assembles the report from a mesh-converged norm pair (the two finest
/// refinement levels must agree within 1%), the hypothesis report and the
/// Wood flag of the solve.
StabilityReport certify(StabilityReport partial);

} // namespace grating
