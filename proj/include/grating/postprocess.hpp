#pragma once

#include <functional>
#include <optional>

#include "grating/fem.hpp"

namespace grating {

/// Trace coefficients of the quasiperiodic field at the given height:
///   c_n = (1/2pi) \int_0^{2pi} utilde(x1, height) e^{-i n x1} dx1,
/// so the physical trace is sum_n c_n e^{i (n+q) x1}. Exact per-edge
/// integration on the horizontal traces x2 = +-R; interior heights use an
/// adaptive exact walk along the cut line.
RayleighSpectrum rayleigh_coefficients(const DiscreteField& field, double height, int N);

/// Sampling-path extraction (uniform-grid DFT of the trace). Carries the
/// aliasing error of the discretization, which makes it the right diagnostic
/// for convergence studies of quantities the exact path conserves.
RayleighSpectrum rayleigh_coefficients_sampled(const DiscreteField& field, double height, int N,
                                               int n_samples);

/// Scattered Rayleigh coefficients above the grating, recovered from the
/// total trace at x2 = R: order 0 subtracts the incident contribution
/// gamma e^{-i beta R}, every order unwinds the phase e^{i beta_n R}.
/// Evanescent orders amplify trace noise by e^{|beta_n| R}.
RayleighSpectrum scattered_spectrum(const RayleighSpectrum& trace_at_R, const IncidentWave& wave);

/// Transmitted coefficients below the grating from the total trace at -R.
RayleighSpectrum transmitted_spectrum(const RayleighSpectrum& trace_at_minus_R, double k_minus);

/// Flux-normalized efficiencies of the propagating orders. The reflected
/// order n carries e_n^+ = (beta_n / beta) |u_n|^2 / |gamma|^2; transmission
/// adds e_n^- = lambda (beta_n^- / beta) |u_n^-|^2 / |gamma|^2. For lossless
/// problems the entries sum to 1.
struct EfficiencyTable {
    struct Row {
        int order;
        double e_plus = 0.0;
        double e_minus = 0.0;
    };
    std::vector<Row> rows; // propagating orders only
    double sum = 0.0;
    double balance_defect = 0.0; // |sum - 1|
    bool wood_unreliable = false;
};

EfficiencyTable efficiencies(const RayleighSpectrum& scattered_up,
                             const std::optional<RayleighSpectrum>& transmitted_down,
                             const IncidentWave& wave, const BoundaryModel& bc);

/// Energy norm sqrt(k^2 ||u||^2 + ||grad u||^2) of the physical field.
double norm_XR(const DiscreteField& field, double k);

/// Region-weighted transmission norm: a(x) = 1 above, lambda below, with
/// k(x) = k_plus / k_minus respectively.
double norm_H1alpha_weighted(const DiscreteField& field, double k_plus, double k_minus,
                             double lambda);

double norm_L2(const DiscreteField& field);
double seminorm_dx2(const DiscreteField& field); // || d u / d x2 ||_{L^2}

/// sqrt( sum_n (k^2 + (n+q)^2)^{1/2} |c_n|^2 ) of a trace spectrum.
double trace_half_norm(const RayleighSpectrum& spectrum, double k);

double profile_trace_norm(const DiscreteField& field); // || u ||_{L^2(Gamma)}
double profile_flux_norm(const DiscreteField& field);  // || d u / d nu ||_{L^2(Gamma)}

/// Incident boundary functional evaluated at the discrete field,
/// F(u_h) = -c * 2pi * conj(c_0) with c the incident modal coefficient.
std::complex<double> discrete_functional(const DiscreteField& field, const IncidentWave& wave);

/// L2 distance between the discrete field and a closed-form physical field,
/// by element quadrature of the stated degree. Also returns the reference
/// norm so callers can report relative errors.
struct FieldError {
    double abs_l2 = 0.0;
    double ref_l2 = 0.0;
    double abs_h1_semi = 0.0;
    double ref_h1_semi = 0.0;
    double rel_l2() const { return ref_l2 > 0 ? abs_l2 / ref_l2 : abs_l2; }
};

using PhysicalField = std::function<std::complex<double>(double, double)>;
using PhysicalGradient = std::function<Eigen::Vector2cd(double, double)>;

FieldError field_error(const DiscreteField& field, const PhysicalField& exact,
                       const PhysicalGradient* exact_grad = nullptr, int quad_degree = 8);

/// \int_0^{2pi} |u(x1, R)|^2 dx1 by exact per-edge quadrature of the trace.
double trace_l2_squared_top(const DiscreteField& field);

} // namespace grating
