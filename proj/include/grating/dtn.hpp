#pragma once

#include <complex>
#include <vector>

#include "grating/geometry.hpp"

namespace grating {

/// Propagation exponent of order n at quasimomentum alpha:
///   beta_n = sqrt(k^2 - (n+alpha)^2)      if |n+alpha| <= k  (propagating),
///   beta_n = i sqrt((n+alpha)^2 - k^2)    otherwise          (evanescent).
/// The branch is fixed by this two-case form, never by a generic complex sqrt.
std::complex<double> beta_n(double k, double alpha, int n);

/// Exponent family of the conjugate quasimomentum, beta_hat_n(k, alpha, n)
/// = beta_n(k, -alpha, n). Used by the adjoint-type auxiliary problem.
std::complex<double> beta_hat_n(double k, double alpha, int n);

/// Relative cutoff threshold: order n is at a Wood anomaly when
/// |beta_n| <= wood_threshold * k.
inline constexpr double wood_threshold = 1e-8;

/// All exponents of orders -N..N.
struct ModeExponents {
    double k;
    double alpha;
    int N;
    std::vector<double> alpha_n;               // size 2N+1, index i <-> order i-N
    std::vector<std::complex<double>> beta;    // same indexing
    bool wood = false;                         // some |beta_n| <= wood_threshold * k

    int order_of(int index) const { return index - N; }
    int index_of(int order) const { return order + N; }
    const std::complex<double>& beta_of(int order) const { return beta[index_of(order)]; }
    bool propagating(int order) const;
};

ModeExponents make_mode_exponents(double k, double alpha, int N);

/// Truncated coefficient set of a quasiperiodic trace or Rayleigh expansion,
/// indexed by order -N..N. `alpha` is the quasimomentum of the expansion
/// itself (-alpha of the incident wave for adjoint-type fields).
struct RayleighSpectrum {
    std::vector<std::complex<double>> coeffs; // size 2N+1
    double alpha = 0.0;
    double height = 0.0; // evaluation height (R or -R)
    double k = 0.0;

    int N() const { return (static_cast<int>(coeffs.size()) - 1) / 2; }
    std::complex<double>& at_order(int n) { return coeffs[n + N()]; }
    const std::complex<double>& at_order(int n) const { return coeffs[n + N()]; }
};

enum class DtnVariant { T, THat, TPlus, TMinus };

/// Coefficient-wise DtN action: T multiplies order n by i beta_n; THat uses
/// the conjugate quasimomentum; TPlus/TMinus give +-i beta_n^{+-} with the
/// exponents built from the wavenumber passed in k_side (k_plus or k_minus).
RayleighSpectrum apply_dtn(const RayleighSpectrum& spec, DtnVariant variant, double k_side);

/// Diagonal entries 2 pi i beta_n (orders -N..N) of the modal realization of
/// the DtN boundary form; the caller composes them with its trace-to-mode
/// transform. Signs follow the variant (TMinus carries the minus).
std::vector<std::complex<double>> dtn_bilinear_entries(int N, double k, double alpha,
                                                       DtnVariant variant);

/// Modal quadratic form <T g, g> = sum_n diag_n |g_n|^2 with the entries above.
std::complex<double> dtn_quadratic_form(const RayleighSpectrum& spec, DtnVariant variant,
                                        double k_side);

/// The single nonzero modal coefficient (order 0) of the incident boundary
/// functional on the artificial line x2 = R: 2 i beta e^{-i beta R} gamma.
std::complex<double> incident_functional_coefficient(const IncidentWave& wave, double R);

} // namespace grating
