#include "grating/dtn.hpp"

#include <cmath>
#include <stdexcept>

namespace grating {

std::complex<double> beta_n(double k, double alpha, int n) {
    if (!(k > 0.0)) throw std::invalid_argument("beta_n: k must be positive");
    const double an = alpha + n;
    const double d = k * k - an * an;
    if (std::abs(an) <= k) return {std::sqrt(d), 0.0};
    return {0.0, std::sqrt(-d)};
}

std::complex<double> beta_hat_n(double k, double alpha, int n) {
    return beta_n(k, -alpha, n);
}

bool ModeExponents::propagating(int order) const {
    return std::abs(alpha_n[index_of(order)]) <= k;
}

ModeExponents make_mode_exponents(double k, double alpha, int N) {
    if (N < 1) throw std::invalid_argument("mode exponents: N must be >= 1");
    // every propagating order must fit in -N..N
    if (k + std::abs(alpha) > N)
        throw std::invalid_argument("mode exponents: N too small for the propagating set");
    ModeExponents m;
    m.k = k;
    m.alpha = alpha;
    m.N = N;
    m.alpha_n.resize(2 * N + 1);
    m.beta.resize(2 * N + 1);
    for (int n = -N; n <= N; ++n) {
        m.alpha_n[n + N] = alpha + n;
        m.beta[n + N] = beta_n(k, alpha, n);
        if (std::abs(m.beta[n + N]) <= wood_threshold * k) m.wood = true;
    }
    return m;
}

namespace {

std::complex<double> dtn_factor(DtnVariant variant, double k_side, double alpha, int n) {
    const std::complex<double> i(0.0, 1.0);
    switch (variant) {
    case DtnVariant::T:
        return i * beta_n(k_side, alpha, n);
    case DtnVariant::THat:
        return i * beta_n(k_side, -alpha, n);
    case DtnVariant::TPlus:
        return i * beta_n(k_side, alpha, n);
    case DtnVariant::TMinus:
        return -i * beta_n(k_side, alpha, n);
    }
    return {};
}

} // namespace

RayleighSpectrum apply_dtn(const RayleighSpectrum& spec, DtnVariant variant, double k_side) {
    RayleighSpectrum out = spec;
    const int N = spec.N();
    for (int n = -N; n <= N; ++n)
        out.at_order(n) = dtn_factor(variant, k_side, spec.alpha, n) * spec.at_order(n);
    return out;
}

std::vector<std::complex<double>> dtn_bilinear_entries(int N, double k, double alpha,
                                                       DtnVariant variant) {
    if (N < 1) throw std::invalid_argument("dtn entries: N must be >= 1");
    std::vector<std::complex<double>> diag(2 * N + 1);
    for (int n = -N; n <= N; ++n)
        diag[n + N] = 2.0 * M_PI * dtn_factor(variant, k, alpha, n);
    return diag;
}

std::complex<double> dtn_quadratic_form(const RayleighSpectrum& spec, DtnVariant variant,
                                        double k_side) {
    const int N = spec.N();
    std::complex<double> q = 0.0;
    for (int n = -N; n <= N; ++n)
        q += 2.0 * M_PI * dtn_factor(variant, k_side, spec.alpha, n) * std::norm(spec.at_order(n));
    return q;
}

std::complex<double> incident_functional_coefficient(const IncidentWave& wave, double R) {
    const std::complex<double> i(0.0, 1.0);
    return 2.0 * i * wave.beta * std::exp(-i * wave.beta * R) * wave.gamma;
}

} // namespace grating
