#include "grating/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace grating {

DirichletBoundResult dirichlet_bound(double k, double theta, std::complex<double> gamma, double R,
                                     double f_minus) {
    if (!(R > f_minus)) throw std::invalid_argument("dirichlet_bound: R must exceed f_minus");
    const double d = R - f_minus;
    const double d2 = d * d, d3 = d2 * d;
    DirichletBoundResult out;
    out.M = 4.0 * k * k * k * d3 + 2.0 * k * k * d2 + 4.0 * k * k * d3 * k * std::cos(theta) + 1.0;
    out.C = std::sqrt(k * out.M * out.M + 4.0 * std::pow(k, 4) * d3);
    out.bound = 2.0 * std::sqrt(2.0 * M_PI) * std::cos(theta) * std::abs(gamma) * out.C;
    return out;
}

ImpedanceBoundResult impedance_bound(double k, double theta, std::complex<double> gamma,
                                     double lambda, double R, double f_minus, double L) {
    if (!(lambda > 0.0)) throw std::invalid_argument("impedance_bound: lambda must be positive");
    ImpedanceBoundResult out;
    const double d = R - f_minus;
    if (!(d > 1.0)) return out; // hypothesis R - f_minus > 1 fails, no constant
    const double d2 = d * d, d3 = d2 * d;
    const double numer = 4.0 * d2 + (2.0 * k + 1.0) * d3 * (2.0 * k * d + 1.0);
    const double denom = 2.0 * std::min((d - 1.0) / ((2.0 * k + 1.0) * d3),
                                        1.0 / std::sqrt(1.0 + L * L));
    out.Ctilde2 = numer / denom;
    const double inner = 1.0 + 4.0 * k * k * out.Ctilde2 / lambda;
    out.Cstar = std::sqrt(k * inner * inner + 8.0 * std::pow(k, 4) * out.Ctilde2);
    out.bound = 2.0 * std::sqrt(2.0 * M_PI) * std::cos(theta) * std::abs(gamma) * out.Cstar;
    out.valid = true;
    return out;
}

TransmissionBoundResult transmission_bound(double k_plus, double k_minus, double lambda,
                                           double theta, std::complex<double> gamma, double R,
                                           double f_minus, double f_plus, double L) {
    TransmissionBoundResult out;
    const double kp2 = k_plus * k_plus;
    const double lkm2 = lambda * k_minus * k_minus;
    const double d_minus = R - f_minus;
    const double root = std::sqrt(1.0 + L * L);
    const double prefactor =
        2.0 * std::sqrt(2.0 * M_PI * k_plus) * std::cos(theta) * std::abs(gamma);

    if (lambda >= 1.0 && kp2 > lkm2) {
        out.parameter_case = 1;
        out.C_TS = std::min(2.0 / (d_minus * d_minus), (kp2 - lkm2) / (2.0 * d_minus * root));
        out.C_123 =
            2.0 * std::max(k_plus, lambda * k_minus) * (2.0 * k_plus * d_minus + 1.0) / out.C_TS +
            1.0;
        out.bound = prefactor * out.C_123;
    } else if (lambda <= 1.0 && kp2 < lkm2) {
        out.parameter_case = 2;
        const double d_plus = R - f_plus;
        out.C_TS = std::min(2.0 / (d_minus * d_minus), (lkm2 - kp2) / (2.0 * d_minus * root));
        out.C_123 =
            2.0 * std::max(k_plus, lambda * k_minus) * (2.0 * k_plus * d_plus + 1.0) / out.C_TS +
            1.0;
        out.bound = prefactor * out.C_123;
    }
    return out;
}

StabilityReport certify(StabilityReport r) {
    if (r.bound > 0.0) r.ratio = r.computed_norm / r.bound;
    if (r.wood) {
        r.status = CertificationStatus::NoCertificateWood;
        return r;
    }
    if (!r.hypotheses.all_pass()) {
        r.status = CertificationStatus::NoCertificateHypotheses;
        return r;
    }
    if (r.problem == "transmission" && r.parameter_case == 0) {
        r.status = CertificationStatus::NoCertificateCase;
        return r;
    }
    const double drift = std::abs(r.computed_norm - r.coarse_norm) /
                         std::max(r.computed_norm, 1e-300);
    if (!(drift < 0.01)) {
        r.status = CertificationStatus::Indeterminate;
        return r;
    }
    r.status = r.ratio <= 1.0 ? CertificationStatus::Certified
                              : CertificationStatus::RatioExceedsBound;
    return r;
}

} // namespace grating
