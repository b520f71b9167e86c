#include <doctest.h>

#include <cmath>
#include <random>

#include "grating/dtn.hpp"

using namespace grating;
using cd = std::complex<double>;

TEST_CASE("propagation exponents at reference inputs") {
    CHECK(beta_n(2.0, 0.0, 0) == cd(2.0, 0.0));
    CHECK(std::abs(beta_n(1.0, 0.0, 2) - cd(0.0, std::sqrt(3.0))) < 1e-15);
    CHECK(std::abs(beta_n(1.0, 0.5, -1) - cd(std::sqrt(0.75), 0.0)) < 1e-15);
    CHECK(beta_n(1.0, 0.0, 1) == cd(0.0, 0.0)); // cutoff
}

TEST_CASE("mode exponents satisfy beta^2 = k^2 - alpha_n^2 with one-sided parts") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uk(0.3, 3.0);
    std::uniform_real_distribution<double> ua(-0.95, 0.95);
    for (int t = 0; t < 200; ++t) {
        double k = uk(rng);
        double alpha = k * ua(rng);
        ModeExponents m = make_mode_exponents(k, alpha, 14);
        for (int n = -14; n <= 14; ++n) {
            cd b = m.beta_of(n);
            double an = m.alpha_n[m.index_of(n)];
            CHECK(std::abs(b * b - (k * k - an * an)) < 1e-12 * std::max(1.0, k * k));
            CHECK(b.real() >= 0.0);
            CHECK(b.imag() >= 0.0);
            if (std::abs(b) > 1e-12) CHECK(std::min(b.real(), b.imag()) == 0.0);
        }
    }
}

TEST_CASE("wood anomaly flag at exact cutoff") {
    ModeExponents m = make_mode_exponents(1.0, 0.0, 12);
    CHECK(m.wood);
    ModeExponents clean = make_mode_exponents(1.3, 0.21, 12);
    CHECK_FALSE(clean.wood);
}

TEST_CASE("hatted exponents equal the conjugate-quasimomentum family") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uk(0.3, 3.0);
    std::uniform_real_distribution<double> ua(-1.0, 1.0);
    for (int t = 0; t < 300; ++t) {
        double k = uk(rng);
        double alpha = ua(rng);
        int n = static_cast<int>(rng() % 21) - 10;
        CHECK(beta_hat_n(k, alpha, n) == beta_n(k, -alpha, n));
    }
}

TEST_CASE("dtn application on reference coefficients") {
    RayleighSpectrum s;
    s.alpha = 0.0;
    s.k = 1.0;
    s.coeffs.assign(5, cd(0.0, 0.0)); // orders -2..2

    SUBCASE("propagating order maps to i beta") {
        s.at_order(0) = 1.0;
        RayleighSpectrum out = apply_dtn(s, DtnVariant::T, 1.0);
        CHECK(std::abs(out.at_order(0) - cd(0.0, 1.0)) < 1e-15);
    }
    SUBCASE("evanescent order picks up the negative real factor") {
        s.at_order(2) = 1.0;
        RayleighSpectrum out = apply_dtn(s, DtnVariant::T, 1.0);
        CHECK(std::abs(out.at_order(2) - cd(-std::sqrt(3.0), 0.0)) < 1e-14);
    }
    SUBCASE("downward map carries the minus sign") {
        s.at_order(0) = 1.0;
        RayleighSpectrum out = apply_dtn(s, DtnVariant::TMinus, 1.0);
        CHECK(std::abs(out.at_order(0) - cd(0.0, -1.0)) < 1e-15);
    }
}

TEST_CASE("incident boundary functional coefficient") {
    IncidentWave w = make_incident_wave(1.0, 0.0, {1.0, 0.0});
    CHECK(std::abs(incident_functional_coefficient(w, 0.0) - cd(0.0, 2.0)) < 1e-15);
    CHECK(std::abs(incident_functional_coefficient(w, M_PI / 2) - cd(2.0, 0.0)) < 1e-14);
    IncidentWave grazing = make_incident_wave(1.0, M_PI / 2 - 1e-8, {1.0, 0.0});
    CHECK(std::abs(incident_functional_coefficient(grazing, 1.0)) < 1e-7);
    // |c| = 2 beta |gamma| at any height
    IncidentWave o = make_incident_wave(1.7, 0.4, {0.3, -0.4});
    CHECK(std::abs(incident_functional_coefficient(o, 2.3)) ==
          doctest::Approx(2.0 * o.beta * std::abs(o.gamma)).epsilon(1e-14));
}

TEST_CASE("sign structure of the modal quadratic forms") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        double k = 0.4 + 2.2 * std::abs(u(rng));
        RayleighSpectrum s;
        s.alpha = 0.9 * u(rng);
        s.k = k;
        s.coeffs.resize(17);
        for (auto& c : s.coeffs) c = cd(u(rng), u(rng));

        cd q = dtn_quadratic_form(s, DtnVariant::T, k);
        CHECK(q.real() <= 1e-12);
        CHECK(q.imag() >= -1e-12);

        // section-5 sign convention tests -<T^- g, g>
        cd qm = -dtn_quadratic_form(s, DtnVariant::TMinus, k);
        CHECK(qm.real() <= 1e-12);
        CHECK(qm.imag() >= -1e-12);
    }
}

TEST_CASE("modal diagonal entries and the zero spectrum") {
    auto diag = dtn_bilinear_entries(3, 1.0, 0.25, DtnVariant::T);
    CHECK(diag.size() == 7);
    CHECK(std::abs(diag[3] - 2.0 * M_PI * cd(0.0, 1.0) * beta_n(1.0, 0.25, 0)) < 1e-14);

    RayleighSpectrum zero;
    zero.alpha = 0.25;
    zero.k = 1.0;
    zero.coeffs.assign(7, cd(0.0, 0.0));
    CHECK(std::abs(dtn_quadratic_form(zero, DtnVariant::T, 1.0)) == 0.0);
}

TEST_CASE("propagating set must fit the truncation order") {
    CHECK_THROWS_AS(make_mode_exponents(12.0, 0.0, 4), std::invalid_argument);
}
