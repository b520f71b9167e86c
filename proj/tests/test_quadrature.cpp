#include <doctest.h>

#include <cmath>
#include <complex>

#include "grating/quadrature.hpp"

using namespace grating;

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    for (int n = 1; n <= 8; ++n) {
        SegmentRule rule = gauss_legendre(n);
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double acc = 0.0;
            for (size_t q = 0; q < rule.points.size(); ++q)
                acc += rule.weights[q] * std::pow(rule.points[q], d);
            CHECK(acc == doctest::Approx(1.0 / (d + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("triangle rule integrates monomials exactly up to its degree") {
    for (int degree : {2, 4, 8}) {
        TriangleRule rule = triangle_rule_for_degree(degree);
        for (int p = 0; p + 0 <= degree; ++p) {
            for (int q = 0; p + q <= degree; ++q) {
                double acc = 0.0;
                for (size_t i = 0; i < rule.points.size(); ++i)
                    acc += rule.weights[i] * std::pow(rule.points[i][0], p) *
                           std::pow(rule.points[i][1], q);
                // \int_T x^p y^q = p! q! / (p+q+2)!
                double exact = std::tgamma(p + 1.0) * std::tgamma(q + 1.0) /
                               std::tgamma(p + q + 3.0);
                CHECK(acc == doctest::Approx(exact).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("oscillatory moments match brute-force quadrature") {
    const double a = 0.7, b = 1.9;
    SegmentRule dense = gauss_legendre(40);
    for (int n : {0, 1, -3, 12, -25}) {
        auto mom = oscillatory_moments(a, b, n, 2);
        for (int m = 0; m <= 2; ++m) {
            std::complex<double> brute = 0.0;
            for (size_t q = 0; q < dense.points.size(); ++q) {
                double x = a + dense.points[q] * (b - a);
                double t = dense.points[q];
                brute += dense.weights[q] * (b - a) * std::pow(t, m) *
                         std::exp(std::complex<double>(0.0, -n * x));
            }
            CHECK(std::abs(mom[m] - brute) < 1e-13);
        }
    }
}

TEST_CASE("oscillatory moments stay accurate across the series switch") {
    // n (b-a) just below and above the small-phase threshold
    for (double len : {1e-8, 0.01, 0.4999, 0.5001, 1.0}) {
        auto mom = oscillatory_moments(0.0, len, 1, 2);
        // m = 0: (1 - e^{-i len}) / i
        std::complex<double> exact =
            (1.0 - std::exp(std::complex<double>(0.0, -len))) / std::complex<double>(0.0, 1.0);
        CHECK(std::abs(mom[0] - exact) < 1e-15 + 1e-14 * len);
    }
}
