#pragma once

#include <array>
#include <complex>
#include <vector>

namespace grating {

/// Gauss-Legendre rule on [0,1]: weights sum to 1, exact for degree 2n-1.
struct SegmentRule {
    std::vector<double> points;
    std::vector<double> weights;
};

SegmentRule gauss_legendre(int n);

/// Returns the smallest rule exact for polynomials of the given total degree.
SegmentRule segment_rule_for_degree(int degree);

/// Quadrature on the reference triangle {(x,y): x,y >= 0, x+y <= 1},
/// built by a Duffy collapse of a tensor Gauss grid. Weights sum to 1/2.
struct TriangleRule {
    std::vector<std::array<double, 2>> points;
    std::vector<double> weights;
};

TriangleRule triangle_rule_for_degree(int degree);

/// Exact moments of the scaled monomials t^m, t = (x-a)/(b-a), against
/// e^{-i n x} over [a,b]:
///
///   moments[m] = \int_a^b ((x-a)/(b-a))^m e^{-i n x} dx,  m = 0..max_m.
///
/// Small-phase evaluation switches to a series so the result stays
/// accurate near n (b-a) = 0.
std::vector<std::complex<double>> oscillatory_moments(double a, double b, int n, int max_m);

} // namespace grating
