#include "grating/quadrature.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace grating {

SegmentRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    SegmentRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    // Newton iteration on P_n over [-1,1], then map to [0,1].
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.points[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

SegmentRule segment_rule_for_degree(int degree) {
    int n = degree / 2 + 1;
    return gauss_legendre(n);
}

TriangleRule triangle_rule_for_degree(int degree) {
    // Duffy map (u,v) -> (u(1-v), v) carries an extra factor (1-v), so a
    // degree-d integrand needs the tensor rule exact through degree d+1.
    int n = (degree + 3) / 2;
    SegmentRule g = gauss_legendre(n);
    TriangleRule rule;
    rule.points.reserve(n * n);
    rule.weights.reserve(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double u = g.points[i], v = g.points[j];
            rule.points.push_back({u * (1.0 - v), v});
            rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - v));
        }
    }
    return rule;
}

std::vector<std::complex<double>> oscillatory_moments(double a, double b, int n, int max_m) {
    using cd = std::complex<double>;
    const double L = b - a;
    const double mu = -static_cast<double>(n) * L; // phase of e^{i mu t} after t-substitution
    std::vector<cd> J(max_m + 1);
    if (std::abs(mu) < 0.5) {
        // series: J_m = sum_j (i mu)^j / (j! (m+j+1))
        for (int m = 0; m <= max_m; ++m) {
            cd term(1.0, 0.0);
            cd sum = term / double(m + 1);
            for (int j = 1; j <= 24; ++j) {
                term *= cd(0.0, mu) / double(j);
                sum += term / double(m + j + 1);
            }
            J[m] = sum;
        }
    } else {
        const cd imu(0.0, mu);
        const cd e = std::exp(imu);
        J[0] = (e - 1.0) / imu;
        for (int m = 1; m <= max_m; ++m) J[m] = (e - double(m) * J[m - 1]) / imu;
    }
    const cd phase = std::exp(cd(0.0, -double(n) * a));
    for (auto& v : J) v *= L * phase;
    return J;
}

} // namespace grating
