#include <doctest.h>

#include <cmath>

#include "grating/fem.hpp"
#include "grating/postprocess.hpp"
#include "grating/verify.hpp"

using namespace grating;
using cd = std::complex<double>;

namespace {

std::shared_ptr<const PeriodicMesh> flat_mesh(double R, double h, DomainKind kind) {
    ProfileSpec spec;
    spec.kind = ProfileSpec::Kind::Flat;
    spec.parameter = 0.0;
    GratingProfile p = build_profile(spec, 8);
    return std::make_shared<PeriodicMesh>(generate_mesh(make_domain(p, R, kind), h));
}

const cd I(0.0, 1.0);

} // namespace

TEST_CASE("pure incident trace has a single modal coefficient") {
    auto space = make_fe_space(flat_mesh(1.0, 0.15, DomainKind::OneSided), 2);
    IncidentWave wave = make_incident_wave(1.2, 0.4, cd(0.8, -0.1));
    DiscreteField ui = interpolate(
        space, [&](double, double y) { return wave.gamma * std::exp(-I * wave.beta * y); },
        wave.alpha);
    RayleighSpectrum spec = rayleigh_coefficients(ui, 1.0, 10);
    cd expect = wave.gamma * std::exp(-I * wave.beta * 1.0);
    CHECK(std::abs(spec.at_order(0) - expect) < 1e-6); // interpolation-limited
    for (int n = -10; n <= 10; ++n)
        if (n != 0) CHECK(std::abs(spec.at_order(n)) < 1e-12);
}

TEST_CASE("coefficients are linear in the field") {
    auto space = make_fe_space(flat_mesh(1.0, 0.2, DomainKind::OneSided), 2);
    DiscreteField a = interpolate(space, [](double x, double y) { return std::exp(I * x) * y; }, 0.0);
    DiscreteField b = interpolate(space, [](double x, double y) { return cd(y * y, -0.3 * std::cos(x)); }, 0.0);
    DiscreteField s = a;
    s.values += b.values;
    RayleighSpectrum sa = rayleigh_coefficients(a, 1.0, 6);
    RayleighSpectrum sb = rayleigh_coefficients(b, 1.0, 6);
    RayleighSpectrum ss = rayleigh_coefficients(s, 1.0, 6);
    for (int n = -6; n <= 6; ++n)
        CHECK(std::abs(ss.at_order(n) - sa.at_order(n) - sb.at_order(n)) < 1e-13);
}

TEST_CASE("scattered coefficients undo the incident contribution and phases") {
    IncidentWave wave = make_incident_wave(1.0, 0.0, cd(1.0, 0.0));
    RayleighSpectrum trace;
    trace.alpha = 0.0;
    trace.height = 1.0;
    trace.coeffs.assign(3, cd(0.0, 0.0));
    // trace generated by scattered coefficient u0 plus the incident wave
    cd u0(0.3, -0.4);
    trace.at_order(0) = u0 * std::exp(I * wave.beta * 1.0) + wave.gamma * std::exp(-I * wave.beta * 1.0);
    RayleighSpectrum sc = scattered_spectrum(trace, wave);
    CHECK(std::abs(sc.at_order(0) - u0) < 1e-14);
}

TEST_CASE("energy norm of simple fields") {
    auto space = make_fe_space(flat_mesh(1.0, 0.1, DomainKind::OneSided), 2);
    SUBCASE("constant periodic factor at alpha = 0") {
        DiscreteField c1 = interpolate(space, [](double, double) { return cd(1.0, 0.0); }, 0.0);
        double n = norm_XR(c1, 1.0);
        CHECK(n * n == doctest::Approx(2.0 * M_PI).epsilon(1e-12)); // k^2 * area
    }
    SUBCASE("single oblique mode has norm^2 = 2 k^2 area") {
        IncidentWave wave = make_incident_wave(1.0, M_PI / 6, cd(1.0, 0.0));
        DiscreteField mode = interpolate(
            space, [&](double, double y) { return std::exp(I * wave.beta * y); }, wave.alpha);
        double n = norm_XR(mode, wave.k);
        CHECK(n * n == doctest::Approx(2.0 * 2.0 * M_PI).epsilon(1e-6));
    }
}

TEST_CASE("weighted transmission norm splits by region") {
    auto space = make_fe_space(flat_mesh(2.0, 0.2, DomainKind::TwoSided), 2);
    const double lambda = 0.7, kp = 1.0, km = 2.0;
    // supported in the lower half only
    DiscreteField lower = interpolate(
        space, [](double, double y) { return y < 0.0 ? cd(y, 0.0) : cd(0.0, 0.0); }, 0.0);
    double n = norm_H1alpha_weighted(lower, kp, km, lambda);
    // analytic: lambda * (|grad|^2 + km^2 |u|^2) over (0,2pi)x(-2,0) for u = y
    double area = 2.0 * M_PI * 2.0;
    double exact = lambda * (area + km * km * 2.0 * M_PI * (8.0 / 3.0));
    CHECK(n * n == doctest::Approx(exact).epsilon(1e-3)); // interpolation kink at y=0

    DiscreteField unif = interpolate(space, [](double, double) { return cd(1.0, 0.0); }, 0.0);
    double nu = norm_H1alpha_weighted(unif, 1.0, 1.0, 1.0);
    double nx = norm_XR(unif, 1.0);
    CHECK(nu == doctest::Approx(nx).epsilon(1e-12)); // uniform weights reduce to X_R
}

TEST_CASE("trace half norm reference values") {
    RayleighSpectrum s;
    s.alpha = 0.0;
    s.coeffs.assign(3, cd(0.0, 0.0));
    s.at_order(0) = 1.0;
    CHECK(trace_half_norm(s, 2.0) == doctest::Approx(std::sqrt(2.0)));
    for (auto& c : s.coeffs) c *= 3.0;
    CHECK(trace_half_norm(s, 2.0) == doctest::Approx(3.0 * std::sqrt(2.0)));
}

TEST_CASE("efficiency tables for the three flat oracles") {
    IncidentWave wave = make_incident_wave(1.0, 0.0, cd(1.0, 0.0));
    SUBCASE("dirichlet: single order, unit efficiency") {
        auto space = make_fe_space(flat_mesh(1.0, 0.1, DomainKind::OneSided), 2);
        DiscreteField u = solve(assemble_dirichlet(space, wave, 12));
        RayleighSpectrum up = scattered_spectrum(rayleigh_coefficients(u, 1.0, 12), wave);
        EfficiencyTable t = efficiencies(up, std::nullopt, wave, DirichletBC{});
        CHECK(t.balance_defect < 1e-10);
        for (const auto& row : t.rows)
            if (row.order == 0) CHECK(row.e_plus == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(t.wood_unreliable); // beta_1 = 0 at k = 1, theta = 0
    }
    SUBCASE("matched impedance absorbs the propagating order") {
        auto space = make_fe_space(flat_mesh(1.0, 0.1, DomainKind::OneSided), 2);
        DiscreteField u = solve(assemble_impedance(space, wave, wave.beta, 12));
        RayleighSpectrum up = scattered_spectrum(rayleigh_coefficients(u, 1.0, 12), wave);
        EfficiencyTable t = efficiencies(up, std::nullopt, wave, ImpedanceBC{wave.beta});
        for (const auto& row : t.rows)
            if (row.order == 0) CHECK(row.e_plus < 1e-9);
    }
    SUBCASE("transmission splits 1/9 to 8/9") {
        auto space = make_fe_space(flat_mesh(2.0, 0.1, DomainKind::TwoSided), 2);
        DiscreteField u = solve(assemble_transmission(space, wave, 2.0, 1.0, 12));
        RayleighSpectrum up = scattered_spectrum(rayleigh_coefficients(u, 2.0, 12), wave);
        RayleighSpectrum dn = transmitted_spectrum(rayleigh_coefficients(u, -2.0, 12), 2.0);
        EfficiencyTable t = efficiencies(up, dn, wave, TransmissionBC{2.0, 1.0});
        for (const auto& row : t.rows) {
            if (row.order == 0) {
                CHECK(row.e_plus == doctest::Approx(1.0 / 9.0).epsilon(1e-5));
                CHECK(row.e_minus == doctest::Approx(8.0 / 9.0).epsilon(1e-5));
            }
        }
        CHECK(t.balance_defect < 1e-10);
    }
}

TEST_CASE("energy norm of the solved flat field matches the closed-form integral") {
    // u = -2i gamma e^{-i beta c} e^{i alpha x} sin(beta (y - c)) over (0,2pi) x (c,R):
    // ||u||^2 = 2pi 4|gamma|^2 [ (k^2+alpha^2) I_s + beta^2 I_c ],
    // I_s/I_c = H/2 -+ sin(2 beta H)/(4 beta), H = R - c.
    auto space = make_fe_space(flat_mesh(1.0, 0.08, DomainKind::OneSided), 2);
    IncidentWave wave = make_incident_wave(1.3, 0.4, cd(0.7, -0.2));
    DiscreteField u = solve(assemble_dirichlet(space, wave, 13));
    const double H = 1.0, b = wave.beta;
    double is = H / 2.0 - std::sin(2.0 * b * H) / (4.0 * b);
    double ic = H / 2.0 + std::sin(2.0 * b * H) / (4.0 * b);
    double exact2 = 2.0 * M_PI * 4.0 * std::norm(wave.gamma) *
                    ((wave.k * wave.k + wave.alpha * wave.alpha) * is + b * b * ic);
    double n = norm_XR(u, wave.k);
    CHECK(n * n == doctest::Approx(exact2).epsilon(1e-5));
}

TEST_CASE("parseval consistency of the top trace") {
    auto space = make_fe_space(flat_mesh(1.0, 0.1, DomainKind::OneSided), 2);
    IncidentWave wave = make_incident_wave(1.3, 0.4, cd(1.0, 0.0));
    DiscreteField u = solve(assemble_dirichlet(space, wave, 14));
    double direct = trace_l2_squared_top(u);
    RayleighSpectrum spec = rayleigh_coefficients(u, 1.0, 40);
    double modal = 0.0;
    for (const auto& c : spec.coeffs) modal += std::norm(c);
    CHECK(direct == doctest::Approx(2.0 * M_PI * modal).epsilon(1e-8));
}

TEST_CASE("interior-height extraction follows the vertical phase law") {
    auto space = make_fe_space(flat_mesh(1.0, 0.08, DomainKind::OneSided), 2);
    IncidentWave wave = make_incident_wave(1.2, 0.3, cd(1.0, 0.0));
    DiscreteField mode = interpolate(
        space, [&](double, double y) { return std::exp(I * wave.beta * y); }, wave.alpha);
    const double y0 = 0.42;
    RayleighSpectrum spec = rayleigh_coefficients(mode, y0, 6);
    CHECK(std::abs(spec.at_order(0) - std::exp(I * wave.beta * y0)) < 1e-5);
    for (int n : {-2, -1, 1, 2}) CHECK(std::abs(spec.at_order(n)) < 1e-7);
    CHECK_THROWS_AS(rayleigh_coefficients(mode, 1.7, 6), std::invalid_argument);
}

TEST_CASE("sampled extraction converges to the exact path in the sample count") {
    IncidentWave wave = make_incident_wave(1.3, 0.4, cd(1.0, 0.0));
    auto space = make_fe_space(flat_mesh(1.0, 0.15, DomainKind::OneSided), 2);
    DiscreteField u = solve(assemble_dirichlet(space, wave, 12));
    RayleighSpectrum ex = rayleigh_coefficients(u, 1.0, 12);
    auto deviation = [&](int samples) {
        RayleighSpectrum sa = rayleigh_coefficients_sampled(u, 1.0, 12, samples);
        double dev = 0.0;
        for (int n = -12; n <= 12; ++n)
            dev = std::max(dev, std::abs(ex.at_order(n) - sa.at_order(n)));
        return dev;
    };
    double coarse = deviation(64);
    double fine = deviation(512);
    CHECK(coarse > 1e-14); // the sampling path genuinely differs ...
    CHECK(fine < coarse / 4.0); // ... and approaches the exact integrals
}
