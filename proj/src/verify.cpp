#include "grating/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "grating/quadrature.hpp"

namespace grating {

using cd = std::complex<double>;

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
const cd I(0.0, 1.0);
} // namespace

ManufacturedField plane_wave_mode(double k, double alpha, int n, bool upgoing, cd amp) {
    const double an = alpha + n;
    const cd bn = beta_n(k, alpha, n) * (upgoing ? 1.0 : -1.0);
    ManufacturedField f;
    f.alpha = alpha;
    f.tag = "mode";
    f.value = [=](double x, double y) { return amp * std::exp(I * (an * x) + I * bn * y); };
    f.gradient = [=](double x, double y) {
        cd v = amp * std::exp(I * (an * x) + I * bn * y);
        return Eigen::Vector2cd(I * an * v, I * bn * v);
    };
    f.laplacian = [=](double x, double y) {
        cd v = amp * std::exp(I * (an * x) + I * bn * y);
        return (-(an * an) - bn * bn) * v;
    };
    return f;
}

ManufacturedField sum(const ManufacturedField& a, const ManufacturedField& b) {
    ManufacturedField f;
    f.alpha = a.alpha;
    f.tag = a.tag + "+" + b.tag;
    f.value = [a, b](double x, double y) { return a.value(x, y) + b.value(x, y); };
    f.gradient = [a, b](double x, double y) {
        return Eigen::Vector2cd(a.gradient(x, y) + b.gradient(x, y));
    };
    f.laplacian = [a, b](double x, double y) { return a.laplacian(x, y) + b.laplacian(x, y); };
    return f;
}

FlatDirichletOracle flat_dirichlet_oracle(const IncidentWave& wave, double c) {
    FlatDirichletOracle oracle;
    oracle.u0 = -wave.gamma * std::exp(-2.0 * I * wave.beta * c);
    ManufacturedField incident = plane_wave_mode(wave.k, wave.alpha, 0, false, wave.gamma);
    ManufacturedField scattered = plane_wave_mode(wave.k, wave.alpha, 0, true, oracle.u0);
    oracle.field = sum(incident, scattered);
    oracle.field.tag = "flat-dirichlet";
    return oracle;
}

FlatImpedanceOracle flat_impedance_oracle(const IncidentWave& wave, double lambda, double c) {
    if (!(lambda > 0.0)) throw std::invalid_argument("flat impedance oracle: lambda > 0 required");
    FlatImpedanceOracle oracle;
    oracle.reflection = wave.gamma * std::exp(-2.0 * I * wave.beta * c) *
                        ((wave.beta - lambda) / (wave.beta + lambda));
    ManufacturedField incident = plane_wave_mode(wave.k, wave.alpha, 0, false, wave.gamma);
    ManufacturedField reflected = plane_wave_mode(wave.k, wave.alpha, 0, true, oracle.reflection);
    oracle.field = sum(incident, reflected);
    oracle.field.tag = "flat-impedance";
    return oracle;
}

FlatTransmissionOracle flat_transmission_oracle(const IncidentWave& wave, double k_minus,
                                                double lambda) {
    FlatTransmissionOracle oracle;
    const cd bp = wave.beta;
    const cd bm = beta_n(k_minus, wave.alpha, 0);
    oracle.beta_minus = bm;
    const cd denom = bp + lambda * bm;
    if (std::abs(denom) == 0.0)
        throw std::invalid_argument("flat transmission oracle: beta+ + lambda beta- vanishes");
    oracle.r = (bp - lambda * bm) / denom;
    oracle.t = 2.0 * bp / denom;
    oracle.flux_residual =
        std::abs(oracle.r * oracle.r * bp + lambda * oracle.t * oracle.t * bm - bp);

    ManufacturedField incident = plane_wave_mode(wave.k, wave.alpha, 0, false, wave.gamma);
    ManufacturedField reflected =
        plane_wave_mode(wave.k, wave.alpha, 0, true, wave.gamma * oracle.r);
    oracle.upper = sum(incident, reflected);
    oracle.upper.tag = "flat-transmission-upper";
    oracle.lower = plane_wave_mode(k_minus, wave.alpha, 0, false, wave.gamma * oracle.t);
    oracle.lower.tag = "flat-transmission-lower";
    return oracle;
}

double rellich_residual(const ManufacturedField& v, double c, const TruncatedDomain& domain,
                        double k, int quad_degree, double mesh_h) {
    if (domain.kind != DomainKind::OneSided)
        throw std::invalid_argument("rellich_residual: one-sided domains only");
    PeriodicMesh mesh = generate_mesh(domain, mesh_h);
    TriangleRule rule = triangle_rule_for_degree(quad_degree);
    SegmentRule srule = segment_rule_for_degree(quad_degree);

    double lhs = 0.0;
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const auto& p0 = mesh.vertices[tri[0]];
        const auto& p1 = mesh.vertices[tri[1]];
        const auto& p2 = mesh.vertices[tri[2]];
        double det =
            std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
        for (size_t qp = 0; qp < rule.points.size(); ++qp) {
            double xi = rule.points[qp][0], eta = rule.points[qp][1];
            double x = p0[0] + xi * (p1[0] - p0[0]) + eta * (p2[0] - p0[0]);
            double y = p0[1] + xi * (p1[1] - p0[1]) + eta * (p2[1] - p0[1]);
            double w = rule.weights[qp] * det;
            cd val = v.value(x, y);
            Eigen::Vector2cd g = v.gradient(x, y);
            cd lap = v.laplacian(x, y);
            double term1 = 2.0 * std::real((y - c) * std::conj(g[1]) * (lap + k * k * val));
            double term2 = g.squaredNorm() - k * k * std::norm(val) - 2.0 * std::norm(g[1]);
            lhs += w * (term1 - term2);
        }
    }

    double rhs = 0.0;
    auto boundary_term = [&](double x, double y, const std::array<double, 2>& nu) {
        cd val = v.value(x, y);
        Eigen::Vector2cd g = v.gradient(x, y);
        cd dnu = nu[0] * g[0] + nu[1] * g[1];
        return (y - c) * (-nu[1] * g.squaredNorm() + nu[1] * k * k * std::norm(val) +
                          2.0 * std::real(std::conj(g[1]) * dnu));
    };
    for (const auto& e : mesh.tagged_edges) {
        if (e.tag != BoundaryTag::GammaRPlus && e.tag != BoundaryTag::GammaProfile) continue;
        const auto& a = mesh.vertices[e.v0];
        const auto& b = mesh.vertices[e.v1];
        double len = std::hypot(b[0] - a[0], b[1] - a[1]);
        std::array<double, 2> nu = {-(b[1] - a[1]) / len, (b[0] - a[0]) / len}; // upward
        double sign = e.tag == BoundaryTag::GammaRPlus ? 1.0 : -1.0;
        for (size_t qp = 0; qp < srule.points.size(); ++qp) {
            double t = srule.points[qp];
            double x = a[0] + t * (b[0] - a[0]);
            double y = a[1] + t * (b[1] - a[1]);
            rhs += sign * srule.weights[qp] * len * boundary_term(x, y, nu);
        }
    }
    return std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + 1.0);
}

namespace {

struct StripMode {
    int n;
    cd amp;
    double omega;
    double phase; // vertical shape sin(omega y + phase)
};

std::vector<StripMode> random_modes(std::mt19937& rng, int count, bool zero_phase) {
    std::uniform_real_distribution<double> uamp(-1.0, 1.0);
    std::uniform_real_distribution<double> uomega(0.5, 6.0);
    std::uniform_real_distribution<double> uphase(0.0, kTwoPi);
    std::vector<int> orders(13);
    std::iota(orders.begin(), orders.end(), -6);
    std::shuffle(orders.begin(), orders.end(), rng);
    std::vector<StripMode> modes(count);
    for (int m = 0; m < count; ++m) {
        modes[m].n = orders[m];
        modes[m].amp = cd(uamp(rng), uamp(rng));
        modes[m].omega = uomega(rng);
        modes[m].phase = zero_phase ? 0.0 : uphase(rng);
    }
    return modes;
}

double int_sin2(double omega, double phase, double y0, double y1) {
    auto anti = [&](double y) {
        return y / 2.0 - std::sin(2.0 * (omega * y + phase)) / (4.0 * omega);
    };
    return anti(y1) - anti(y0);
}

double int_cos2(double omega, double phase, double y0, double y1) {
    auto anti = [&](double y) {
        return y / 2.0 + std::sin(2.0 * (omega * y + phase)) / (4.0 * omega);
    };
    return anti(y1) - anti(y0);
}

} // namespace

CheckSummary trace_inequality_suite(int trials, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uk(0.5, 2.5);
    std::uniform_real_distribution<double> utheta(-1.2, 1.2);
    std::uniform_real_distribution<double> uc(-0.5, 0.5);
    std::uniform_real_distribution<double> uh(0.8, 2.2);

    CheckSummary s;
    s.name = "trace-inequality";
    s.trials = trials;
    s.min_margin = std::numeric_limits<double>::infinity();
    s.min_rel_margin = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < trials; ++trial) {
        double k = uk(rng);
        double alpha = k * std::sin(utheta(rng));
        double c = uc(rng);
        double H = uh(rng);
        // v = sum_m amp_m e^{i (n_m + alpha) x} sin(omega_m (y - c)) vanishes on the flat
        // profile; distinct orders keep the modal sums diagonal.
        auto modes = random_modes(rng, 10, /*zero_phase=*/true);
        double x2 = 0.0, t2 = 0.0;
        for (const auto& m : modes) {
            double an = alpha + m.n;
            double is = int_sin2(m.omega, -m.omega * c, c, c + H);
            double ic = int_cos2(m.omega, -m.omega * c, c, c + H);
            x2 += std::norm(m.amp) * ((k * k + an * an) * is + m.omega * m.omega * ic);
            double gR = std::sin(m.omega * H);
            t2 += std::sqrt(k * k + an * an) * std::norm(m.amp) * gR * gR;
        }
        double norm_x = std::sqrt(kTwoPi * x2);
        double margin = norm_x - std::sqrt(kTwoPi * t2);
        double rel = margin / std::max(norm_x, 1e-300);
        s.min_margin = std::min(s.min_margin, margin);
        s.min_rel_margin = std::min(s.min_rel_margin, rel);
    }
    s.pass = s.min_rel_margin >= -1e-9;
    return s;
}

CheckSummary poincare_suite(int trials, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uc(-0.5, 0.5);
    std::uniform_real_distribution<double> uh(0.6, 2.0);
    std::uniform_real_distribution<double> ufm(0.0, 1.0);

    CheckSummary s;
    s.name = "poincare";
    s.trials = trials;
    s.min_margin = std::numeric_limits<double>::infinity();
    s.min_rel_margin = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < trials; ++trial) {
        double c = uc(rng);
        double R = c + uh(rng);
        double f_minus = c - ufm(rng);
        auto modes = random_modes(rng, 8, /*zero_phase=*/false);
        double lhs = 0.0, d2 = 0.0, trace = 0.0;
        for (const auto& m : modes) {
            lhs += std::norm(m.amp) * int_sin2(m.omega, m.phase, c, R);
            d2 += std::norm(m.amp) * m.omega * m.omega * int_cos2(m.omega, m.phase, c, R);
            double gc = std::sin(m.omega * c + m.phase);
            trace += std::norm(m.amp) * gc * gc;
        }
        double d = R - f_minus;
        double rhs = d * d * d2 + 2.0 * d * trace;
        double margin = kTwoPi * (rhs - lhs);
        double rel = margin / std::max(kTwoPi * rhs, 1e-300);
        s.min_margin = std::min(s.min_margin, margin);
        s.min_rel_margin = std::min(s.min_rel_margin, rel);
    }
    s.pass = s.min_rel_margin >= -1e-9;
    return s;
}

double mode_amplitude_margin(const RayleighSpectrum& spectrum, double k, double R) {
    const int N = spectrum.N();
    double acc = 0.0;
    for (int n = -N; n <= N; ++n) {
        double an = spectrum.alpha + n;
        double weight;
        if (std::abs(an) <= k) {
            weight = 1.0;
        } else {
            double b = std::sqrt(an * an - k * k);
            weight = (std::exp(-2.0 * b * (R - 1.0)) - std::exp(-2.0 * b * R)) / (2.0 * b);
        }
        acc += std::norm(spectrum.at_order(n)) * weight;
    }
    return std::sqrt(acc) - std::abs(spectrum.at_order(0));
}

CheckSummary mode_amplitude_suite(int trials, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uk(0.5, 2.5);
    std::uniform_real_distribution<double> utheta(-1.2, 1.2);
    std::uniform_real_distribution<double> uamp(-1.0, 1.0);
    std::uniform_real_distribution<double> uR(1.05, 3.0);

    CheckSummary s;
    s.name = "mode-amplitude";
    s.trials = trials;
    s.min_margin = std::numeric_limits<double>::infinity();
    s.min_rel_margin = std::numeric_limits<double>::infinity();
    const int N = 8;
    for (int trial = 0; trial < trials; ++trial) {
        double k = uk(rng);
        double alpha = k * std::sin(utheta(rng));
        double R = uR(rng);
        RayleighSpectrum spec;
        spec.alpha = -alpha; // conjugate quasimomentum family
        spec.k = k;
        spec.height = R;
        spec.coeffs.resize(2 * N + 1);
        for (auto& cfc : spec.coeffs) cfc = cd(uamp(rng), uamp(rng));
        double margin = mode_amplitude_margin(spec, k, R);
        double scale = margin + std::abs(spec.at_order(0));
        s.min_margin = std::min(s.min_margin, margin);
        s.min_rel_margin = std::min(s.min_rel_margin, margin / std::max(scale, 1e-300));
    }
    s.pass = s.min_rel_margin >= -1e-9;
    return s;
}

double trace_inequality_margin(const DiscreteField& field, double k, int N) {
    double nx = norm_XR(field, k);
    RayleighSpectrum spec = rayleigh_coefficients(field, field.space->mesh->R, N);
    return nx - std::sqrt(kTwoPi) * trace_half_norm(spec, k);
}

double poincare_margin(const DiscreteField& field, double f_minus) {
    double lhs = norm_L2(field);
    double d2 = seminorm_dx2(field);
    double tr = profile_trace_norm(field);
    double d = field.space->mesh->R - f_minus;
    return d * d * d2 * d2 + 2.0 * d * tr * tr - lhs * lhs;
}

AuxiliaryCheck auxiliary_bound_check(const GratingProfile& profile, double R,
                                     const IncidentWave& wave, double lambda, double h, int order,
                                     int N) {
    AuxiliaryCheck out;
    TruncatedDomain domain = make_domain(profile, R, DomainKind::OneSided);
    auto coarse_mesh = std::make_shared<PeriodicMesh>(generate_mesh(domain, h));
    auto fine_mesh = std::make_shared<PeriodicMesh>(refine(*coarse_mesh));

    auto run = [&](std::shared_ptr<const PeriodicMesh> mesh, double* u_norm, double* w_norm,
                   double* flux_norm) {
        auto space = make_fe_space(mesh, order);
        DiscreteField u = solve(assemble_impedance(space, wave, lambda, N));
        DiscreteField w = solve(assemble_auxiliary(space, wave, u, N));
        if (u_norm) *u_norm = norm_L2(u);
        if (w_norm) *w_norm = norm_L2(w);
        if (flux_norm) *flux_norm = profile_flux_norm(w);
    };

    double uc = 0.0, wc = 0.0, fc = 0.0;
    run(coarse_mesh, &uc, &wc, &fc);
    out.lhs_coarse = wc + fc;
    run(fine_mesh, &out.u_norm, &out.w_norm, &out.flux_norm);
    out.lhs_fine = out.w_norm + out.flux_norm;

    out.converged = std::abs(out.lhs_fine - out.lhs_coarse) <= 0.05 * std::abs(out.lhs_fine);
    ImpedanceBoundResult ib = impedance_bound(wave.k, wave.theta, wave.gamma, lambda, R,
                                              profile.f_minus, profile.lipschitz_L);
    if (!ib.valid) return out;
    out.Ctilde = std::sqrt(ib.Ctilde2);
    out.ratio = out.lhs_fine / (out.Ctilde * out.u_norm);
    out.pass = out.converged && out.ratio <= 1.0;
    return out;
}

ConvergenceStudy convergence_study(const GratingProfile& profile, double R,
                                   const IncidentWave& wave, const BoundaryModel& bc, double h0,
                                   int levels, int order, int N) {
    if (levels < 2) throw std::invalid_argument("convergence_study: need at least 2 levels");
    const bool two_sided = std::holds_alternative<TransmissionBC>(bc);
    TruncatedDomain domain =
        make_domain(profile, R, two_sided ? DomainKind::TwoSided : DomainKind::OneSided);

    std::vector<std::shared_ptr<const PeriodicMesh>> meshes;
    meshes.push_back(std::make_shared<PeriodicMesh>(generate_mesh(domain, h0)));
    for (int l = 1; l < levels; ++l)
        meshes.push_back(std::make_shared<PeriodicMesh>(refine(*meshes.back())));

    std::vector<DiscreteField> solutions;
    for (const auto& mesh : meshes) {
        auto space = make_fe_space(mesh, order);
        AssembledSystem sys = std::visit(
            [&](const auto& model) -> AssembledSystem {
                using T = std::decay_t<decltype(model)>;
                if constexpr (std::is_same_v<T, DirichletBC>)
                    return assemble_dirichlet(space, wave, N);
                else if constexpr (std::is_same_v<T, ImpedanceBC>)
                    return assemble_impedance(space, wave, model.lambda, N);
                else
                    return assemble_transmission(space, wave, model.k_minus, model.lambda, N);
            },
            bc);
        solutions.push_back(solve(sys));
    }

    ConvergenceStudy study;
    study.against_oracle = profile.is_flat() && !two_sided;
    const double c = profile.gamma_max;

    PhysicalField exact;
    PhysicalGradient exact_grad;
    if (study.against_oracle) {
        ManufacturedField f;
        if (std::holds_alternative<DirichletBC>(bc)) {
            f = flat_dirichlet_oracle(wave, c).field;
        } else {
            f = flat_impedance_oracle(wave, std::get<ImpedanceBC>(bc).lambda, c).field;
        }
        exact = f.value;
        exact_grad = f.gradient;
    }

    int n_measured = study.against_oracle ? levels : levels - 1;
    for (int l = 0; l < n_measured; ++l) {
        study.hs.push_back(meshes[l]->h);
        FieldError err;
        if (study.against_oracle) {
            err = field_error(solutions[l], exact, &exact_grad, 10);
        } else {
            const DiscreteField& fine = solutions.back();
            PointLocator loc(*meshes.back());
            PhysicalField ref = [&](double x, double y) { return eval_physical(fine, loc, x, y); };
            err = field_error(solutions[l], ref, nullptr, 6);
        }
        study.l2_errors.push_back(err.rel_l2());
        study.energy_errors.push_back(err.ref_h1_semi > 0 ? err.abs_h1_semi / err.ref_h1_semi
                                                          : err.abs_h1_semi);
    }

    for (size_t l = 1; l < study.l2_errors.size(); ++l)
        if (study.l2_errors[l] > study.l2_errors[l - 1]) study.monotone = false;

    auto slope = [&](const std::vector<double>& errs) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = static_cast<int>(errs.size());
        for (int i = 0; i < n; ++i) {
            double x = std::log(study.hs[i]);
            double y = std::log(std::max(errs[i], 1e-300));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    study.l2_slope = slope(study.l2_errors);
    study.energy_slope = slope(study.energy_errors);
    return study;
}

} // namespace grating
