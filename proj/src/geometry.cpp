#include "grating/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace grating {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
}

double GratingProfile::value(double x) const {
    double t = std::fmod(x, kTwoPi);
    if (t < 0) t += kTwoPi;
    auto it = std::upper_bound(knots.begin(), knots.end(), t,
                               [](double v, const Knot& kn) { return v < kn.x; });
    if (it == knots.begin()) return knots.front().f;
    if (it == knots.end()) return knots.back().f;
    const Knot& b = *it;
    const Knot& a = *(it - 1);
    double s = (t - a.x) / (b.x - a.x);
    return a.f + s * (b.f - a.f);
}

IncidentWave make_incident_wave(double k, double theta, std::complex<double> gamma) {
    if (!(k > 0.0)) throw std::invalid_argument("incident wave: k must be positive");
    if (!(theta > -M_PI / 2 && theta < M_PI / 2))
        throw std::invalid_argument("incident wave: theta must lie in (-pi/2, pi/2)");
    IncidentWave w;
    w.k = k;
    w.theta = theta;
    w.gamma = gamma;
    w.alpha = k * std::sin(theta);
    w.beta = k * std::cos(theta);
    return w;
}

TruncatedDomain make_domain(GratingProfile profile, double R, DomainKind kind) {
    if (!(R > profile.gamma_max))
        throw std::invalid_argument("domain: R must exceed the profile top");
    if (kind == DomainKind::TwoSided) {
        if (!(-R < profile.f_minus && profile.f_minus <= profile.gamma_min))
            throw std::invalid_argument("domain: need -R < f_minus <= min f");
        if (!(profile.gamma_max <= profile.f_plus && profile.f_plus < R))
            throw std::invalid_argument("domain: need max f <= f_plus < R");
    }
    return TruncatedDomain{std::move(profile), R, kind};
}

ProfileSpec parse_profile_spec(const std::string& text) {
    auto lparen = text.find('(');
    auto rparen = text.rfind(')');
    if (lparen == std::string::npos || rparen == std::string::npos || rparen < lparen)
        throw std::invalid_argument("profile spec: expected name(arg), got '" + text + "'");
    std::string name = text.substr(0, lparen);
    std::string arg = text.substr(lparen + 1, rparen - lparen - 1);
    ProfileSpec spec;
    if (name == "flat") {
        spec.kind = ProfileSpec::Kind::Flat;
        spec.parameter = std::stod(arg);
    } else if (name == "sine") {
        spec.kind = ProfileSpec::Kind::Sine;
        spec.parameter = std::stod(arg);
    } else if (name == "saw") {
        spec.kind = ProfileSpec::Kind::Saw;
        spec.parameter = std::stod(arg);
    } else if (name == "file") {
        spec.kind = ProfileSpec::Kind::File;
        spec.path = arg;
    } else {
        throw std::invalid_argument("profile spec: unknown shape '" + name + "'");
    }
    return spec;
}

namespace {

double saw_wave(double a, double x) {
    // triangle wave: 0 at x=0, +a at pi/2, -a at 3pi/2
    double t = std::fmod(x, kTwoPi);
    if (t < 0) t += kTwoPi;
    if (t <= M_PI / 2) return a * (2.0 / M_PI) * t;
    if (t <= 3 * M_PI / 2) return a * (2.0 - (2.0 / M_PI) * t);
    return a * ((2.0 / M_PI) * t - 4.0);
}

std::vector<GratingProfile::Knot> read_profile_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("profile file: cannot open '" + path + "'");
    std::vector<GratingProfile::Knot> knots;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        double x, f;
        if (ls >> x >> f) knots.push_back({x, f});
    }
    if (knots.size() < 2) throw std::invalid_argument("profile file: need at least two rows");
    std::sort(knots.begin(), knots.end(),
              [](const auto& a, const auto& b) { return a.x < b.x; });
    return knots;
}

} // namespace

GratingProfile build_profile(const ProfileSpec& spec, int n_samples,
                             std::optional<double> f_minus, std::optional<double> f_plus) {
    if (n_samples < 4) throw std::invalid_argument("build_profile: n_samples must be >= 4");

    GratingProfile p;
    if (spec.kind == ProfileSpec::Kind::File) {
        p.knots = read_profile_file(spec.path);
        if (std::abs(p.knots.front().x) > 1e-12 || std::abs(p.knots.back().x - kTwoPi) > 1e-12)
            throw std::invalid_argument("profile file: knots must span [0, 2pi]");
    } else {
        std::function<double(double)> f;
        switch (spec.kind) {
        case ProfileSpec::Kind::Flat:
            f = [c = spec.parameter](double) { return c; };
            break;
        case ProfileSpec::Kind::Sine:
            f = [a = spec.parameter](double x) { return a * std::sin(x); };
            break;
        case ProfileSpec::Kind::Saw:
            f = [a = spec.parameter](double x) { return saw_wave(a, x); };
            break;
        case ProfileSpec::Kind::Custom:
            f = spec.custom;
            break;
        default:
            break;
        }
        p.knots.resize(n_samples + 1);
        for (int i = 0; i <= n_samples; ++i) {
            double x = kTwoPi * i / n_samples;
            p.knots[i] = {x, f(x)};
        }
    }

    if (std::abs(p.knots.front().f - p.knots.back().f) > 1e-12)
        throw std::invalid_argument("build_profile: f(0) != f(2pi), profile is not periodic");
    p.knots.back().f = p.knots.front().f; // snap so mesh fibers pair exactly
    p.knots.front().x = 0.0;
    p.knots.back().x = kTwoPi;

    p.gamma_max = p.knots.front().f;
    p.gamma_min = p.knots.front().f;
    p.lipschitz_L = 0.0;
    for (size_t i = 0; i < p.knots.size(); ++i) {
        p.gamma_max = std::max(p.gamma_max, p.knots[i].f);
        p.gamma_min = std::min(p.gamma_min, p.knots[i].f);
        if (i > 0) {
            double dx = p.knots[i].x - p.knots[i - 1].x;
            if (dx <= 0.0) throw std::invalid_argument("build_profile: knots must be strictly increasing in x");
            p.lipschitz_L = std::max(p.lipschitz_L, std::abs(p.knots[i].f - p.knots[i - 1].f) / dx);
        }
    }
    p.f_minus = f_minus.value_or(p.gamma_min - 1.5);
    p.f_plus = f_plus.value_or(p.gamma_max + 1.5);
    if (!(p.f_minus < p.gamma_min))
        throw std::invalid_argument("build_profile: f_minus must lie below min f");
    return p;
}

bool HypothesisReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

HypothesisReport validate_hypotheses(const TruncatedDomain& domain, const BoundaryModel& bc,
                                     double k_plus) {
    HypothesisReport report;
    const GratingProfile& p = domain.profile;
    auto add = [&report](std::string name, double margin) {
        report.checks.push_back({std::move(name), margin > 0.0, margin});
    };

    add("R > max f", domain.R - p.gamma_max);

    if (std::holds_alternative<DirichletBC>(bc)) {
        add("f_minus + 1 < min f", p.gamma_min - (p.f_minus + 1.0));
    } else if (const auto* imp = std::get_if<ImpedanceBC>(&bc)) {
        add("R - 1 > max f", (domain.R - 1.0) - p.gamma_max);
        add("f_minus + 1 < min f", p.gamma_min - (p.f_minus + 1.0));
        add("lambda > 0", imp->lambda);
    } else if (const auto* tr = std::get_if<TransmissionBC>(&bc)) {
        add("min f - f_minus > 1", (p.gamma_min - p.f_minus) - 1.0);
        add("max f - f_plus < -1", -1.0 - (p.gamma_max - p.f_plus));
        add("lambda > 0", tr->lambda);
        if (std::isfinite(k_plus)) {
            const double kp2 = k_plus * k_plus;
            const double lkm2 = tr->lambda * tr->k_minus * tr->k_minus;
            const bool case1 = tr->lambda >= 1.0 && kp2 > lkm2;
            const bool case2 = tr->lambda <= 1.0 && kp2 < lkm2;
            report.transmission_case = case1 ? 1 : (case2 ? 2 : 0);
            add("parameter case (i) or (ii)", case1 ? kp2 - lkm2 : (case2 ? lkm2 - kp2 : -std::abs(kp2 - lkm2)));
        }
    }
    return report;
}

} // namespace grating
