#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace grating {

/// 2pi-periodic grating interface stored as a closed polyline over [0, 2pi].
/// gamma_min/gamma_max are the extreme heights of f itself and lipschitz_L is
/// the maximum chord slope of the stored knots. For a sampled closed form
/// that is a lower bound on the true Lipschitz constant; callers that know
/// better may override it.
struct GratingProfile {
    struct Knot {
        double x;
        double f;
    };
    std::vector<Knot> knots; // ordered, knots.front().x == 0, knots.back().x == 2*pi
    double f_minus = 0.0;    // lower reference height, < gamma_min
    double f_plus = 0.0;     // upper reference height (transmission), > gamma_max
    double gamma_max = 0.0;
    double gamma_min = 0.0;
    double lipschitz_L = 0.0;

    double value(double x) const; // piecewise-linear interpolation, periodic
    bool is_flat() const { return gamma_max == gamma_min; }
};

/// Plane wave gamma * exp(i alpha x1 - i beta x2) incident from above,
/// alpha = k sin(theta), beta = k cos(theta).
struct IncidentWave {
    double k;
    double theta; // radians, in (-pi/2, pi/2)
    std::complex<double> gamma;
    double alpha;
    double beta;
};

IncidentWave make_incident_wave(double k, double theta, std::complex<double> gamma);

struct DirichletBC {};
struct ImpedanceBC {
    double lambda; // surface impedance, > 0
};
struct TransmissionBC {
    double k_minus; // wavenumber below the interface, != k
    double lambda;  // flux-jump weight, > 0
};

using BoundaryModel = std::variant<DirichletBC, ImpedanceBC, TransmissionBC>;

enum class DomainKind { OneSided, TwoSided };

/// Truncated periodic cell: one-sided (profile up to x2 = R) or two-sided
/// (strip -R < x2 < R split by the profile).
struct TruncatedDomain {
    GratingProfile profile;
    double R;
    DomainKind kind = DomainKind::OneSided;
};

TruncatedDomain make_domain(GratingProfile profile, double R, DomainKind kind);

/// Named profile shapes accepted by the config grammar:
///   flat(c) | sine(a) | saw(a) | file(<path>)
/// saw(a) is the symmetric triangle wave of amplitude a (slopes +-2a/pi).
struct ProfileSpec {
    enum class Kind { Flat, Sine, Saw, File, Custom } kind = Kind::Flat;
    double parameter = 0.0;
    std::string path;
    std::function<double(double)> custom; // used when kind == Custom
};

ProfileSpec parse_profile_spec(const std::string& text);

/// Samples the profile at n_samples uniform knots (plus the closing knot) and
/// derives gamma_min/gamma_max/L from the polyline. f_minus/f_plus default to
/// gamma_min - 1.5 and gamma_max + 1.5. Rejects non-periodic shapes,
/// |f(0) - f(2pi)| > 1e-12.
GratingProfile build_profile(const ProfileSpec& spec, int n_samples,
                             std::optional<double> f_minus = std::nullopt,
                             std::optional<double> f_plus = std::nullopt);

/// One stability-bound hypothesis with its numeric margin (> 0 means satisfied).
struct HypothesisCheck {
    std::string name;
    bool pass;
    double margin;
};

struct HypothesisReport {
    std::vector<HypothesisCheck> checks;
    /// For transmission: 1 or 2 when one of the parameter cases applies, 0 otherwise.
    int transmission_case = 0;
    bool all_pass() const;
};

/// Evaluates the geometric and parameter hypotheses under which the stability
/// bounds hold. Failures never block solving, only bound certification.
/// k_plus is the wavenumber above the interface; it is only consulted for the
/// transmission parameter-case classification.
HypothesisReport validate_hypotheses(const TruncatedDomain& domain, const BoundaryModel& bc,
                                     double k_plus = std::numeric_limits<double>::quiet_NaN());

} // namespace grating
