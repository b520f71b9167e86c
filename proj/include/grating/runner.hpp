#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "grating/bounds.hpp"
#include "grating/fem.hpp"
#include "grating/postprocess.hpp"
#include "grating/verify.hpp"

namespace grating {

/// Batch configuration: flat `key = value` file plus command-line overrides.
struct RunConfig {
    std::string profile = "flat(0)";
    int n_samples = 0; // 0 = auto: 8 for flat shapes, else ~2 knots per mesh_h
    std::string bc = "dirichlet"; // dirichlet | impedance | transmission
    std::vector<double> k = {1.0};
    std::vector<double> theta_deg = {0.0};
    std::complex<double> gamma{1.0, 0.0};
    double lambda = 1.0;
    double k_minus = 2.0;
    std::optional<double> R;       // default depends on the boundary model
    std::optional<double> f_minus; // defaults from the profile
    std::optional<double> f_plus;
    double mesh_h = 0.1;
    int fe_order = 2;
    int dtn_N = -1; // -1 = auto: ceil(max k) + 10
    int refinements = 1;
    unsigned seed = 7261u;
    std::string output; // CSV path; empty = stdout
};

RunConfig parse_config_file(const std::string& path);
/// Applies one `key=value` override; throws on unknown keys or bad values.
void apply_config_override(RunConfig& config, const std::string& key, const std::string& value);
void validate_config(const RunConfig& config);

/// Everything one (k, theta) solve produces, ready for CSV emission.
struct SolveRecord {
    double k = 0.0, theta_deg = 0.0;
    std::string status = "ok"; // or the solver error text
    bool wood = false;
    bool hyp_pass = false;
    int tcase = 0;
    double solver_residual = 0.0;
    double wall_ms = 0.0;
    // scattered (and transmitted) coefficients and efficiencies for the
    // fixed echo window of orders -4..4
    static constexpr int echo_orders = 4;
    std::array<std::complex<double>, 9> refl{};
    std::array<std::complex<double>, 9> trans{};
    std::array<double, 9> eff_up{};
    std::array<double, 9> eff_down{};
    double eff_sum = 0.0;
    double balance_defect = 0.0;
    double balance_defect_sampled = 0.0;
    double dissipation_residual = 0.0; // impedance identity, relative
    double norm = 0.0, coarse_norm = 0.0;
    StabilityReport stability;
};

/// Geometry shared by every sweep point: profile, domain, refinement chain.
struct GeometryBundle {
    GratingProfile profile;
    TruncatedDomain domain;
    std::vector<std::shared_ptr<const PeriodicMesh>> meshes; // coarse -> fine
};

GeometryBundle prepare_geometry(const RunConfig& config);
BoundaryModel boundary_model(const RunConfig& config);
int resolve_dtn_order(const RunConfig& config);

SolveRecord run_point(const RunConfig& config, const GeometryBundle& geom, double k,
                      double theta_deg, int N);

/// Cartesian (k, theta) sweep over a worker pool; rows come back in input order.
std::vector<SolveRecord> run_sweep(const RunConfig& config);

void write_solve_csv(std::ostream& os, const RunConfig& config, const std::vector<SolveRecord>& rows);

/// Constants-only table (no solving).
void write_bounds_csv(std::ostream& os, const RunConfig& config);

/// Verification suite driver. `suite` is one of oracles | identities |
/// inequalities | all. Emits one CSV row per check and returns the number of
/// failed hard checks. `inject_failure` perturbs one oracle as a negative
/// control.
int run_verify(std::ostream& os, const RunConfig& config, const std::string& suite,
               bool inject_failure = false);

} // namespace grating
