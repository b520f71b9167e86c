#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "grating/dtn.hpp"
#include "grating/geometry.hpp"
#include "grating/mesh.hpp"

namespace grating {

/// Lagrange space (order 1 or 2) over a periodic mesh. Nodes on x1 = 2pi are
/// identified with their x1 = 0 partners, so the unknowns are coefficients of
/// the 2pi-periodic Bloch factor and the quasiperiodic phase lives entirely
/// in the operator.
struct FeSpace {
    std::shared_ptr<const PeriodicMesh> mesh;
    int order = 2;
    int n_nodes = 0;
    std::vector<std::array<int, 6>> element_nodes; // [v0 v1 v2 e01 e12 e20], -1 unused
    std::vector<std::array<double, 2>> node_pos;

    struct TraceEdge {
        double a, b;            // x1-interval of the edge
        std::array<int, 3> nodes; // endpoint, endpoint, midpoint (-1 for order 1)
        int tri;
    };
    std::vector<TraceEdge> top_trace;    // on x2 = +R, ordered, covers [0, 2pi]
    std::vector<TraceEdge> bottom_trace; // on x2 = -R (two-sided meshes)

    struct ProfileEdge {
        std::array<int, 3> nodes;
        int tri; // upper-side triangle
        std::array<double, 2> p0, p1;
        double len;
        std::array<double, 2> normal; // unit, pointing up
    };
    std::vector<ProfileEdge> profile_edges;
    std::vector<int> profile_nodes; // unique, sorted

    int dofs_per_element() const { return order == 1 ? 3 : 6; }
};

std::shared_ptr<const FeSpace> make_fe_space(std::shared_ptr<const PeriodicMesh> mesh, int order);

/// Coefficients of the periodic Bloch factor: the physical field is
/// u(x) = e^{i q x1} * utilde(x) with q the quasimomentum.
struct DiscreteField {
    std::shared_ptr<const FeSpace> space;
    Eigen::VectorXcd values; // one per node; constrained nodes carry explicit zeros
    double quasimomentum = 0.0;
};

/// Nodal interpolation of a periodic-factor function.
DiscreteField interpolate(std::shared_ptr<const FeSpace> space,
                          const std::function<std::complex<double>(double, double)>& periodic_factor,
                          double quasimomentum);

/// Value / physical gradient of the Bloch factor inside one element at
/// barycentric-like reference coordinates.
std::complex<double> eval_factor(const DiscreteField& f, int tri, double xi, double eta);
Eigen::Vector2cd eval_factor_gradient(const DiscreteField& f, int tri, double xi, double eta);

/// Point evaluation of the physical field (locator-based; throws if outside).
std::complex<double> eval_physical(const DiscreteField& f, const PointLocator& loc, double x,
                                   double y);

struct SystemMeta {
    enum class Kind { Dirichlet, Impedance, Transmission, Auxiliary };
    Kind kind = Kind::Dirichlet;
    IncidentWave wave{};
    int N = 0;
    double R = 0.0;
    double lambda = 0.0;
    double k_minus = 0.0;
    double alpha_op = 0.0; // operator quasimomentum (alpha, or -alpha for the auxiliary problem)
    bool wood = false;
};

struct AssembledSystem {
    Eigen::SparseMatrix<std::complex<double>> A; // free dofs only
    Eigen::VectorXcd b;
    std::vector<int> free_of_node; // -1 for constrained nodes
    std::vector<int> node_of_free;
    std::shared_ptr<const FeSpace> space;
    SystemMeta meta;
};

/// Galerkin system for the Dirichlet problem: Bloch-shifted Helmholtz form,
/// modal DtN block on the top trace, homogeneous essential values on the
/// profile, incident-wave data entering only through the top boundary
/// functional.
AssembledSystem assemble_dirichlet(std::shared_ptr<const FeSpace> space, const IncidentWave& wave,
                                   int N);

/// As Dirichlet but with no essential constraints and the absorbing boundary
/// mass -i lambda <u, v> on the profile.
AssembledSystem assemble_impedance(std::shared_ptr<const FeSpace> space, const IncidentWave& wave,
                                   double lambda, int N);

/// Two-sided weighted form: coefficients (1, k^2) above the profile and
/// (lambda, lambda k_minus^2) below, DtN blocks on both horizontal traces.
/// The interface conditions are natural in this weighted form.
AssembledSystem assemble_transmission(std::shared_ptr<const FeSpace> space,
                                      const IncidentWave& wave, double k_minus, double lambda,
                                      int N);

/// Adjoint-type auxiliary problem at quasimomentum -alpha with conjugated
/// volume data: Delta w + k^2 w = conj(u), w = 0 on the profile, hatted DtN on
/// the top trace.
AssembledSystem assemble_auxiliary(std::shared_ptr<const FeSpace> space, const IncidentWave& wave,
                                   const DiscreteField& source, int N);

struct SolveInfo {
    double residual = 0.0; // ||Ax-b|| / ||b||
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Direct sparse LU solve; relative residual must come out <= 1e-10 for a
/// nonzero right-hand side or the solve is reported as failed.
DiscreteField solve(const AssembledSystem& system, SolveInfo* info = nullptr);

/// Max-norm of the Galerkin residual A x - b for a given field (free rows).
double galerkin_residual(const AssembledSystem& system, const DiscreteField& field);

/// Dense trace-to-mode transform on the given horizontal trace: row n holds
/// \int phi_j(x1) e^{-i n x1} dx1 for the trace basis functions, n = -N..N.
/// Columns are indexed by `trace_nodes`.
struct TraceTransform {
    Eigen::MatrixXcd B;
    std::vector<int> trace_nodes;
};

TraceTransform trace_transform(const FeSpace& space, const std::vector<FeSpace::TraceEdge>& trace,
                               int N);

} // namespace grating
