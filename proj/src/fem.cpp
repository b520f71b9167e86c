#include "grating/fem.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "grating/quadrature.hpp"

namespace grating {

using cd = std::complex<double>;

namespace {

void shape_values(int order, double xi, double eta, double* v) {
    const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
    if (order == 1) {
        v[0] = l0;
        v[1] = l1;
        v[2] = l2;
        return;
    }
    v[0] = l0 * (2.0 * l0 - 1.0);
    v[1] = l1 * (2.0 * l1 - 1.0);
    v[2] = l2 * (2.0 * l2 - 1.0);
    v[3] = 4.0 * l0 * l1;
    v[4] = 4.0 * l1 * l2;
    v[5] = 4.0 * l2 * l0;
}

void shape_ref_grads(int order, double xi, double eta, double (*g)[2]) {
    const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
    if (order == 1) {
        g[0][0] = -1.0; g[0][1] = -1.0;
        g[1][0] = 1.0;  g[1][1] = 0.0;
        g[2][0] = 0.0;  g[2][1] = 1.0;
        return;
    }
    // d l0 = (-1,-1), d l1 = (1,0), d l2 = (0,1)
    g[0][0] = -(4.0 * l0 - 1.0); g[0][1] = -(4.0 * l0 - 1.0);
    g[1][0] = 4.0 * l1 - 1.0;    g[1][1] = 0.0;
    g[2][0] = 0.0;               g[2][1] = 4.0 * l2 - 1.0;
    g[3][0] = 4.0 * (l0 - l1);   g[3][1] = -4.0 * l1;
    g[4][0] = 4.0 * l2;          g[4][1] = 4.0 * l1;
    g[5][0] = -4.0 * l2;         g[5][1] = 4.0 * (l0 - l2);
}

/// Trace shape functions along an edge, as coefficients in {1, t, t^2}.
void trace_poly(int order, double coef[3][3]) {
    if (order == 1) {
        double c[3][3] = {{1, -1, 0}, {0, 1, 0}, {0, 0, 0}};
        std::copy(&c[0][0], &c[0][0] + 9, &coef[0][0]);
    } else {
        double c[3][3] = {{1, -3, 2}, {0, -1, 2}, {0, 4, -4}}; // v0, v1, midpoint
        std::copy(&c[0][0], &c[0][0] + 9, &coef[0][0]);
    }
}

struct ElementGeometry {
    Eigen::Matrix2d inv_jt;
    double abs_det;
    std::array<double, 2> p0;
    Eigen::Matrix2d jac;
};

ElementGeometry element_geometry(const PeriodicMesh& mesh, int tri) {
    const auto& t = mesh.triangles[tri];
    const auto& a = mesh.vertices[t[0]];
    const auto& b = mesh.vertices[t[1]];
    const auto& c = mesh.vertices[t[2]];
    Eigen::Matrix2d J;
    J << b[0] - a[0], c[0] - a[0], b[1] - a[1], c[1] - a[1];
    ElementGeometry g;
    g.jac = J;
    g.abs_det = std::abs(J.determinant());
    g.inv_jt = J.inverse().transpose();
    g.p0 = a;
    return g;
}

int local_edge_index(int i, int j) {
    // local edges (0,1)->3, (1,2)->4, (2,0)->5
    int s = i + j;
    if (s == 1) return 3;
    if (s == 3) return 4;
    return 5;
}

} // namespace

std::shared_ptr<const FeSpace> make_fe_space(std::shared_ptr<const PeriodicMesh> mesh, int order) {
    if (order != 1 && order != 2) throw std::invalid_argument("fe space: order must be 1 or 2");
    auto space = std::make_shared<FeSpace>();
    space->mesh = mesh;
    space->order = order;
    const PeriodicMesh& m = *mesh;

    std::map<int, int> right_to_left(m.periodic_pairs.begin(), m.periodic_pairs.end());
    auto canon = [&](int v) {
        auto it = right_to_left.find(v);
        return it == right_to_left.end() ? v : it->second;
    };

    std::vector<int> vertex_node(m.vertices.size(), -1);
    int next = 0;
    for (size_t v = 0; v < m.vertices.size(); ++v) {
        if (canon(static_cast<int>(v)) == static_cast<int>(v)) {
            vertex_node[v] = next++;
            space->node_pos.push_back(m.vertices[v]);
        }
    }
    for (size_t v = 0; v < m.vertices.size(); ++v)
        if (vertex_node[v] < 0) vertex_node[v] = vertex_node[canon(static_cast<int>(v))];

    std::map<std::pair<int, int>, int> edge_node;
    auto edge_key = [&](int a, int b) -> std::pair<int, int> {
        int ca = canon(a), cb = canon(b);
        return std::minmax(ca, cb);
    };

    space->element_nodes.resize(m.triangles.size());
    for (size_t t = 0; t < m.triangles.size(); ++t) {
        const auto& tri = m.triangles[t];
        auto& en = space->element_nodes[t];
        en = {vertex_node[tri[0]], vertex_node[tri[1]], vertex_node[tri[2]], -1, -1, -1};
        if (order == 2) {
            for (int i = 0; i < 3; ++i) {
                int j = (i + 1) % 3;
                std::pair<int, int> key = edge_key(tri[i], tri[j]);
                auto it = edge_node.find(key);
                int id;
                if (it == edge_node.end()) {
                    id = next++;
                    edge_node.emplace(key, id);
                    const auto& pa = m.vertices[tri[i]];
                    const auto& pb = m.vertices[tri[j]];
                    space->node_pos.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])});
                } else {
                    id = it->second;
                }
                en[local_edge_index(i, j)] = id;
            }
        }
    }
    space->n_nodes = next;

    auto mid_node = [&](int v0, int v1) -> int {
        if (order == 1) return -1;
        return edge_node.at(edge_key(v0, v1));
    };

    std::set<int> on_profile;
    for (const auto& e : m.tagged_edges) {
        switch (e.tag) {
        case BoundaryTag::GammaRPlus:
        case BoundaryTag::GammaRMinus: {
            FeSpace::TraceEdge te;
            te.a = m.vertices[e.v0][0];
            te.b = m.vertices[e.v1][0];
            te.nodes = {vertex_node[e.v0], vertex_node[e.v1], mid_node(e.v0, e.v1)};
            te.tri = e.tri;
            (e.tag == BoundaryTag::GammaRPlus ? space->top_trace : space->bottom_trace)
                .push_back(te);
            break;
        }
        case BoundaryTag::GammaProfile: {
            FeSpace::ProfileEdge pe;
            pe.nodes = {vertex_node[e.v0], vertex_node[e.v1], mid_node(e.v0, e.v1)};
            pe.tri = e.tri;
            pe.p0 = m.vertices[e.v0];
            pe.p1 = m.vertices[e.v1];
            double dx = pe.p1[0] - pe.p0[0], dy = pe.p1[1] - pe.p0[1];
            pe.len = std::hypot(dx, dy);
            pe.normal = {-dy / pe.len, dx / pe.len};
            space->profile_edges.push_back(pe);
            for (int n : pe.nodes)
                if (n >= 0) on_profile.insert(n);
            break;
        }
        default:
            break;
        }
    }
    auto by_a = [](const FeSpace::TraceEdge& x, const FeSpace::TraceEdge& y) { return x.a < y.a; };
    std::sort(space->top_trace.begin(), space->top_trace.end(), by_a);
    std::sort(space->bottom_trace.begin(), space->bottom_trace.end(), by_a);
    space->profile_nodes.assign(on_profile.begin(), on_profile.end());
    return space;
}

DiscreteField interpolate(std::shared_ptr<const FeSpace> space,
                          const std::function<cd(double, double)>& periodic_factor,
                          double quasimomentum) {
    DiscreteField f;
    f.space = space;
    f.quasimomentum = quasimomentum;
    f.values.resize(space->n_nodes);
    for (int n = 0; n < space->n_nodes; ++n)
        f.values[n] = periodic_factor(space->node_pos[n][0], space->node_pos[n][1]);
    return f;
}

cd eval_factor(const DiscreteField& f, int tri, double xi, double eta) {
    const FeSpace& sp = *f.space;
    double v[6];
    shape_values(sp.order, xi, eta, v);
    cd out = 0.0;
    const auto& en = sp.element_nodes[tri];
    for (int i = 0; i < sp.dofs_per_element(); ++i) out += f.values[en[i]] * v[i];
    return out;
}

Eigen::Vector2cd eval_factor_gradient(const DiscreteField& f, int tri, double xi, double eta) {
    const FeSpace& sp = *f.space;
    double g[6][2];
    shape_ref_grads(sp.order, xi, eta, g);
    ElementGeometry geo = element_geometry(*sp.mesh, tri);
    Eigen::Vector2cd out = Eigen::Vector2cd::Zero();
    const auto& en = sp.element_nodes[tri];
    for (int i = 0; i < sp.dofs_per_element(); ++i) {
        Eigen::Vector2d ref(g[i][0], g[i][1]);
        Eigen::Vector2d phys = geo.inv_jt * ref;
        out[0] += f.values[en[i]] * phys[0];
        out[1] += f.values[en[i]] * phys[1];
    }
    return out;
}

cd eval_physical(const DiscreteField& f, const PointLocator& loc, double x, double y) {
    std::array<double, 3> bary;
    int tri = loc.locate(x, y, bary);
    if (tri < 0) throw std::invalid_argument("eval_physical: point outside mesh");
    cd factor = eval_factor(f, tri, bary[1], bary[2]);
    return factor * std::exp(cd(0.0, f.quasimomentum * x));
}

TraceTransform trace_transform(const FeSpace& space, const std::vector<FeSpace::TraceEdge>& trace,
                               int N) {
    std::set<int> nodes;
    for (const auto& e : trace)
        for (int n : e.nodes)
            if (n >= 0) nodes.insert(n);
    TraceTransform tt;
    tt.trace_nodes.assign(nodes.begin(), nodes.end());
    std::map<int, int> col;
    for (size_t i = 0; i < tt.trace_nodes.size(); ++i) col[tt.trace_nodes[i]] = static_cast<int>(i);

    double coef[3][3];
    trace_poly(space.order, coef);
    const int n_shapes = space.order == 1 ? 2 : 3;

    tt.B = Eigen::MatrixXcd::Zero(2 * N + 1, static_cast<int>(tt.trace_nodes.size()));
    for (const auto& e : trace) {
        for (int n = -N; n <= N; ++n) {
            auto mom = oscillatory_moments(e.a, e.b, n, 2);
            for (int s = 0; s < n_shapes; ++s) {
                cd val = coef[s][0] * mom[0] + coef[s][1] * mom[1] + coef[s][2] * mom[2];
                tt.B(n + N, col.at(e.nodes[s])) += val;
            }
        }
    }
    return tt;
}

namespace {

struct AssemblyRecipe {
    double alpha_op;
    double a_upper = 1.0, a_lower = 1.0;
    double k2_upper, k2_lower = 0.0;
    bool dirichlet_profile = false;
    double impedance_lambda = 0.0; // adds -i lambda <u,v> on the profile when > 0
    // DtN blocks: (trace, modal diagonal i*beta-style factors, weight in the form)
    struct DtnBlock {
        const std::vector<FeSpace::TraceEdge>* trace;
        std::vector<cd> diag; // i beta_n style factors, sign included
        double weight;        // -1 for -<Tu,v> on top, +lambda for +lambda<T-u,v> below
    };
    std::vector<DtnBlock> dtn;
    // right-hand sides
    cd top_functional_coefficient = 0.0;    // b_i -= c * \int phi_i dx1 on the top trace
    const DiscreteField* volume_source_conj = nullptr; // b_i -= \int conj(src) phi_i dx
};

AssembledSystem assemble_core(std::shared_ptr<const FeSpace> space, const AssemblyRecipe& recipe,
                              SystemMeta meta, int N) {
    const FeSpace& sp = *space;
    const PeriodicMesh& mesh = *sp.mesh;

    AssembledSystem sys;
    sys.space = space;
    sys.meta = meta;
    sys.free_of_node.assign(sp.n_nodes, 0);
    if (recipe.dirichlet_profile)
        for (int n : sp.profile_nodes) sys.free_of_node[n] = -1;
    int n_free = 0;
    for (int n = 0; n < sp.n_nodes; ++n) {
        if (sys.free_of_node[n] == 0) {
            sys.free_of_node[n] = n_free++;
            sys.node_of_free.push_back(n);
        }
    }

    std::vector<Eigen::Triplet<cd>> trip;
    trip.reserve(mesh.triangles.size() * 36);
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n_free);

    TriangleRule rule = triangle_rule_for_degree(4);
    const int ndof = sp.dofs_per_element();
    const cd I(0.0, 1.0);
    const double q = recipe.alpha_op;

    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        ElementGeometry geo = element_geometry(mesh, static_cast<int>(t));
        const bool lower = mesh.region[t] == RegionTag::Lower;
        const double a_coef = lower ? recipe.a_lower : recipe.a_upper;
        const double k2 = lower ? recipe.k2_lower : recipe.k2_upper;

        Eigen::MatrixXcd ke = Eigen::MatrixXcd::Zero(ndof, ndof);
        Eigen::VectorXcd fe = Eigen::VectorXcd::Zero(ndof);
        for (size_t qp = 0; qp < rule.points.size(); ++qp) {
            double xi = rule.points[qp][0], eta = rule.points[qp][1];
            double w = rule.weights[qp] * geo.abs_det;
            double v[6], g[6][2];
            shape_values(sp.order, xi, eta, v);
            shape_ref_grads(sp.order, xi, eta, g);
            Eigen::Vector2d phys[6];
            for (int i = 0; i < ndof; ++i)
                phys[i] = geo.inv_jt * Eigen::Vector2d(g[i][0], g[i][1]);
            // (grad + i q e1) u . conj((grad + i q e1) v) - k^2 u conj(v)
            for (int i = 0; i < ndof; ++i) {
                Eigen::Vector2cd gi(phys[i][0] + I * q * v[i], phys[i][1]);
                for (int j = 0; j < ndof; ++j) {
                    Eigen::Vector2cd gj(phys[j][0] + I * q * v[j], phys[j][1]);
                    cd val = gj[0] * std::conj(gi[0]) + gj[1] * std::conj(gi[1]) -
                             k2 * v[j] * v[i];
                    ke(i, j) += w * a_coef * val;
                }
            }
            if (recipe.volume_source_conj) {
                cd src = eval_factor(*recipe.volume_source_conj, static_cast<int>(t), xi, eta);
                for (int i = 0; i < ndof; ++i) fe[i] -= w * std::conj(src) * v[i];
            }
        }

        const auto& en = sp.element_nodes[t];
        for (int i = 0; i < ndof; ++i) {
            int fi = sys.free_of_node[en[i]];
            if (fi < 0) continue;
            b[fi] += fe[i];
            for (int j = 0; j < ndof; ++j) {
                int fj = sys.free_of_node[en[j]];
                if (fj < 0) continue; // essential values are zero, nothing moves to the rhs
                trip.emplace_back(fi, fj, ke(i, j));
            }
        }
    }

    if (recipe.impedance_lambda > 0.0) {
        SegmentRule srule = segment_rule_for_degree(4);
        double coef[3][3];
        trace_poly(sp.order, coef);
        const int n_shapes = sp.order == 1 ? 2 : 3;
        for (const auto& pe : sp.profile_edges) {
            Eigen::MatrixXd me = Eigen::MatrixXd::Zero(n_shapes, n_shapes);
            for (size_t qp = 0; qp < srule.points.size(); ++qp) {
                double tq = srule.points[qp];
                double w = srule.weights[qp] * pe.len;
                double sv[3];
                for (int s = 0; s < n_shapes; ++s)
                    sv[s] = coef[s][0] + coef[s][1] * tq + coef[s][2] * tq * tq;
                for (int i = 0; i < n_shapes; ++i)
                    for (int j = 0; j < n_shapes; ++j) me(i, j) += w * sv[i] * sv[j];
            }
            for (int i = 0; i < n_shapes; ++i) {
                int fi = sys.free_of_node[pe.nodes[i]];
                if (fi < 0) continue;
                for (int j = 0; j < n_shapes; ++j) {
                    int fj = sys.free_of_node[pe.nodes[j]];
                    if (fj < 0) continue;
                    trip.emplace_back(fi, fj, -I * recipe.impedance_lambda * me(i, j));
                }
            }
        }
    }

    for (const auto& block : recipe.dtn) {
        TraceTransform tt = trace_transform(sp, *block.trace, N);
        const int T = static_cast<int>(tt.trace_nodes.size());
        Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(T, T);
        // <T u, v> = (1/2pi) sum_n diag_n conj(B_{n,i}) B_{n,j}
        for (int r = 0; r < 2 * N + 1; ++r)
            D += (block.diag[r] / (2.0 * M_PI)) * (tt.B.row(r).adjoint() * tt.B.row(r));
        for (int i = 0; i < T; ++i) {
            int fi = sys.free_of_node[tt.trace_nodes[i]];
            if (fi < 0) continue;
            for (int j = 0; j < T; ++j) {
                int fj = sys.free_of_node[tt.trace_nodes[j]];
                if (fj < 0) continue;
                trip.emplace_back(fi, fj, block.weight * D(i, j));
            }
        }
    }

    if (recipe.top_functional_coefficient != cd(0.0, 0.0)) {
        if (sp.top_trace.empty())
            throw std::invalid_argument("assemble: mesh has no top trace for the incident data");
        TraceTransform tt = trace_transform(sp, sp.top_trace, 0);
        for (size_t i = 0; i < tt.trace_nodes.size(); ++i) {
            int fi = sys.free_of_node[tt.trace_nodes[i]];
            if (fi < 0) continue;
            b[fi] -= recipe.top_functional_coefficient * tt.B(0, static_cast<int>(i));
        }
    }

    sys.A.resize(n_free, n_free);
    sys.A.setFromTriplets(trip.begin(), trip.end());
    sys.b = std::move(b);
    if (!sys.b.allFinite()) throw std::runtime_error("assemble: right-hand side is not finite");
    return sys;
}

std::vector<cd> dtn_diag_i_beta(int N, double k, double alpha, DtnVariant variant) {
    auto diag = dtn_bilinear_entries(N, k, alpha, variant);
    for (auto& d : diag) d /= 2.0 * M_PI; // entries here carry the bare i beta_n factors
    return diag;
}

bool wood_flag(double k, double alpha, int N) {
    return make_mode_exponents(k, alpha, N).wood;
}

} // namespace

AssembledSystem assemble_dirichlet(std::shared_ptr<const FeSpace> space, const IncidentWave& wave,
                                   int N) {
    AssemblyRecipe r;
    r.alpha_op = wave.alpha;
    r.k2_upper = wave.k * wave.k;
    r.dirichlet_profile = true;
    r.dtn.push_back({&space->top_trace, dtn_diag_i_beta(N, wave.k, wave.alpha, DtnVariant::T), -1.0});
    r.top_functional_coefficient = incident_functional_coefficient(wave, space->mesh->R);

    SystemMeta meta;
    meta.kind = SystemMeta::Kind::Dirichlet;
    meta.wave = wave;
    meta.N = N;
    meta.R = space->mesh->R;
    meta.alpha_op = wave.alpha;
    meta.wood = wood_flag(wave.k, wave.alpha, N);
    return assemble_core(space, r, meta, N);
}

AssembledSystem assemble_impedance(std::shared_ptr<const FeSpace> space, const IncidentWave& wave,
                                   double lambda, int N) {
    if (!(lambda > 0.0)) throw std::invalid_argument("impedance: lambda must be positive");
    AssemblyRecipe r;
    r.alpha_op = wave.alpha;
    r.k2_upper = wave.k * wave.k;
    r.impedance_lambda = lambda;
    r.dtn.push_back({&space->top_trace, dtn_diag_i_beta(N, wave.k, wave.alpha, DtnVariant::T), -1.0});
    r.top_functional_coefficient = incident_functional_coefficient(wave, space->mesh->R);

    SystemMeta meta;
    meta.kind = SystemMeta::Kind::Impedance;
    meta.wave = wave;
    meta.N = N;
    meta.R = space->mesh->R;
    meta.lambda = lambda;
    meta.alpha_op = wave.alpha;
    meta.wood = wood_flag(wave.k, wave.alpha, N);
    return assemble_core(space, r, meta, N);
}

AssembledSystem assemble_transmission(std::shared_ptr<const FeSpace> space,
                                      const IncidentWave& wave, double k_minus, double lambda,
                                      int N) {
    if (!(lambda > 0.0)) throw std::invalid_argument("transmission: lambda must be positive");
    if (k_minus == wave.k) throw std::invalid_argument("transmission: k_minus must differ from k");
    if (space->mesh->kind != DomainKind::TwoSided)
        throw std::invalid_argument("transmission: needs a two-sided mesh");
    AssemblyRecipe r;
    r.alpha_op = wave.alpha;
    r.k2_upper = wave.k * wave.k;
    r.a_lower = lambda;
    r.k2_lower = k_minus * k_minus;
    r.dtn.push_back(
        {&space->top_trace, dtn_diag_i_beta(N, wave.k, wave.alpha, DtnVariant::TPlus), -1.0});
    r.dtn.push_back({&space->bottom_trace,
                     dtn_diag_i_beta(N, k_minus, wave.alpha, DtnVariant::TMinus), lambda});
    r.top_functional_coefficient = incident_functional_coefficient(wave, space->mesh->R);

    SystemMeta meta;
    meta.kind = SystemMeta::Kind::Transmission;
    meta.wave = wave;
    meta.N = N;
    meta.R = space->mesh->R;
    meta.lambda = lambda;
    meta.k_minus = k_minus;
    meta.alpha_op = wave.alpha;
    meta.wood = wood_flag(wave.k, wave.alpha, N) || wood_flag(k_minus, wave.alpha, N);
    return assemble_core(space, r, meta, N);
}

AssembledSystem assemble_auxiliary(std::shared_ptr<const FeSpace> space, const IncidentWave& wave,
                                   const DiscreteField& source, int N) {
    if (source.space.get() != space.get())
        throw std::invalid_argument("auxiliary: source must live on the same space");
    AssemblyRecipe r;
    r.alpha_op = -wave.alpha;
    r.k2_upper = wave.k * wave.k;
    r.dirichlet_profile = true;
    r.dtn.push_back(
        {&space->top_trace, dtn_diag_i_beta(N, wave.k, wave.alpha, DtnVariant::THat), -1.0});
    r.volume_source_conj = &source;

    SystemMeta meta;
    meta.kind = SystemMeta::Kind::Auxiliary;
    meta.wave = wave;
    meta.N = N;
    meta.R = space->mesh->R;
    meta.alpha_op = -wave.alpha;
    meta.wood = wood_flag(wave.k, -wave.alpha, N);
    return assemble_core(space, r, meta, N);
}

DiscreteField solve(const AssembledSystem& system, SolveInfo* info) {
    DiscreteField f;
    f.space = system.space;
    f.quasimomentum = system.meta.alpha_op;
    f.values = Eigen::VectorXcd::Zero(system.space->n_nodes);

    const double bnorm = system.b.norm();
    if (bnorm == 0.0) {
        if (info) info->residual = 0.0;
        return f;
    }

    Eigen::SparseLU<Eigen::SparseMatrix<cd>> lu;
    lu.compute(system.A);
    if (lu.info() != Eigen::Success) {
        throw SolverError(system.meta.wood
                              ? "sparse factorization failed (Wood anomaly in the mode set)"
                              : "sparse factorization failed (possible resonance)");
    }
    Eigen::VectorXcd x = lu.solve(system.b);
    double residual = (system.A * x - system.b).norm() / bnorm;
    if (!std::isfinite(residual) || residual > 1e-10)
        throw SolverError("solve: relative residual above 1e-10");
    if (info) info->residual = residual;

    for (size_t i = 0; i < system.node_of_free.size(); ++i)
        f.values[system.node_of_free[i]] = x[static_cast<int>(i)];
    return f;
}

double galerkin_residual(const AssembledSystem& system, const DiscreteField& field) {
    Eigen::VectorXcd x(system.node_of_free.size());
    for (size_t i = 0; i < system.node_of_free.size(); ++i)
        x[static_cast<int>(i)] = field.values[system.node_of_free[i]];
    return (system.A * x - system.b).lpNorm<Eigen::Infinity>();
}

} // namespace grating
