#include "grating/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "grating/quadrature.hpp"

namespace grating {

using cd = std::complex<double>;

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

void trace_poly_coef(int order, double coef[3][3]) {
    if (order == 1) {
        double c[3][3] = {{1, -1, 0}, {0, 1, 0}, {0, 0, 0}};
        std::copy(&c[0][0], &c[0][0] + 9, &coef[0][0]);
    } else {
        double c[3][3] = {{1, -3, 2}, {0, -1, 2}, {0, 4, -4}};
        std::copy(&c[0][0], &c[0][0] + 9, &coef[0][0]);
    }
}

/// Exact modal integrals of the trace on x2 = +-R from the stored trace edges.
RayleighSpectrum coefficients_from_trace(const DiscreteField& field,
                                         const std::vector<FeSpace::TraceEdge>& trace,
                                         double height, int N) {
    const FeSpace& sp = *field.space;
    RayleighSpectrum spec;
    spec.coeffs.assign(2 * N + 1, cd(0.0, 0.0));
    spec.alpha = field.quasimomentum;
    spec.height = height;

    double coef[3][3];
    trace_poly_coef(sp.order, coef);
    const int n_shapes = sp.order == 1 ? 2 : 3;
    for (const auto& e : trace) {
        for (int n = -N; n <= N; ++n) {
            auto mom = oscillatory_moments(e.a, e.b, n, 2);
            cd val = 0.0;
            for (int s = 0; s < n_shapes; ++s) {
                cd basis = coef[s][0] * mom[0] + coef[s][1] * mom[1] + coef[s][2] * mom[2];
                val += field.values[e.nodes[s]] * basis;
            }
            spec.coeffs[n + N] += val / kTwoPi;
        }
    }
    return spec;
}

/// Piece of the horizontal cut [x0, x1] known to lie inside one triangle:
/// interpolate the (quadratic) trace at three points and integrate exactly.
void accumulate_cut_segment(const DiscreteField& field, const PointLocator& loc, double x0,
                            double x1, double y, int N, RayleighSpectrum& spec) {
    std::array<double, 3> bary;
    cd v[3];
    const double xs[3] = {x0, 0.5 * (x0 + x1), x1};
    for (int i = 0; i < 3; ++i) {
        double xq = std::clamp(xs[i], x0 + 1e-13 * (x1 - x0), x1 - 1e-13 * (x1 - x0));
        int tri = loc.locate(xq, y, bary);
        if (tri < 0) throw std::invalid_argument("rayleigh_coefficients: height outside mesh");
        v[i] = eval_factor(field, tri, bary[1], bary[2]);
    }
    // quadratic through (0, v0), (1/2, v1), (1, v2) in t = (x - x0)/(x1 - x0)
    cd c0 = v[0];
    cd c1 = -3.0 * v[0] + 4.0 * v[1] - v[2];
    cd c2 = 2.0 * v[0] - 4.0 * v[1] + 2.0 * v[2];
    for (int n = -N; n <= N; ++n) {
        auto mom = oscillatory_moments(x0, x1, n, 2);
        spec.coeffs[n + N] += (c0 * mom[0] + c1 * mom[1] + c2 * mom[2]) / kTwoPi;
    }
}

void walk_cut(const DiscreteField& field, const PointLocator& loc, double x0, double x1, double y,
              int N, RayleighSpectrum& spec, int depth) {
    std::array<double, 3> bary;
    double eps = 1e-12 * std::max(1.0, std::abs(x1 - x0));
    int t0 = loc.locate(x0 + eps, y, bary);
    int t1 = loc.locate(x1 - eps, y, bary);
    int tm = loc.locate(0.5 * (x0 + x1), y, bary);
    if ((t0 == t1 && t1 == tm) || depth >= 44 || (x1 - x0) < 1e-13) {
        accumulate_cut_segment(field, loc, x0, x1, y, N, spec);
        return;
    }
    double xm = 0.5 * (x0 + x1);
    walk_cut(field, loc, x0, xm, y, N, spec, depth + 1);
    walk_cut(field, loc, xm, x1, y, N, spec, depth + 1);
}

struct MappedGeometry {
    Eigen::Matrix2d jac, inv_jt;
    double abs_det;
    std::array<double, 2> p0;
};

MappedGeometry mapped_geometry(const PeriodicMesh& mesh, int tri) {
    const auto& t = mesh.triangles[tri];
    const auto& a = mesh.vertices[t[0]];
    const auto& b = mesh.vertices[t[1]];
    const auto& c = mesh.vertices[t[2]];
    MappedGeometry g;
    g.jac << b[0] - a[0], c[0] - a[0], b[1] - a[1], c[1] - a[1];
    g.abs_det = std::abs(g.jac.determinant());
    g.inv_jt = g.jac.inverse().transpose();
    g.p0 = a;
    return g;
}

/// Volume quadrature driver: callback(x, y, utilde, grad-physical-of-u, region, weight).
template <typename F>
void for_each_volume_qp(const DiscreteField& field, int degree, F&& callback) {
    const FeSpace& sp = *field.space;
    const PeriodicMesh& mesh = *sp.mesh;
    TriangleRule rule = triangle_rule_for_degree(degree);
    const int ndof = sp.dofs_per_element();
    const cd I(0.0, 1.0);
    const double q = field.quasimomentum;

    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        MappedGeometry geo = mapped_geometry(mesh, static_cast<int>(t));
        const auto& en = sp.element_nodes[t];
        for (size_t qp = 0; qp < rule.points.size(); ++qp) {
            double xi = rule.points[qp][0], eta = rule.points[qp][1];
            double w = rule.weights[qp] * geo.abs_det;
            double sv[6], sg[6][2];
            // inline P1/P2 shapes
            {
                const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
                if (sp.order == 1) {
                    sv[0] = l0; sv[1] = l1; sv[2] = l2;
                    sg[0][0] = -1; sg[0][1] = -1;
                    sg[1][0] = 1;  sg[1][1] = 0;
                    sg[2][0] = 0;  sg[2][1] = 1;
                } else {
                    sv[0] = l0 * (2 * l0 - 1);
                    sv[1] = l1 * (2 * l1 - 1);
                    sv[2] = l2 * (2 * l2 - 1);
                    sv[3] = 4 * l0 * l1;
                    sv[4] = 4 * l1 * l2;
                    sv[5] = 4 * l2 * l0;
                    sg[0][0] = -(4 * l0 - 1); sg[0][1] = -(4 * l0 - 1);
                    sg[1][0] = 4 * l1 - 1;    sg[1][1] = 0;
                    sg[2][0] = 0;             sg[2][1] = 4 * l2 - 1;
                    sg[3][0] = 4 * (l0 - l1); sg[3][1] = -4 * l1;
                    sg[4][0] = 4 * l2;        sg[4][1] = 4 * l1;
                    sg[5][0] = -4 * l2;       sg[5][1] = 4 * (l0 - l2);
                }
            }
            cd val = 0.0;
            Eigen::Vector2cd grad = Eigen::Vector2cd::Zero();
            for (int i = 0; i < ndof; ++i) {
                Eigen::Vector2d phys = geo.inv_jt * Eigen::Vector2d(sg[i][0], sg[i][1]);
                val += field.values[en[i]] * sv[i];
                grad[0] += field.values[en[i]] * phys[0];
                grad[1] += field.values[en[i]] * phys[1];
            }
            double x = geo.p0[0] + geo.jac(0, 0) * xi + geo.jac(0, 1) * eta;
            double y = geo.p0[1] + geo.jac(1, 0) * xi + geo.jac(1, 1) * eta;
            // physical gradient of u = e^{iqx} utilde, up to the unimodular phase
            Eigen::Vector2cd gu = grad;
            gu[0] += I * q * val;
            callback(x, y, val, gu, mesh.region[t], w);
        }
    }
}

} // namespace

RayleighSpectrum rayleigh_coefficients(const DiscreteField& field, double height, int N) {
    const FeSpace& sp = *field.space;
    const double R = sp.mesh->R;
    if (std::abs(height - R) < 1e-12)
        return coefficients_from_trace(field, sp.top_trace, R, N);
    if (std::abs(height + R) < 1e-12) {
        if (sp.bottom_trace.empty())
            throw std::invalid_argument("rayleigh_coefficients: mesh has no lower trace");
        return coefficients_from_trace(field, sp.bottom_trace, -R, N);
    }
    RayleighSpectrum spec;
    spec.coeffs.assign(2 * N + 1, cd(0.0, 0.0));
    spec.alpha = field.quasimomentum;
    spec.height = height;
    PointLocator loc(*sp.mesh);
    // panels from the top-trace x-grid keep kinks at fiber lines out of the way
    for (const auto& e : sp.top_trace) walk_cut(field, loc, e.a, e.b, height, N, spec, 0);
    return spec;
}

RayleighSpectrum rayleigh_coefficients_sampled(const DiscreteField& field, double height, int N,
                                               int n_samples) {
    const FeSpace& sp = *field.space;
    const double R = sp.mesh->R;
    const std::vector<FeSpace::TraceEdge>* trace = nullptr;
    if (std::abs(height - R) < 1e-12) trace = &sp.top_trace;
    else if (std::abs(height + R) < 1e-12) trace = &sp.bottom_trace;
    if (!trace || trace->empty())
        throw std::invalid_argument("sampled coefficients: only the +-R traces are supported");

    double coef[3][3];
    trace_poly_coef(sp.order, coef);
    const int n_shapes = sp.order == 1 ? 2 : 3;

    RayleighSpectrum spec;
    spec.coeffs.assign(2 * N + 1, cd(0.0, 0.0));
    spec.alpha = field.quasimomentum;
    spec.height = height;

    size_t edge = 0;
    for (int m = 0; m < n_samples; ++m) {
        double x = kTwoPi * m / n_samples;
        while (edge + 1 < trace->size() && x >= (*trace)[edge].b) ++edge;
        const auto& e = (*trace)[edge];
        double t = (x - e.a) / (e.b - e.a);
        cd v = 0.0;
        for (int s = 0; s < n_shapes; ++s)
            v += field.values[e.nodes[s]] * (coef[s][0] + coef[s][1] * t + coef[s][2] * t * t);
        for (int n = -N; n <= N; ++n)
            spec.coeffs[n + N] += v * std::exp(cd(0.0, -n * x)) / double(n_samples);
    }
    return spec;
}

RayleighSpectrum scattered_spectrum(const RayleighSpectrum& trace_at_R, const IncidentWave& wave) {
    RayleighSpectrum out = trace_at_R;
    const int N = out.N();
    const cd I(0.0, 1.0);
    const double R = trace_at_R.height;
    out.at_order(0) -= wave.gamma * std::exp(-I * wave.beta * R);
    for (int n = -N; n <= N; ++n)
        out.at_order(n) *= std::exp(-I * beta_n(wave.k, wave.alpha, n) * R);
    out.k = wave.k;
    return out;
}

RayleighSpectrum transmitted_spectrum(const RayleighSpectrum& trace_at_minus_R, double k_minus) {
    RayleighSpectrum out = trace_at_minus_R;
    const int N = out.N();
    const cd I(0.0, 1.0);
    const double R = -trace_at_minus_R.height; // stored height is -R
    for (int n = -N; n <= N; ++n)
        out.at_order(n) *= std::exp(-I * beta_n(k_minus, out.alpha, n) * R);
    out.k = k_minus;
    return out;
}

EfficiencyTable efficiencies(const RayleighSpectrum& scattered_up,
                             const std::optional<RayleighSpectrum>& transmitted_down,
                             const IncidentWave& wave, const BoundaryModel& bc) {
    EfficiencyTable table;
    const double g2 = std::norm(wave.gamma);
    if (g2 == 0.0) throw std::invalid_argument("efficiencies: zero incident amplitude");
    const int N = scattered_up.N();
    ModeExponents up = make_mode_exponents(wave.k, wave.alpha, N);
    table.wood_unreliable = up.wood;

    const TransmissionBC* tr = std::get_if<TransmissionBC>(&bc);
    std::optional<ModeExponents> down;
    if (tr && transmitted_down) {
        down = make_mode_exponents(tr->k_minus, wave.alpha, transmitted_down->N());
        table.wood_unreliable = table.wood_unreliable || down->wood;
    }

    for (int n = -N; n <= N; ++n) {
        bool up_prop = up.propagating(n);
        bool down_prop = down && down->propagating(n);
        if (!up_prop && !down_prop) continue;
        EfficiencyTable::Row row;
        row.order = n;
        if (up_prop)
            row.e_plus = up.beta_of(n).real() / wave.beta * std::norm(scattered_up.at_order(n)) / g2;
        if (down_prop)
            row.e_minus = tr->lambda * down->beta_of(n).real() / wave.beta *
                          std::norm(transmitted_down->at_order(n)) / g2;
        table.sum += row.e_plus + row.e_minus;
        table.rows.push_back(row);
    }
    table.balance_defect = std::abs(table.sum - 1.0);
    return table;
}

double norm_XR(const DiscreteField& field, double k) {
    double acc = 0.0;
    for_each_volume_qp(field, 8,
                       [&](double, double, cd v, const Eigen::Vector2cd& gu, RegionTag, double w) {
                           acc += w * (k * k * std::norm(v) + gu.squaredNorm());
                       });
    return std::sqrt(acc);
}

double norm_H1alpha_weighted(const DiscreteField& field, double k_plus, double k_minus,
                             double lambda) {
    double acc = 0.0;
    for_each_volume_qp(field, 8,
                       [&](double, double, cd v, const Eigen::Vector2cd& gu, RegionTag r, double w) {
                           double a = r == RegionTag::Lower ? lambda : 1.0;
                           double kk = r == RegionTag::Lower ? k_minus : k_plus;
                           acc += w * a * (kk * kk * std::norm(v) + gu.squaredNorm());
                       });
    return std::sqrt(acc);
}

double norm_L2(const DiscreteField& field) {
    double acc = 0.0;
    for_each_volume_qp(field, 8, [&](double, double, cd v, const Eigen::Vector2cd&, RegionTag,
                                     double w) { acc += w * std::norm(v); });
    return std::sqrt(acc);
}

double seminorm_dx2(const DiscreteField& field) {
    double acc = 0.0;
    for_each_volume_qp(field, 8, [&](double, double, cd, const Eigen::Vector2cd& gu, RegionTag,
                                     double w) { acc += w * std::norm(gu[1]); });
    return std::sqrt(acc);
}

double trace_half_norm(const RayleighSpectrum& spectrum, double k) {
    const int N = spectrum.N();
    double acc = 0.0;
    for (int n = -N; n <= N; ++n) {
        double an = spectrum.alpha + n;
        acc += std::sqrt(k * k + an * an) * std::norm(spectrum.at_order(n));
    }
    return std::sqrt(acc);
}

double profile_trace_norm(const DiscreteField& field) {
    const FeSpace& sp = *field.space;
    SegmentRule rule = segment_rule_for_degree(2 * sp.order);
    double coef[3][3];
    trace_poly_coef(sp.order, coef);
    const int n_shapes = sp.order == 1 ? 2 : 3;
    double acc = 0.0;
    for (const auto& pe : sp.profile_edges) {
        for (size_t qp = 0; qp < rule.points.size(); ++qp) {
            double t = rule.points[qp];
            cd v = 0.0;
            for (int s = 0; s < n_shapes; ++s)
                v += field.values[pe.nodes[s]] * (coef[s][0] + coef[s][1] * t + coef[s][2] * t * t);
            acc += rule.weights[qp] * pe.len * std::norm(v);
        }
    }
    return std::sqrt(acc);
}

double profile_flux_norm(const DiscreteField& field) {
    const FeSpace& sp = *field.space;
    const PeriodicMesh& mesh = *sp.mesh;
    SegmentRule rule = segment_rule_for_degree(2 * sp.order + 2);
    const cd I(0.0, 1.0);
    const double q = field.quasimomentum;
    double acc = 0.0;
    for (const auto& pe : sp.profile_edges) {
        MappedGeometry geo = mapped_geometry(mesh, pe.tri);
        Eigen::Matrix2d inv_j = geo.jac.inverse();
        for (size_t qp = 0; qp < rule.points.size(); ++qp) {
            double t = rule.points[qp];
            double x = pe.p0[0] + t * (pe.p1[0] - pe.p0[0]);
            double y = pe.p0[1] + t * (pe.p1[1] - pe.p0[1]);
            Eigen::Vector2d ref = inv_j * Eigen::Vector2d(x - geo.p0[0], y - geo.p0[1]);
            cd v = eval_factor(field, pe.tri, ref[0], ref[1]);
            Eigen::Vector2cd gu = eval_factor_gradient(field, pe.tri, ref[0], ref[1]);
            gu[0] += I * q * v;
            cd flux = pe.normal[0] * gu[0] + pe.normal[1] * gu[1];
            acc += rule.weights[qp] * pe.len * std::norm(flux);
        }
    }
    return std::sqrt(acc);
}

cd discrete_functional(const DiscreteField& field, const IncidentWave& wave) {
    RayleighSpectrum spec = rayleigh_coefficients(field, field.space->mesh->R, 1);
    cd c = incident_functional_coefficient(wave, field.space->mesh->R);
    return -c * kTwoPi * std::conj(spec.at_order(0));
}

FieldError field_error(const DiscreteField& field, const PhysicalField& exact,
                       const PhysicalGradient* exact_grad, int quad_degree) {
    FieldError err;
    const cd I(0.0, 1.0);
    const double q = field.quasimomentum;
    for_each_volume_qp(field, quad_degree,
                       [&](double x, double y, cd v, const Eigen::Vector2cd& gu, RegionTag,
                           double w) {
                           cd phase = std::exp(I * q * x);
                           cd ue = exact(x, y);
                           err.abs_l2 += w * std::norm(phase * v - ue);
                           err.ref_l2 += w * std::norm(ue);
                           if (exact_grad) {
                               Eigen::Vector2cd ge = (*exact_grad)(x, y);
                               err.abs_h1_semi += w * (phase * gu - ge).squaredNorm();
                               err.ref_h1_semi += w * ge.squaredNorm();
                           }
                       });
    err.abs_l2 = std::sqrt(err.abs_l2);
    err.ref_l2 = std::sqrt(err.ref_l2);
    err.abs_h1_semi = std::sqrt(err.abs_h1_semi);
    err.ref_h1_semi = std::sqrt(err.ref_h1_semi);
    return err;
}

double trace_l2_squared_top(const DiscreteField& field) {
    const FeSpace& sp = *field.space;
    SegmentRule rule = segment_rule_for_degree(2 * sp.order);
    double coef[3][3];
    trace_poly_coef(sp.order, coef);
    const int n_shapes = sp.order == 1 ? 2 : 3;
    double acc = 0.0;
    for (const auto& e : sp.top_trace) {
        for (size_t qp = 0; qp < rule.points.size(); ++qp) {
            double t = rule.points[qp];
            cd v = 0.0;
            for (int s = 0; s < n_shapes; ++s)
                v += field.values[e.nodes[s]] * (coef[s][0] + coef[s][1] * t + coef[s][2] * t * t);
            acc += rule.weights[qp] * (e.b - e.a) * std::norm(v);
        }
    }
    return acc;
}

} // namespace grating
