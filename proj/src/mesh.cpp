#include "grating/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace grating {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double edge_len(const PeriodicMesh& m, int a, int b) {
    double dx = m.vertices[a][0] - m.vertices[b][0];
    double dy = m.vertices[a][1] - m.vertices[b][1];
    return std::hypot(dx, dy);
}

double signed_area(const std::array<double, 2>& a, const std::array<double, 2>& b,
                   const std::array<double, 2>& c) {
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

double tri_min_angle(const std::array<double, 2>& a, const std::array<double, 2>& b,
                     const std::array<double, 2>& c) {
    double la = std::hypot(c[0] - b[0], c[1] - b[1]);
    double lb = std::hypot(c[0] - a[0], c[1] - a[1]);
    double lc = std::hypot(b[0] - a[0], b[1] - a[1]);
    double worst = M_PI;
    auto corner = [](double opp, double s1, double s2) {
        double cosv = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2);
        return std::acos(std::clamp(cosv, -1.0, 1.0));
    };
    worst = std::min(worst, corner(la, lb, lc));
    worst = std::min(worst, corner(lb, la, lc));
    worst = std::min(worst, corner(lc, la, lb));
    return worst * 180.0 / M_PI;
}

} // namespace

double PeriodicMesh::triangle_area(int t) const {
    const auto& tri = triangles[t];
    return signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

PeriodicMesh generate_mesh(const TruncatedDomain& domain, double h_target) {
    if (!(h_target > 0.0)) throw std::invalid_argument("generate_mesh: h_target must be positive");
    const GratingProfile& prof = domain.profile;
    for (size_t i = 1; i < prof.knots.size(); ++i)
        if (!(prof.knots[i].x > prof.knots[i - 1].x))
            throw std::invalid_argument("generate_mesh: degenerate profile (duplicate knots)");

    // Fiber abscissas: profile knots, each interval subdivided so that both the
    // spacing and the per-cell shear stay below the sliver threshold.
    double dx_max = 0.7 * h_target;
    const double t_max_up = domain.R - prof.gamma_min;
    const double t_min_up = domain.R - prof.gamma_max;
    double shear_cap = 0.55 * h_target;
    if (prof.lipschitz_L > 0.0) {
        double ratio = t_min_up / t_max_up;
        if (domain.kind == DomainKind::TwoSided) {
            double ratio_lo = (prof.gamma_min + domain.R) / (prof.gamma_max + domain.R);
            ratio = std::min(ratio, ratio_lo);
        }
        dx_max = std::min(dx_max, shear_cap * ratio / prof.lipschitz_L);
    }

    std::vector<double> xs;
    std::vector<double> fs;
    xs.push_back(0.0);
    fs.push_back(prof.knots.front().f);
    for (size_t i = 1; i < prof.knots.size(); ++i) {
        const auto& a = prof.knots[i - 1];
        const auto& b = prof.knots[i];
        int pieces = std::max(1, static_cast<int>(std::ceil((b.x - a.x) / dx_max)));
        for (int s = 1; s <= pieces; ++s) {
            double t = static_cast<double>(s) / pieces;
            xs.push_back(a.x + t * (b.x - a.x));
            fs.push_back(a.f + t * (b.f - a.f));
        }
    }
    xs.back() = kTwoPi;
    fs.back() = fs.front(); // exact periodic closure
    const int nx = static_cast<int>(xs.size()) - 1;

    // cap the cell aspect ratio: columns forced narrow by dense profile knots
    // must not meet tall layers, or the split triangles turn into slivers
    double dx_min = kTwoPi;
    for (int i = 0; i < nx; ++i) dx_min = std::min(dx_min, xs[i + 1] - xs[i]);
    const double dy_max = std::min(0.7 * h_target, 3.0 * dx_min);
    const int ny_up = std::max(1, static_cast<int>(std::ceil(t_max_up / dy_max)));
    const int ny_lo = domain.kind == DomainKind::TwoSided
                          ? std::max(1, static_cast<int>(std::ceil((prof.gamma_max + domain.R) / dy_max)))
                          : 0;
    const int rows = ny_lo + ny_up + 1;

    PeriodicMesh mesh;
    mesh.kind = domain.kind;
    mesh.R = domain.R;
    mesh.vertices.resize(static_cast<size_t>(nx + 1) * rows);

    auto vid = [rows](int i, int j) { return i * rows + j; };
    for (int i = 0; i <= nx; ++i) {
        const double f = fs[i];
        for (int j = 0; j < ny_lo; ++j) {
            double t = static_cast<double>(j) / ny_lo;
            mesh.vertices[vid(i, j)] = {xs[i], j == 0 ? -domain.R : -domain.R + t * (f + domain.R)};
        }
        for (int j = 0; j <= ny_up; ++j) {
            double t = static_cast<double>(j) / ny_up;
            double y = j == 0 ? f : (j == ny_up ? domain.R : f + t * (domain.R - f));
            mesh.vertices[vid(i, ny_lo + j)] = {xs[i], y};
        }
    }

    // cells split along the diagonal that maximizes the minimum angle
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j + 1 < rows; ++j) {
            int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            const auto &pa = mesh.vertices[a], &pb = mesh.vertices[b], &pc = mesh.vertices[c],
                       &pd = mesh.vertices[d];
            double q_ac = std::min(tri_min_angle(pa, pb, pc), tri_min_angle(pa, pc, pd));
            double q_bd = std::min(tri_min_angle(pa, pb, pd), tri_min_angle(pb, pc, pd));
            RegionTag tag = (j < ny_lo) ? RegionTag::Lower : RegionTag::Upper;
            if (q_ac >= q_bd) {
                mesh.triangles.push_back({a, b, c});
                mesh.triangles.push_back({a, c, d});
            } else {
                mesh.triangles.push_back({a, b, d});
                mesh.triangles.push_back({b, c, d});
            }
            mesh.region.push_back(tag);
            mesh.region.push_back(tag);
        }
    }

    // tagged edges; the owner is whichever cell child contains both endpoints
    auto cell_tris = [&](int i, int j) { return 2 * (i * (rows - 1) + j); };
    auto owner_in_cell = [&](int i, int j, int v0, int v1) {
        int t0 = cell_tris(i, j);
        for (int t = t0; t <= t0 + 1; ++t) {
            const auto& tri = mesh.triangles[t];
            int hits = 0;
            for (int v : tri) hits += (v == v0 || v == v1);
            if (hits == 2) return t;
        }
        throw std::logic_error("generate_mesh: tagged edge not found in its cell");
    };
    auto add_edge = [&](int i, int j, int v0, int v1, BoundaryTag tag) {
        mesh.tagged_edges.push_back({v0, v1, owner_in_cell(i, j, v0, v1), tag});
    };

    for (int i = 0; i < nx; ++i) {
        if (domain.kind == DomainKind::TwoSided) {
            add_edge(i, 0, vid(i, 0), vid(i + 1, 0), BoundaryTag::GammaRMinus);
            // owner of the profile edge is the upper-side cell
            add_edge(i, ny_lo, vid(i, ny_lo), vid(i + 1, ny_lo), BoundaryTag::GammaProfile);
        } else {
            add_edge(i, 0, vid(i, 0), vid(i + 1, 0), BoundaryTag::GammaProfile);
        }
        add_edge(i, rows - 2, vid(i, rows - 1), vid(i + 1, rows - 1), BoundaryTag::GammaRPlus);
    }
    for (int j = 0; j + 1 < rows; ++j) {
        add_edge(0, j, vid(0, j), vid(0, j + 1), BoundaryTag::PeriodicLeft);
        add_edge(nx - 1, j, vid(nx, j), vid(nx, j + 1), BoundaryTag::PeriodicRight);
    }

    for (int j = 0; j < rows; ++j) mesh.periodic_pairs.push_back({vid(nx, j), vid(0, j)});

    mesh.h = 0.0;
    mesh.min_angle = 180.0;
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        if (!(mesh.triangle_area(static_cast<int>(t)) > 0.0))
            throw std::runtime_error("generate_mesh: non-positive triangle area");
        for (int e = 0; e < 3; ++e)
            mesh.h = std::max(mesh.h, edge_len(mesh, tri[e], tri[(e + 1) % 3]));
        mesh.min_angle = std::min(
            mesh.min_angle,
            tri_min_angle(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]));
    }
    if (mesh.h > 1.5 * h_target)
        throw std::runtime_error("generate_mesh: max edge exceeds 1.5 h_target");
    if (mesh.min_angle < 15.0)
        throw std::runtime_error("generate_mesh: minimum angle below 15 degrees");
    return mesh;
}

PeriodicMesh refine(const PeriodicMesh& mesh) {
    PeriodicMesh out;
    out.kind = mesh.kind;
    out.R = mesh.R;
    out.vertices = mesh.vertices;

    std::map<std::pair<int, int>, int> midpoint;
    auto mid_of = [&](int a, int b) {
        std::pair<int, int> key = std::minmax(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const auto& pa = mesh.vertices[a];
        const auto& pb = mesh.vertices[b];
        int id = static_cast<int>(out.vertices.size());
        out.vertices.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])});
        midpoint.emplace(key, id);
        return id;
    };

    out.triangles.reserve(4 * mesh.triangles.size());
    out.region.reserve(4 * mesh.triangles.size());
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        int a = tri[0], b = tri[1], c = tri[2];
        int ab = mid_of(a, b), bc = mid_of(b, c), ca = mid_of(c, a);
        out.triangles.push_back({a, ab, ca});
        out.triangles.push_back({b, bc, ab});
        out.triangles.push_back({c, ca, bc});
        out.triangles.push_back({ab, bc, ca});
        for (int r = 0; r < 4; ++r) out.region.push_back(mesh.region[t]);
    }

    // child triangle adjacent to a given parent corner
    auto corner_child = [&](int parent, int v) {
        const auto& tri = mesh.triangles[parent];
        for (int c = 0; c < 3; ++c)
            if (tri[c] == v) return 4 * parent + c;
        throw std::logic_error("refine: edge owner does not contain edge vertex");
    };

    for (const auto& e : mesh.tagged_edges) {
        int m = mid_of(e.v0, e.v1);
        out.tagged_edges.push_back({e.v0, m, corner_child(e.tri, e.v0), e.tag});
        out.tagged_edges.push_back({m, e.v1, corner_child(e.tri, e.v1), e.tag});
    }

    out.periodic_pairs = mesh.periodic_pairs;
    std::map<int, int> right_to_left(mesh.periodic_pairs.begin(), mesh.periodic_pairs.end());
    for (const auto& [key, m] : midpoint) {
        auto it0 = right_to_left.find(key.first);
        auto it1 = right_to_left.find(key.second);
        if (it0 != right_to_left.end() && it1 != right_to_left.end()) {
            std::pair<int, int> lkey = std::minmax(it0->second, it1->second);
            auto lm = midpoint.find(lkey);
            if (lm == midpoint.end())
                throw std::logic_error("refine: unmatched periodic edge midpoint");
            out.periodic_pairs.push_back({m, lm->second});
        }
    }

    out.h = 0.0;
    out.min_angle = 180.0;
    for (const auto& tri : out.triangles) {
        for (int e = 0; e < 3; ++e)
            out.h = std::max(out.h, edge_len(out, tri[e], tri[(e + 1) % 3]));
        out.min_angle = std::min(out.min_angle, tri_min_angle(out.vertices[tri[0]],
                                                              out.vertices[tri[1]],
                                                              out.vertices[tri[2]]));
    }
    return out;
}

void write_mesh_dump(const PeriodicMesh& mesh, std::ostream& os) {
    os << "$Vertices " << mesh.vertices.size() << "\n";
    for (size_t i = 0; i < mesh.vertices.size(); ++i)
        os << i << " " << mesh.vertices[i][0] << " " << mesh.vertices[i][1] << "\n";
    os << "$Triangles " << mesh.triangles.size() << "\n";
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        os << t << " " << tri[0] << " " << tri[1] << " " << tri[2] << " "
           << (mesh.region[t] == RegionTag::Upper ? "upper" : "lower") << "\n";
    }
    os << "$Pairs " << mesh.periodic_pairs.size() << "\n";
    for (const auto& [r, l] : mesh.periodic_pairs) os << r << " " << l << "\n";
    os << "$Tags " << mesh.tagged_edges.size() << "\n";
    for (const auto& e : mesh.tagged_edges) {
        const char* tag = "";
        switch (e.tag) {
        case BoundaryTag::GammaProfile: tag = "profile"; break;
        case BoundaryTag::GammaRPlus: tag = "top"; break;
        case BoundaryTag::GammaRMinus: tag = "bottom"; break;
        case BoundaryTag::PeriodicLeft: tag = "left"; break;
        case BoundaryTag::PeriodicRight: tag = "right"; break;
        }
        os << e.v0 << " " << e.v1 << " " << tag << "\n";
    }
}

PointLocator::PointLocator(const PeriodicMesh& mesh) : mesh_(mesh) {
    x_lo_ = 0.0;
    int nbins = std::max<size_t>(8, mesh.triangles.size() / 16);
    bin_w_ = kTwoPi / nbins;
    bins_.resize(nbins);
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        double lo = kTwoPi, hi = 0.0;
        for (int v : tri) {
            lo = std::min(lo, mesh.vertices[v][0]);
            hi = std::max(hi, mesh.vertices[v][0]);
        }
        int b0 = std::clamp(static_cast<int>((lo - x_lo_) / bin_w_), 0, nbins - 1);
        int b1 = std::clamp(static_cast<int>((hi - x_lo_) / bin_w_), 0, nbins - 1);
        for (int b = b0; b <= b1; ++b) bins_[b].push_back(static_cast<int>(t));
    }
}

int PointLocator::locate(double x, double y, std::array<double, 3>& bary) const {
    int nbins = static_cast<int>(bins_.size());
    int b = std::clamp(static_cast<int>((x - x_lo_) / bin_w_), 0, nbins - 1);
    constexpr double tol = 1e-12;
    for (int pass = 0; pass < 2; ++pass) {
        // widen to the neighbor bins on the second pass for points on bin seams
        for (int db = -pass; db <= pass; ++db) {
            int bb = b + db;
            if (bb < 0 || bb >= nbins) continue;
            for (int t : bins_[bb]) {
                const auto& tri = mesh_.triangles[t];
                const auto& p0 = mesh_.vertices[tri[0]];
                const auto& p1 = mesh_.vertices[tri[1]];
                const auto& p2 = mesh_.vertices[tri[2]];
                double area = signed_area(p0, p1, p2);
                double l0 = signed_area({x, y}, p1, p2) / area;
                double l1 = signed_area(p0, {x, y}, p2) / area;
                double l2 = 1.0 - l0 - l1;
                if (l0 >= -tol && l1 >= -tol && l2 >= -tol) {
                    bary = {l0, l1, l2};
                    return t;
                }
            }
        }
    }
    return -1;
}

} // namespace grating
