#pragma once

#include <array>
#include <iosfwd>
#include <utility>
#include <vector>

#include "grating/geometry.hpp"

namespace grating {

enum class BoundaryTag { GammaProfile, GammaRPlus, GammaRMinus, PeriodicLeft, PeriodicRight };
enum class RegionTag { Upper, Lower };

/// Conforming triangulation of a truncated cell. Vertices on x1 = 2pi are
/// kept distinct from their x1 = 0 partners; periodic_pairs records the
/// identification (right vertex, left vertex) with bitwise-equal x2.
/// Profile edges lie exactly on profile segments and separate Upper from
/// Lower triangles in two-sided meshes; they are listed among tagged_edges
/// with the upper-side owner triangle even when they are interior interfaces.
struct PeriodicMesh {
    struct Edge {
        int v0, v1; // oriented left-to-right for horizontal-ish edges, bottom-to-top for sides
        int tri;    // owning triangle (upper/inner side for profile edges)
        BoundaryTag tag;
    };

    std::vector<std::array<double, 2>> vertices;
    std::vector<std::array<int, 3>> triangles; // CCW
    std::vector<RegionTag> region;             // per triangle
    std::vector<Edge> tagged_edges;
    std::vector<std::pair<int, int>> periodic_pairs; // (right, left)
    double h = 0.0;        // max edge length
    double min_angle = 0.0; // degrees

    DomainKind kind = DomainKind::OneSided;
    double R = 0.0;

    double triangle_area(int t) const;
    std::size_t n_triangles() const { return triangles.size(); }
};

/// Structured advancing-layer mesh over the graph domain: vertical fibers
/// from the profile (and from -R for two-sided domains) with a per-cell
/// best-diagonal split. Deterministic; max edge <= 1.5 h_target and minimum
/// angle >= 15 degrees for Lipschitz graph profiles.
PeriodicMesh generate_mesh(const TruncatedDomain& domain, double h_target);

/// Uniform red refinement: each triangle splits into 4, boundary tags and
/// region tags are inherited, periodic pairing is rebuilt exactly, h halves.
PeriodicMesh refine(const PeriodicMesh& mesh);

/// Text dump with sections $Vertices, $Triangles, $Pairs, $Tags.
void write_mesh_dump(const PeriodicMesh& mesh, std::ostream& os);

/// Brute point location with a uniform x-binning. Returns triangle index and
/// barycentric coordinates, or -1 when the point lies outside the mesh.
class PointLocator {
public:
    explicit PointLocator(const PeriodicMesh& mesh);
    int locate(double x, double y, std::array<double, 3>& bary) const;

private:
    const PeriodicMesh& mesh_;
    double x_lo_, bin_w_;
    std::vector<std::vector<int>> bins_;
};

} // namespace grating
