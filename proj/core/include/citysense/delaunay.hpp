#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "citysense/geo.hpp"

namespace citysense {

/// Incremental 2D Delaunay triangulation with Lawson edge flipping.
/// Built once per point set; queries (location, barycentric weights, Sibson
/// natural-neighbour weights) run against the immutable structure.
///
/// Cocircular point groups are legal: any of the equivalent diagonals is
/// kept and the Sibson cavity construction stays exact because conflicting
/// triangles share the same circumcircle.
class Triangulation {
public:
    /// Throws Error when fewer than 3 distinct points are given, when all
    /// points are collinear, or when two points coincide.
    explicit Triangulation(std::vector<Vec2> points);

    const std::vector<Vec2>& points() const { return points_; }

    /// Vertex triples of the live triangles (counter-clockwise).
    std::vector<std::array<int, 3>> triangles() const;

    /// Any live triangle containing q (boundary inclusive); -1 when q is
    /// outside the convex hull.
    int locate(const Vec2& q) const;

    bool inside_hull(const Vec2& q) const { return locate(q) >= 0; }

    /// Index of a vertex within `tol` of q, or -1.
    int coincident_vertex(const Vec2& q, double tol) const;

    /// Barycentric weights of q inside its containing triangle:
    /// (vertex index, weight) triples summing to 1. nullopt outside the hull.
    std::optional<std::array<std::pair<int, double>, 3>> barycentric(const Vec2& q) const;

    /// Sibson weights: for each natural neighbour of q, the fraction of q's
    /// inserted Voronoi cell stolen from that neighbour's cell. Weights are
    /// nonnegative and sum to 1. nullopt outside the hull. On the hull
    /// boundary the continuous limit (linear interpolation along the hull
    /// edge) is returned.
    std::optional<std::vector<std::pair<int, double>>> sibson_weights(const Vec2& q) const;

private:
    struct Tri {
        std::array<int, 3> v;    // CCW vertex indices
        std::array<int, 3> nbr;  // neighbour opposite v[i]; -1 on the hull
        bool alive = true;
    };

    int make_tri(int a, int b, int c);
    void link(int t, int edge, int other);
    int edge_index(int t, int a, int b) const;  // directed edge (a,b) within t
    int opposite_index(int t, int nbr) const;
    void insert_point(int pi);
    void legalize(int t, int edge_opposite_vertex, int pi);

    /// Triangles whose open circumdisk contains q, seeded at `seed`.
    std::vector<int> conflict_cavity(const Vec2& q, int seed) const;

    std::vector<Vec2> points_;
    std::vector<Tri> tris_;
    double scale_ = 1.0;  // coordinate magnitude, for tolerance scaling
};

/// Sign of the orientation of (a,b,c): +1 counter-clockwise, -1 clockwise,
/// 0 (near-)collinear.
int orient2d_sign(const Vec2& a, const Vec2& b, const Vec2& c);

/// +1 when d lies strictly inside the circumcircle of CCW triangle (a,b,c),
/// -1 strictly outside, 0 on the circle (within tolerance).
int incircle_sign(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

/// Circumcenter of a non-degenerate triangle.
Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c);

}  // namespace citysense
