#include "citysense/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace citysense {

int orient2d_sign(const Vec2& a, const Vec2& b, const Vec2& c) {
    const long double detleft =
        (static_cast<long double>(a.x) - c.x) * (static_cast<long double>(b.y) - c.y);
    const long double detright =
        (static_cast<long double>(a.y) - c.y) * (static_cast<long double>(b.x) - c.x);
    const long double det = detleft - detright;
    const long double bound = 1e-18L * (std::abs(detleft) + std::abs(detright));
    if (det > bound) return 1;
    if (det < -bound) return -1;
    return 0;
}

int incircle_sign(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const long double adx = static_cast<long double>(a.x) - d.x;
    const long double ady = static_cast<long double>(a.y) - d.y;
    const long double bdx = static_cast<long double>(b.x) - d.x;
    const long double bdy = static_cast<long double>(b.y) - d.y;
    const long double cdx = static_cast<long double>(c.x) - d.x;
    const long double cdy = static_cast<long double>(c.y) - d.y;

    const long double alift = adx * adx + ady * ady;
    const long double blift = bdx * bdx + bdy * bdy;
    const long double clift = cdx * cdx + cdy * cdy;

    const long double bxcy = bdx * cdy, bycx = bdy * cdx;
    const long double cxay = cdx * ady, cyax = cdy * adx;
    const long double axby = adx * bdy, aybx = ady * bdx;

    const long double det =
        alift * (bxcy - bycx) + blift * (cxay - cyax) + clift * (axby - aybx);
    const long double permanent = alift * (std::abs(bxcy) + std::abs(bycx)) +
                                  blift * (std::abs(cxay) + std::abs(cyax)) +
                                  clift * (std::abs(axby) + std::abs(aybx));
    const long double bound = 1e-17L * permanent;
    if (det > bound) return 1;
    if (det < -bound) return -1;
    return 0;
}

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
    const long double bx = static_cast<long double>(b.x) - a.x;
    const long double by = static_cast<long double>(b.y) - a.y;
    const long double cx = static_cast<long double>(c.x) - a.x;
    const long double cy = static_cast<long double>(c.y) - a.y;
    const long double d = 2 * (bx * cy - by * cx);
    const long double b2 = bx * bx + by * by;
    const long double c2 = cx * cx + cy * cy;
    Vec2 cc;
    cc.x = a.x + static_cast<double>((cy * b2 - by * c2) / d);
    cc.y = a.y + static_cast<double>((bx * c2 - cx * b2) / d);
    return cc;
}

namespace {
double sq_dist(const Vec2& a, const Vec2& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}
}  // namespace

Triangulation::Triangulation(std::vector<Vec2> points) : points_(std::move(points)) {
    if (points_.size() < 3) throw Error("triangulation: need at least 3 points");
    for (const Vec2& p : points_) {
        scale_ = std::max({scale_, std::abs(p.x), std::abs(p.y)});
    }
    const double dup_tol2 = 1e-18;  // 1e-9 m coincidence threshold, squared
    for (std::size_t i = 0; i < points_.size(); ++i) {
        for (std::size_t j = i + 1; j < points_.size(); ++j) {
            if (sq_dist(points_[i], points_[j]) <= dup_tol2) {
                throw Error("triangulation: coincident points");
            }
        }
    }

    // Seed triangle: the first non-collinear triple.
    int s0 = 0, s1 = 1, s2 = -1;
    for (std::size_t k = 2; k < points_.size(); ++k) {
        if (orient2d_sign(points_[s0], points_[s1], points_[k]) != 0) {
            s2 = static_cast<int>(k);
            break;
        }
    }
    if (s2 < 0) throw Error("triangulation: all points are collinear");
    if (orient2d_sign(points_[s0], points_[s1], points_[s2]) < 0) std::swap(s0, s1);
    make_tri(s0, s1, s2);

    for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
        if (i == s0 || i == s1 || i == s2) continue;
        insert_point(i);
    }
}

int Triangulation::make_tri(int a, int b, int c) {
    tris_.push_back(Tri{{a, b, c}, {-1, -1, -1}, true});
    return static_cast<int>(tris_.size() - 1);
}

void Triangulation::link(int t, int edge, int other) {
    tris_[static_cast<std::size_t>(t)].nbr[static_cast<std::size_t>(edge)] = other;
    if (other >= 0) {
        const Tri& tt = tris_[static_cast<std::size_t>(t)];
        const int a = tt.v[(static_cast<std::size_t>(edge) + 1) % 3];
        const int b = tt.v[(static_cast<std::size_t>(edge) + 2) % 3];
        const int back = edge_index(other, b, a);
        tris_[static_cast<std::size_t>(other)].nbr[static_cast<std::size_t>(back)] = t;
    }
}

int Triangulation::edge_index(int t, int a, int b) const {
    const Tri& tt = tris_[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
        if (tt.v[(static_cast<std::size_t>(i) + 1) % 3] == a &&
            tt.v[(static_cast<std::size_t>(i) + 2) % 3] == b) {
            return i;
        }
    }
    throw Error("triangulation: inconsistent adjacency");
}

std::vector<std::array<int, 3>> Triangulation::triangles() const {
    std::vector<std::array<int, 3>> out;
    for (const Tri& t : tris_) {
        if (t.alive) out.push_back(t.v);
    }
    return out;
}

void Triangulation::insert_point(int pi) {
    const Vec2& p = points_[static_cast<std::size_t>(pi)];

    // Find a live triangle containing p, tracking any on-edge incidence.
    int host = -1;
    int zero_edge = -1;  // edge of host whose supporting line carries p
    for (int t = 0; t < static_cast<int>(tris_.size()) && host < 0; ++t) {
        if (!tris_[static_cast<std::size_t>(t)].alive) continue;
        const Tri& tt = tris_[static_cast<std::size_t>(t)];
        int zero = -1;
        bool inside = true;
        for (int e = 0; e < 3 && inside; ++e) {
            const Vec2& a = points_[static_cast<std::size_t>(
                tt.v[(static_cast<std::size_t>(e) + 1) % 3])];
            const Vec2& b = points_[static_cast<std::size_t>(
                tt.v[(static_cast<std::size_t>(e) + 2) % 3])];
            const int s = orient2d_sign(a, b, p);
            if (s < 0) inside = false;
            if (s == 0) zero = e;
        }
        if (inside) {
            host = t;
            zero_edge = zero;
        }
    }

    if (host >= 0 && zero_edge < 0) {
        // Interior: split host into three.
        const Tri old = tris_[static_cast<std::size_t>(host)];
        tris_[static_cast<std::size_t>(host)].alive = false;
        const int t0 = make_tri(pi, old.v[1], old.v[2]);
        const int t1 = make_tri(pi, old.v[2], old.v[0]);
        const int t2 = make_tri(pi, old.v[0], old.v[1]);
        link(t0, 0, old.nbr[0]);
        link(t1, 0, old.nbr[1]);
        link(t2, 0, old.nbr[2]);
        link(t0, 2, t2);
        link(t1, 2, t0);
        link(t2, 2, t1);
        legalize(t0, 0, pi);
        legalize(t1, 0, pi);
        legalize(t2, 0, pi);
        return;
    }

    if (host >= 0) {
        // On an edge: split the host (and its twin, if any) in two.
        const Tri old = tris_[static_cast<std::size_t>(host)];
        const int a = old.v[(static_cast<std::size_t>(zero_edge) + 1) % 3];
        const int b = old.v[(static_cast<std::size_t>(zero_edge) + 2) % 3];
        const int c = old.v[static_cast<std::size_t>(zero_edge)];
        const int twin = old.nbr[static_cast<std::size_t>(zero_edge)];
        tris_[static_cast<std::size_t>(host)].alive = false;

        const int t0 = make_tri(pi, c, a);
        const int t1 = make_tri(pi, b, c);
        link(t0, 0, old.nbr[edge_index(host, c, a)]);
        link(t1, 0, old.nbr[edge_index(host, b, c)]);
        link(t0, 2, t1);  // shared edge (pi, c)

        if (twin >= 0) {
            const Tri tw = tris_[static_cast<std::size_t>(twin)];
            const int d = tw.v[static_cast<std::size_t>(edge_index(twin, b, a))];
            tris_[static_cast<std::size_t>(twin)].alive = false;
            const int t2 = make_tri(pi, a, d);
            const int t3 = make_tri(pi, d, b);
            link(t2, 0, tw.nbr[edge_index(twin, a, d)]);
            link(t3, 0, tw.nbr[edge_index(twin, d, b)]);
            link(t2, 2, t0);  // edge (pi, a)
            link(t3, 1, t1);  // edge (b, pi) vs (pi, b)
            link(t2, 1, t3);  // edge (pi, d)
            legalize(t2, 0, pi);
            legalize(t3, 0, pi);
        } else {
            tris_[static_cast<std::size_t>(t0)].nbr[1] = -1;
            tris_[static_cast<std::size_t>(t1)].nbr[2] = -1;
        }
        legalize(t0, 0, pi);
        legalize(t1, 0, pi);
        return;
    }

    // Outside the hull: fan to every strictly visible hull edge.
    struct HullEdge {
        int tri, edge, a, b;
    };
    std::vector<HullEdge> visible;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
        const Tri& tt = tris_[static_cast<std::size_t>(t)];
        if (!tt.alive) continue;
        for (int e = 0; e < 3; ++e) {
            if (tt.nbr[static_cast<std::size_t>(e)] != -1) continue;
            const int a = tt.v[(static_cast<std::size_t>(e) + 1) % 3];
            const int b = tt.v[(static_cast<std::size_t>(e) + 2) % 3];
            if (orient2d_sign(points_[static_cast<std::size_t>(a)],
                              points_[static_cast<std::size_t>(b)], p) < 0) {
                visible.push_back({t, e, a, b});
            }
        }
    }
    if (visible.empty()) throw Error("triangulation: could not attach outside point");

    std::vector<int> created;
    created.reserve(visible.size());
    for (const HullEdge& he : visible) {
        const int nt = make_tri(pi, he.b, he.a);  // reversed edge keeps CCW
        link(nt, 0, he.tri);
        created.push_back(nt);
    }
    // Stitch the new fan triangles along their shared (pi, vertex) edges.
    std::map<std::pair<int, int>, std::pair<int, int>> open;  // directed edge -> (tri, idx)
    for (int nt : created) {
        const Tri& tt = tris_[static_cast<std::size_t>(nt)];
        for (int e = 1; e < 3; ++e) {
            const int a = tt.v[(static_cast<std::size_t>(e) + 1) % 3];
            const int b = tt.v[(static_cast<std::size_t>(e) + 2) % 3];
            const auto rev = open.find({b, a});
            if (rev != open.end()) {
                tris_[static_cast<std::size_t>(nt)].nbr[static_cast<std::size_t>(e)] =
                    rev->second.first;
                tris_[static_cast<std::size_t>(rev->second.first)]
                    .nbr[static_cast<std::size_t>(rev->second.second)] = nt;
            } else {
                open[{a, b}] = {nt, e};
            }
        }
    }
    for (int nt : created) legalize(nt, 0, pi);
}

void Triangulation::legalize(int t, int edge, int pi) {
    // Edge `edge` of t is opposite pi; flip it when the far vertex lies
    // strictly inside the circumcircle.
    const int other = tris_[static_cast<std::size_t>(t)].nbr[static_cast<std::size_t>(edge)];
    if (other < 0) return;
    const Tri& tt = tris_[static_cast<std::size_t>(t)];
    const int a = tt.v[(static_cast<std::size_t>(edge) + 1) % 3];
    const int b = tt.v[(static_cast<std::size_t>(edge) + 2) % 3];
    const int far = tris_[static_cast<std::size_t>(other)]
                        .v[static_cast<std::size_t>(edge_index(other, b, a))];
    if (incircle_sign(points_[static_cast<std::size_t>(pi)],
                      points_[static_cast<std::size_t>(a)],
                      points_[static_cast<std::size_t>(b)],
                      points_[static_cast<std::size_t>(far)]) <= 0) {
        return;
    }
    // Flip: (pi,a,b)+(b,a,far) -> (pi,a,far)+(pi,far,b)
    const Tri old_t = tris_[static_cast<std::size_t>(t)];
    const Tri old_o = tris_[static_cast<std::size_t>(other)];
    tris_[static_cast<std::size_t>(t)].alive = false;
    tris_[static_cast<std::size_t>(other)].alive = false;

    const int n_af = old_o.nbr[static_cast<std::size_t>(edge_index(other, a, far))];
    const int n_fb = old_o.nbr[static_cast<std::size_t>(edge_index(other, far, b))];
    const int n_pa = old_t.nbr[static_cast<std::size_t>(edge_index(t, pi, a))];
    const int n_bp = old_t.nbr[static_cast<std::size_t>(edge_index(t, b, pi))];

    const int t1 = make_tri(pi, a, far);
    const int t2 = make_tri(pi, far, b);
    link(t1, 0, n_af);
    link(t1, 1, t2);
    link(t1, 2, n_pa);
    link(t2, 0, n_fb);
    link(t2, 2, n_bp);

    legalize(t1, 0, pi);
    legalize(t2, 0, pi);
}

int Triangulation::locate(const Vec2& q) const {
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
        const Tri& tt = tris_[static_cast<std::size_t>(t)];
        if (!tt.alive) continue;
        bool inside = true;
        for (int e = 0; e < 3 && inside; ++e) {
            const Vec2& a = points_[static_cast<std::size_t>(
                tt.v[(static_cast<std::size_t>(e) + 1) % 3])];
            const Vec2& b = points_[static_cast<std::size_t>(
                tt.v[(static_cast<std::size_t>(e) + 2) % 3])];
            if (orient2d_sign(a, b, q) < 0) inside = false;
        }
        if (inside) return t;
    }
    return -1;
}

int Triangulation::coincident_vertex(const Vec2& q, double tol) const {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (sq_dist(points_[i], q) <= tol * tol) return static_cast<int>(i);
    }
    return -1;
}

std::optional<std::array<std::pair<int, double>, 3>> Triangulation::barycentric(
    const Vec2& q) const {
    const int t = locate(q);
    if (t < 0) return std::nullopt;
    const Tri& tt = tris_[static_cast<std::size_t>(t)];
    const Vec2& a = points_[static_cast<std::size_t>(tt.v[0])];
    const Vec2& b = points_[static_cast<std::size_t>(tt.v[1])];
    const Vec2& c = points_[static_cast<std::size_t>(tt.v[2])];
    const double area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    const double wa = ((b.x - q.x) * (c.y - q.y) - (b.y - q.y) * (c.x - q.x)) / area;
    const double wb = ((c.x - q.x) * (a.y - q.y) - (c.y - q.y) * (a.x - q.x)) / area;
    const double wc = 1.0 - wa - wb;
    return std::array<std::pair<int, double>, 3>{
        std::pair<int, double>{tt.v[0], wa},
        std::pair<int, double>{tt.v[1], wb},
        std::pair<int, double>{tt.v[2], wc},
    };
}

std::vector<int> Triangulation::conflict_cavity(const Vec2& q, int seed) const {
    std::vector<int> cavity;
    std::vector<char> visited(tris_.size(), 0);
    std::vector<int> stack{seed};
    visited[static_cast<std::size_t>(seed)] = 1;
    while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        cavity.push_back(t);
        const Tri& tt = tris_[static_cast<std::size_t>(t)];
        for (int e = 0; e < 3; ++e) {
            const int o = tt.nbr[static_cast<std::size_t>(e)];
            if (o < 0 || visited[static_cast<std::size_t>(o)]) continue;
            const Tri& ot = tris_[static_cast<std::size_t>(o)];
            if (incircle_sign(points_[static_cast<std::size_t>(ot.v[0])],
                              points_[static_cast<std::size_t>(ot.v[1])],
                              points_[static_cast<std::size_t>(ot.v[2])], q) > 0) {
                visited[static_cast<std::size_t>(o)] = 1;
                stack.push_back(o);
            }
        }
    }
    std::sort(cavity.begin(), cavity.end());
    return cavity;
}

std::optional<std::vector<std::pair<int, double>>> Triangulation::sibson_weights(
    const Vec2& q) const {
    const int host = locate(q);
    if (host < 0) return std::nullopt;

    const double tol = 1e-9;
    if (const int v = coincident_vertex(q, tol); v >= 0) {
        return std::vector<std::pair<int, double>>{{v, 1.0}};
    }

    // Hull boundary: the Sibson limit is linear along the hull edge.
    {
        const Tri& tt = tris_[static_cast<std::size_t>(host)];
        for (int e = 0; e < 3; ++e) {
            if (tt.nbr[static_cast<std::size_t>(e)] != -1) continue;
            const int ai = tt.v[(static_cast<std::size_t>(e) + 1) % 3];
            const int bi = tt.v[(static_cast<std::size_t>(e) + 2) % 3];
            const Vec2& a = points_[static_cast<std::size_t>(ai)];
            const Vec2& b = points_[static_cast<std::size_t>(bi)];
            if (orient2d_sign(a, b, q) != 0) continue;
            const double len2 = sq_dist(a, b);
            double s = ((q.x - a.x) * (b.x - a.x) + (q.y - a.y) * (b.y - a.y)) / len2;
            s = std::clamp(s, 0.0, 1.0);
            return std::vector<std::pair<int, double>>{{ai, 1.0 - s}, {bi, s}};
        }
    }

    std::vector<int> cavity = conflict_cavity(q, host);
    std::vector<char> in_cavity(tris_.size(), 0);
    for (int t : cavity) in_cavity[static_cast<std::size_t>(t)] = 1;

    // Directed boundary edges of the cavity, chained into a CCW loop.
    struct BoundaryEdge {
        int to;
        int tri;
    };
    std::map<int, BoundaryEdge> next;  // from-vertex -> (to-vertex, owner tri)
    for (int t : cavity) {
        const Tri& tt = tris_[static_cast<std::size_t>(t)];
        for (int e = 0; e < 3; ++e) {
            const int o = tt.nbr[static_cast<std::size_t>(e)];
            if (o >= 0 && in_cavity[static_cast<std::size_t>(o)]) continue;
            const int a = tt.v[(static_cast<std::size_t>(e) + 1) % 3];
            const int b = tt.v[(static_cast<std::size_t>(e) + 2) % 3];
            next[a] = {b, t};
        }
    }
    if (next.empty()) throw Error("sibson: empty cavity boundary");

    std::vector<int> loop;
    std::vector<int> loop_tri;  // triangle owning edge loop[i] -> loop[i+1]
    const int start = next.begin()->first;
    int cur = start;
    do {
        const auto it = next.find(cur);
        if (it == next.end()) throw Error("sibson: open cavity boundary");
        loop.push_back(cur);
        loop_tri.push_back(it->second.tri);
        cur = it->second.to;
        if (loop.size() > next.size()) throw Error("sibson: cavity boundary not a loop");
    } while (cur != start);

    const std::size_t k = loop.size();
    // Circumcenters of the would-be new triangles (q, v_j, v_{j+1}).
    std::vector<Vec2> new_cc(k);
    for (std::size_t j = 0; j < k; ++j) {
        new_cc[j] = circumcenter(q, points_[static_cast<std::size_t>(loop[j])],
                                 points_[static_cast<std::size_t>(loop[(j + 1) % k])]);
    }

    std::vector<std::pair<int, double>> weights;
    weights.reserve(k);
    double total = 0;
    for (std::size_t j = 0; j < k; ++j) {
        const int vj = loop[j];
        const std::size_t jprev = (j + k - 1) % k;

        // Old cavity triangles around vj, walked from the boundary edge
        // (v_{j-1}, v_j) to the boundary edge (v_j, v_{j+1}).
        std::vector<Vec2> poly;
        poly.push_back(new_cc[jprev]);
        int t = loop_tri[jprev];
        bool closed = false;
        for (std::size_t guard = 0; guard <= cavity.size() && !closed; ++guard) {
            const Tri& tt = tris_[static_cast<std::size_t>(t)];
            poly.push_back(circumcenter(points_[static_cast<std::size_t>(tt.v[0])],
                                        points_[static_cast<std::size_t>(tt.v[1])],
                                        points_[static_cast<std::size_t>(tt.v[2])]));
            if (t == loop_tri[j]) {
                closed = true;
                break;
            }
            // Rotate around vj: cross the outgoing edge (vj, third) of t.
            int vi = 0;
            while (tt.v[static_cast<std::size_t>(vi)] != vj) ++vi;
            const int cross = tt.nbr[(static_cast<std::size_t>(vi) + 2) % 3];
            if (cross < 0 || !in_cavity[static_cast<std::size_t>(cross)]) {
                throw Error("sibson: broken fan walk");
            }
            t = cross;
        }
        if (!closed) throw Error("sibson: fan walk did not close");
        poly.push_back(new_cc[j]);

        // Shoelace; the polygon comes out clockwise, so negate.
        double area2 = 0;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Vec2& p1 = poly[i];
            const Vec2& p2 = poly[(i + 1) % poly.size()];
            area2 += p1.x * p2.y - p2.x * p1.y;
        }
        const double stolen = std::max(0.0, -0.5 * area2);
        weights.emplace_back(vj, stolen);
        total += stolen;
    }
    if (total <= 0) throw Error("sibson: degenerate stolen area");
    for (auto& [idx, w] : weights) w /= total;
    return weights;
}

}  // namespace citysense
