#include "citysense/mapgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "citysense/delaunay.hpp"

namespace citysense {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
constexpr double kCoincidentM = 1e-9;  // zero-distance truncation threshold
}  // namespace

InterpMethod interp_method_from_name(const std::string& name) {
    if (name == "nearest") return InterpMethod::nearest;
    if (name == "natural") return InterpMethod::natural;
    if (name == "linear") return InterpMethod::linear;
    if (name == "idw") return InterpMethod::idw;
    throw Error("unknown interpolation method: " + name);
}

std::string interp_method_name(InterpMethod method) {
    switch (method) {
        case InterpMethod::nearest: return "nearest";
        case InterpMethod::natural: return "natural";
        case InterpMethod::linear: return "linear";
        case InterpMethod::idw: return "idw";
    }
    return "?";
}

MapGeometry::MapGeometry(const MapGridSpec& s, const LocalFrame& frame) : spec(s) {
    origin = project(frame, spec.origin_lat, spec.origin_lon);
    const double b = spec.bearing_deg * kDegToRad;
    axis1 = {std::sin(b), std::cos(b)};   // bearing measured clockwise from north
    axis2 = {std::cos(b), -std::sin(b)};  // 90° clockwise of axis1
}

Vec2 MapGeometry::raster_point(int i, int j) const {
    const double f1 = spec.edge1_m * i / (spec.n1 - 1);
    const double f2 = spec.edge2_m * j / (spec.n2 - 1);
    return {origin.x + axis1.x * f1 + axis2.x * f2,
            origin.y + axis1.y * f1 + axis2.y * f2};
}

std::array<Vec2, 4> MapGeometry::corners() const {
    return {raster_point(0, 0), raster_point(spec.n1 - 1, 0),
            raster_point(spec.n1 - 1, spec.n2 - 1), raster_point(0, spec.n2 - 1)};
}

std::optional<double> collapse_to_scalar(std::span<const double> slot_values,
                                         std::span<const double> prev_slot,
                                         std::span<const double> next_slot,
                                         bool neighbour_fallback) {
    auto median = [](std::vector<double> v) -> double {
        const std::size_t mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
        const double hi = v[mid];
        if (v.size() % 2 == 1) return hi;
        const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        return 0.5 * (lo + hi);
    };
    if (!slot_values.empty()) {
        return median({slot_values.begin(), slot_values.end()});
    }
    if (neighbour_fallback && (!prev_slot.empty() || !next_slot.empty())) {
        std::vector<double> merged(prev_slot.begin(), prev_slot.end());
        merged.insert(merged.end(), next_slot.begin(), next_slot.end());
        return median(std::move(merged));
    }
    return std::nullopt;
}

namespace {
double sq_dist(const Vec2& a, const Vec2& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}
}  // namespace

double interp_nearest(std::span<const ScatteredPoint> points, const Vec2& q) {
    if (points.empty()) throw Error("interp_nearest: no points");
    const ScatteredPoint* best = &points[0];
    double best_d2 = sq_dist(points[0].position, q);
    for (const ScatteredPoint& p : points.subspan(1)) {
        const double d2 = sq_dist(p.position, q);
        if (d2 < best_d2 || (d2 == best_d2 && p.sensor_id < best->sensor_id)) {
            best = &p;
            best_d2 = d2;
        }
    }
    return best->value;
}

double interp_idw(std::span<const ScatteredPoint> points, const Vec2& q, double n) {
    if (points.empty()) throw Error("interp_idw: no points");
    if (!(n > 0)) throw std::invalid_argument("interp_idw: exponent must be > 0");

    double min_d2 = std::numeric_limits<double>::infinity();
    for (const ScatteredPoint& p : points) {
        const double d2 = sq_dist(p.position, q);
        if (d2 < min_d2) min_d2 = d2;
        if (d2 < kCoincidentM * kCoincidentM) return p.value;  // truncation rule
    }
    // w_i = d_i^-n, normalized against the closest point so that huge
    // exponents stay in range: w_i / w_min = exp(-n/2 * (ln d_i^2 - ln d_min^2)).
    const double log_min = std::log(min_d2);
    double wsum = 0, zsum = 0;
    for (const ScatteredPoint& p : points) {
        const double w = std::exp(-0.5 * n * (std::log(sq_dist(p.position, q)) - log_min));
        wsum += w;
        zsum += w * p.value;
    }
    return zsum / wsum;
}

namespace {

std::vector<Vec2> positions_of(std::span<const ScatteredPoint> points) {
    std::vector<Vec2> pos(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) pos[i] = points[i].position;
    return pos;
}

}  // namespace

std::optional<double> interp_linear(std::span<const ScatteredPoint> points, const Vec2& q) {
    if (points.size() < 3) throw Error("interp_linear: need at least 3 points");
    Triangulation tri(positions_of(points));
    const auto bary = tri.barycentric(q);
    if (!bary) return std::nullopt;
    double z = 0;
    for (const auto& [idx, w] : *bary) z += w * points[static_cast<std::size_t>(idx)].value;
    return z;
}

std::optional<double> interp_natural(std::span<const ScatteredPoint> points, const Vec2& q) {
    if (points.size() < 3) throw Error("interp_natural: need at least 3 points");
    Triangulation tri(positions_of(points));
    const auto weights = tri.sibson_weights(q);
    if (!weights) return std::nullopt;
    double z = 0;
    for (const auto& [idx, w] : *weights) z += w * points[static_cast<std::size_t>(idx)].value;
    return z;
}

std::vector<ScatteredPoint> inject_corner_virtual_sensors(
    std::span<const ScatteredPoint> points, const std::array<Vec2, 4>& corners) {
    if (points.empty()) throw Error("inject_corner_virtual_sensors: no points");
    std::vector<ScatteredPoint> out(points.begin(), points.end());
    int n = 0;
    for (const Vec2& corner : corners) {
        ScatteredPoint vp;
        vp.sensor_id = "virtual_corner_" + std::to_string(n++);
        vp.position = corner;
        vp.value = interp_idw(points, corner, 2.0);
        vp.is_virtual = true;
        out.push_back(std::move(vp));
    }
    return out;
}

std::vector<ScatteredPoint> inject_virtual_sensors(std::span<const ScatteredPoint> points,
                                                   std::span<const ScatteredPoint> extra) {
    std::vector<ScatteredPoint> out(points.begin(), points.end());
    for (const ScatteredPoint& v : extra) {
        if (!std::isfinite(v.value) || !std::isfinite(v.position.x) ||
            !std::isfinite(v.position.y)) {
            throw Error("inject_virtual_sensors: non-finite virtual sensor");
        }
        for (const ScatteredPoint& p : out) {
            if (sq_dist(p.position, v.position) < kCoincidentM * kCoincidentM) {
                throw Error("inject_virtual_sensors: position duplicates sensor " +
                            p.sensor_id);
            }
        }
        ScatteredPoint added = v;
        added.is_virtual = true;
        out.push_back(std::move(added));
    }
    return out;
}

double reliability_at(std::span<const ScatteredPoint> points, const Vec2& q, double c_xtype) {
    if (!(c_xtype > 0)) throw std::invalid_argument("reliability_at: c must be > 0");
    double best = 0;
    bool any_real = false;
    for (const ScatteredPoint& p : points) {
        if (p.is_virtual) continue;  // virtual sensors carry no certainty
        any_real = true;
        best = std::max(best, std::exp(-sq_dist(p.position, q) / (2.0 * c_xtype)));
    }
    if (!any_real) throw Error("reliability_at: no real sensors");
    // Keep the raster strictly positive even when every sensor is far away.
    return std::max(best, std::numeric_limits<double>::min());
}

ValueGrid generate_map(std::span<const ScatteredPoint> points, const MapGridSpec& spec,
                       const LocalFrame& frame, InterpMethod method, double c_xtype,
                       double idw_exponent) {
    if (points.empty()) throw Error("generate_map: no points");
    const MapGeometry geom(spec, frame);

    std::vector<ScatteredPoint> work(points.begin(), points.end());
    const bool hull_bound = method == InterpMethod::natural || method == InterpMethod::linear;
    if (hull_bound) {
        work = inject_corner_virtual_sensors(points, geom.corners());
    }

    ValueGrid grid;
    grid.spec = spec;
    grid.origin = geom.origin;
    grid.axis1 = geom.axis1;
    grid.axis2 = geom.axis2;
    grid.method = interp_method_name(method);
    grid.values.resize(static_cast<std::size_t>(spec.n1) * static_cast<std::size_t>(spec.n2));
    grid.reliability.resize(grid.values.size());

    std::optional<Triangulation> tri;
    if (hull_bound) tri.emplace(positions_of(work));

    for (int i = 0; i < spec.n1; ++i) {
        for (int j = 0; j < spec.n2; ++j) {
            const Vec2 q = geom.raster_point(i, j);
            double z = 0;
            switch (method) {
                case InterpMethod::nearest:
                    z = interp_nearest(work, q);
                    break;
                case InterpMethod::idw:
                    z = interp_idw(work, q, idw_exponent);
                    break;
                case InterpMethod::linear: {
                    const auto bary = tri->barycentric(q);
                    if (!bary) throw Error("generate_map: raster point escaped the hull");
                    z = 0;
                    for (const auto& [idx, w] : *bary) {
                        z += w * work[static_cast<std::size_t>(idx)].value;
                    }
                    break;
                }
                case InterpMethod::natural: {
                    const auto weights = tri->sibson_weights(q);
                    if (!weights) throw Error("generate_map: raster point escaped the hull");
                    z = 0;
                    for (const auto& [idx, w] : *weights) {
                        z += w * work[static_cast<std::size_t>(idx)].value;
                    }
                    break;
                }
            }
            grid.values[grid.index(i, j)] = z;
            grid.reliability[grid.index(i, j)] = reliability_at(points, q, c_xtype);
        }
    }
    return grid;
}

}  // namespace citysense
