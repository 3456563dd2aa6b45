#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "citysense/geo.hpp"
#include "citysense/model.hpp"

namespace citysense {

/// One scattered datum: a sensor (or virtual sensor) position in the local
/// planar frame with its collapsed scalar value.
struct ScatteredPoint {
    std::string sensor_id;
    Vec2 position;
    double value = 0;
    bool is_virtual = false;
};

enum class InterpMethod { nearest, natural, linear, idw };

InterpMethod interp_method_from_name(const std::string& name);
std::string interp_method_name(InterpMethod method);

/// Raster placement derived from a MapGridSpec: raster point (i,j) is the
/// origin corner displaced i/(n1-1) of edge 1 along the bearing and
/// j/(n2-1) of edge 2 along bearing+90°.
struct MapGeometry {
    MapGridSpec spec;
    Vec2 origin;  // projected origin corner
    Vec2 axis1;   // unit vector along the bearing
    Vec2 axis2;   // unit vector along bearing + 90° (clockwise)

    MapGeometry(const MapGridSpec& spec, const LocalFrame& frame);
    Vec2 raster_point(int i, int j) const;
    std::array<Vec2, 4> corners() const;
};

/// Interpolated raster with its paired reliability raster, row-major over
/// (i, j) with j fastest.
struct ValueGrid {
    MapGridSpec spec;
    Vec2 origin;
    Vec2 axis1;
    Vec2 axis2;
    std::vector<double> values;       // n1*n2
    std::vector<double> reliability;  // n1*n2, each in (0,1]
    Stressor stressor;
    std::int64_t slot_start = 0;
    std::string method;

    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(spec.n2) +
               static_cast<std::size_t>(j);
    }
    Vec2 raster_point(int i, int j) const {
        const double f1 = spec.edge1_m * i / (spec.n1 - 1);
        const double f2 = spec.edge2_m * j / (spec.n2 - 1);
        return {origin.x + axis1.x * f1 + axis2.x * f2,
                origin.y + axis1.y * f1 + axis2.y * f2};
    }
};

/// Reduces one sensor's readings in a time slot to a single scalar: the
/// median (mean of the two middle values for even counts). An empty slot
/// falls back to the median over the two adjacent slots when allowed;
/// otherwise the sensor is absent from the map input.
std::optional<double> collapse_to_scalar(std::span<const double> slot_values,
                                         std::span<const double> prev_slot,
                                         std::span<const double> next_slot,
                                         bool neighbour_fallback);

/// Value of the closest point; exact distance ties go to the lowest
/// sensor_id. Defined on the whole plane.
double interp_nearest(std::span<const ScatteredPoint> points, const Vec2& q);

/// Inverse-distance weighting with exponent n; a query within 1e-9 m of a
/// data point returns that point's value exactly. Defined on the whole
/// plane. Weights are evaluated in log space so large exponents cannot
/// overflow.
double interp_idw(std::span<const ScatteredPoint> points, const Vec2& q, double n);

/// Piecewise-linear interpolation over the Delaunay triangulation;
/// absent outside the convex hull.
std::optional<double> interp_linear(std::span<const ScatteredPoint> points, const Vec2& q);

/// Sibson natural-neighbour interpolation; absent outside the convex hull.
std::optional<double> interp_natural(std::span<const ScatteredPoint> points, const Vec2& q);

/// Appends one virtual sensor per map corner with an inverse-square
/// extrapolated value, so hull-bound methods cover the whole raster.
std::vector<ScatteredPoint> inject_corner_virtual_sensors(
    std::span<const ScatteredPoint> points, const std::array<Vec2, 4>& corners);

/// Appends user-supplied virtual sensors; a position duplicating an
/// existing point is an error.
std::vector<ScatteredPoint> inject_virtual_sensors(
    std::span<const ScatteredPoint> points, std::span<const ScatteredPoint> extra);

/// Distance-based certainty r(Q) = max_i exp(-d(Q,P_i)^2 / (2c)) over the
/// real (non-virtual) sensors.
double reliability_at(std::span<const ScatteredPoint> points, const Vec2& q, double c_xtype);

/// Fills the whole raster with interpolated values and reliabilities.
/// Hull-bound methods (natural, linear) get corner virtual sensors injected
/// first.
ValueGrid generate_map(std::span<const ScatteredPoint> points, const MapGridSpec& spec,
                       const LocalFrame& frame, InterpMethod method, double c_xtype,
                       double idw_exponent = 2.0);

}  // namespace citysense
