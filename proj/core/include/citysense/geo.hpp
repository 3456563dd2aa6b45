#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citysense/forecast.hpp"
#include "citysense/model.hpp"

namespace citysense {

struct Vec2 {
    double x = 0;
    double y = 0;
};

/// Equirectangular tangent-plane projection around a reference point. At
/// city scale (~1 km) the distortion is far below sensor spacing.
struct LocalFrame {
    double ref_lat = 0;
    double ref_lon = 0;
    static constexpr double kEarthRadiusM = 6'371'000.0;
};

/// (lat, lon) degrees -> meters east/north of the reference point.
Vec2 project(const LocalFrame& frame, double lat, double lon);

/// Inverse of project.
void unproject(const LocalFrame& frame, const Vec2& xy, double& lat, double& lon);

/// Shortest decimal representation that round-trips to the same double.
/// Locale independent.
std::string format_coord(double v);

std::string wkt_point(double lat, double lon, double z);

/// Forecast geometry: time (epoch seconds) is the first coordinate, value
/// the second. One LINESTRING for the mean, one MULTILINESTRING with the
/// (lower, upper) pair per confidence level.
struct ForecastWkt {
    std::string mean_linestring;
    std::vector<std::pair<double, std::string>> band_multilinestrings;  // (level, wkt)
};
ForecastWkt wkt_forecast(const ForecastResult& result);

struct ValueGrid;  // mapgen.hpp

enum class SurfaceLayer { value, reliability };

/// Triangulated raster surface as POLYHEDRALSURFACE Z: every cell is split
/// along its lower-left to upper-right diagonal, z carries the chosen
/// layer. Shared vertices are emitted with identical coordinate text, so
/// adjacent triangles stitch exactly.
std::string wkt_surface(const ValueGrid& grid, const LocalFrame& frame, SurfaceLayer layer);

// Parsed WKT geometry. Coordinate nesting is normalized to
// parts[polygon_or_line][ring][vertex]; POINT uses parts[0][0][0],
// LINESTRING parts[0][0], MULTILINESTRING parts[0][line].
struct WktGeometry {
    enum class Type { point_z, linestring, multilinestring, polyhedralsurface_z };
    Type type;
    std::size_t dim = 2;
    std::vector<std::vector<std::vector<std::array<double, 3>>>> parts;
};

/// Parses the WKT subset emitted by this module (POINT Z, LINESTRING,
/// MULTILINESTRING, POLYHEDRALSURFACE Z). Returns nullopt on any grammar
/// violation.
std::optional<WktGeometry> parse_wkt(std::string_view text);

/// True iff the text conforms to the supported WKT grammar subset.
bool validate_wkt(std::string_view text);

}  // namespace citysense
