#include "citysense/geo.hpp"

#include <charconv>
#include <cmath>
#include <cctype>

#include "citysense/mapgen.hpp"

namespace citysense {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}

Vec2 project(const LocalFrame& frame, double lat, double lon) {
    if (std::abs(lat) >= 85.0) throw Error("project: latitude out of range");
    Vec2 p;
    p.x = LocalFrame::kEarthRadiusM * (lon - frame.ref_lon) * kDegToRad *
          std::cos(frame.ref_lat * kDegToRad);
    p.y = LocalFrame::kEarthRadiusM * (lat - frame.ref_lat) * kDegToRad;
    return p;
}

void unproject(const LocalFrame& frame, const Vec2& xy, double& lat, double& lon) {
    lat = frame.ref_lat + xy.y / (LocalFrame::kEarthRadiusM * kDegToRad);
    lon = frame.ref_lon +
          xy.x / (LocalFrame::kEarthRadiusM * kDegToRad * std::cos(frame.ref_lat * kDegToRad));
}

std::string format_coord(double v) {
    if (!std::isfinite(v)) throw Error("wkt: non-finite coordinate");
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string wkt_point(double lat, double lon, double z) {
    return "POINT Z (" + format_coord(lon) + " " + format_coord(lat) + " " +
           format_coord(z) + ")";
}

namespace {

void append_xy_sequence(std::string& out, const std::vector<double>& xs,
                        const std::vector<double>& ys) {
    out += "(";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += format_coord(xs[i]);
        out += " ";
        out += format_coord(ys[i]);
    }
    out += ")";
}

}  // namespace

ForecastWkt wkt_forecast(const ForecastResult& result) {
    const std::size_t horizon = result.mean.size();
    std::vector<double> times(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        times[t] = static_cast<double>(result.start +
                                       static_cast<std::int64_t>(t) * result.step_minutes * 60);
    }

    ForecastWkt out;
    out.mean_linestring = "LINESTRING ";
    append_xy_sequence(out.mean_linestring, times, result.mean);

    for (std::size_t li = 0; li < result.levels.size(); ++li) {
        std::string wkt = "MULTILINESTRING (";
        append_xy_sequence(wkt, times, result.lower[li]);
        wkt += ", ";
        append_xy_sequence(wkt, times, result.upper[li]);
        wkt += ")";
        out.band_multilinestrings.emplace_back(result.levels[li], std::move(wkt));
    }
    return out;
}

std::string wkt_surface(const ValueGrid& grid, const LocalFrame& frame, SurfaceLayer layer) {
    const int n1 = grid.spec.n1;
    const int n2 = grid.spec.n2;
    const std::vector<double>& z =
        layer == SurfaceLayer::value ? grid.values : grid.reliability;

    // One coordinate string per raster vertex, computed once, so that
    // triangles sharing a vertex share its exact text.
    std::vector<std::string> vertex(static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2));
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) {
            const Vec2 xy = grid.raster_point(i, j);
            double lat, lon;
            unproject(frame, xy, lat, lon);
            const std::size_t idx = grid.index(i, j);
            vertex[idx] = format_coord(lon) + " " + format_coord(lat) + " " +
                          format_coord(z[idx]);
        }
    }

    std::string out = "POLYHEDRALSURFACE Z (";
    bool first = true;
    auto add_triangle = [&](std::size_t a, std::size_t b, std::size_t c) {
        if (!first) out += ", ";
        first = false;
        out += "((";
        out += vertex[a];
        out += ", ";
        out += vertex[b];
        out += ", ";
        out += vertex[c];
        out += ", ";
        out += vertex[a];
        out += "))";
    };
    // Cell (i,j)-(i+1,j+1), diagonal from its lower-left to upper-right.
    for (int i = 0; i + 1 < n1; ++i) {
        for (int j = 0; j + 1 < n2; ++j) {
            const std::size_t ll = grid.index(i, j);
            const std::size_t lr = grid.index(i + 1, j);
            const std::size_t ul = grid.index(i, j + 1);
            const std::size_t ur = grid.index(i + 1, j + 1);
            add_triangle(ll, lr, ur);
            add_triangle(ll, ur, ul);
        }
    }
    out += ")";
    return out;
}

// ---------------------------------------------------------------------------
// WKT parsing

namespace {

struct Lexer {
    std::string_view s;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    bool peek(char c) {
        skip_ws();
        return pos < s.size() && s[pos] == c;
    }
    /// Case-insensitive keyword match.
    bool keyword(std::string_view kw) {
        skip_ws();
        if (pos + kw.size() > s.size()) return false;
        for (std::size_t i = 0; i < kw.size(); ++i) {
            if (std::toupper(static_cast<unsigned char>(s[pos + i])) != kw[i]) return false;
        }
        pos += kw.size();
        return true;
    }
    bool number(double& out) {
        skip_ws();
        const char* begin = s.data() + pos;
        const char* end = s.data() + s.size();
        const auto res = std::from_chars(begin, end, out);
        if (res.ec != std::errc() || !std::isfinite(out)) return false;
        pos += static_cast<std::size_t>(res.ptr - begin);
        return true;
    }
    bool done() {
        skip_ws();
        return pos == s.size();
    }
};

bool parse_vertex(Lexer& lx, std::size_t dim, std::array<double, 3>& v) {
    v = {0, 0, 0};
    for (std::size_t d = 0; d < dim; ++d) {
        if (!lx.number(v[d])) return false;
    }
    return true;
}

bool parse_vertex_list(Lexer& lx, std::size_t dim,
                       std::vector<std::array<double, 3>>& out) {
    if (!lx.eat('(')) return false;
    do {
        std::array<double, 3> v;
        if (!parse_vertex(lx, dim, v)) return false;
        out.push_back(v);
    } while (lx.eat(','));
    return lx.eat(')');
}

}  // namespace

std::optional<WktGeometry> parse_wkt(std::string_view text) {
    Lexer lx{text};
    WktGeometry g;

    if (lx.keyword("POINT")) {
        if (!lx.keyword("Z")) return std::nullopt;
        g.type = WktGeometry::Type::point_z;
        g.dim = 3;
        std::vector<std::array<double, 3>> pts;
        if (!parse_vertex_list(lx, 3, pts) || pts.size() != 1 || !lx.done()) {
            return std::nullopt;
        }
        g.parts = {{pts}};
        return g;
    }
    if (lx.keyword("LINESTRING")) {
        g.type = WktGeometry::Type::linestring;
        g.dim = 2;
        std::vector<std::array<double, 3>> pts;
        if (!parse_vertex_list(lx, 2, pts) || pts.size() < 2 || !lx.done()) {
            return std::nullopt;
        }
        g.parts = {{pts}};
        return g;
    }
    if (lx.keyword("MULTILINESTRING")) {
        g.type = WktGeometry::Type::multilinestring;
        g.dim = 2;
        if (!lx.eat('(')) return std::nullopt;
        std::vector<std::vector<std::array<double, 3>>> lines;
        do {
            std::vector<std::array<double, 3>> pts;
            if (!parse_vertex_list(lx, 2, pts) || pts.size() < 2) return std::nullopt;
            lines.push_back(std::move(pts));
        } while (lx.eat(','));
        if (!lx.eat(')') || !lx.done()) return std::nullopt;
        g.parts = {std::move(lines)};
        return g;
    }
    if (lx.keyword("POLYHEDRALSURFACE")) {
        if (!lx.keyword("Z")) return std::nullopt;
        g.type = WktGeometry::Type::polyhedralsurface_z;
        g.dim = 3;
        if (!lx.eat('(')) return std::nullopt;
        do {
            // One polygon: (ring, ring, ...); we accept any ring count >= 1.
            if (!lx.eat('(')) return std::nullopt;
            std::vector<std::vector<std::array<double, 3>>> rings;
            do {
                std::vector<std::array<double, 3>> pts;
                if (!parse_vertex_list(lx, 3, pts) || pts.size() < 4) return std::nullopt;
                if (pts.front() != pts.back()) return std::nullopt;  // ring must close
                rings.push_back(std::move(pts));
            } while (lx.eat(','));
            if (!lx.eat(')')) return std::nullopt;
            g.parts.push_back(std::move(rings));
        } while (lx.eat(','));
        if (!lx.eat(')') || !lx.done()) return std::nullopt;
        return g;
    }
    return std::nullopt;
}

bool validate_wkt(std::string_view text) { return parse_wkt(text).has_value(); }

}  // namespace citysense
