// Test-only reference implementations, independent of the library's
// computation paths: a direct O(n^2) DFT, a brute-force sliding median/MAD
// filter, and a rasterized Voronoi area-stealing oracle for Sibson weights.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "citysense/geo.hpp"

namespace oracles {

inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    constexpr double tau = 2.0 * 3.14159265358979323846;
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> sum = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = -tau * static_cast<double>(k) * static_cast<double>(t) /
                               static_cast<double>(n);
            sum += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = sum;
    }
    return out;
}

inline std::vector<double> naive_idft_real(const std::vector<std::complex<double>>& spec) {
    const std::size_t n = spec.size();
    std::vector<double> out(n);
    constexpr double tau = 2.0 * 3.14159265358979323846;
    for (std::size_t t = 0; t < n; ++t) {
        std::complex<double> sum = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double ang = tau * static_cast<double>(k) * static_cast<double>(t) /
                               static_cast<double>(n);
            sum += spec[k] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[t] = sum.real() / static_cast<double>(n);
    }
    return out;
}

/// Band-pass by the DFT definition: keep bins with low <= |f| <= high
/// (cycles/day), where bin k of an n-sample step_minutes series sits at
/// k * 1440 / (n * step_minutes); both half-spectrum mirrors are kept.
inline std::vector<double> naive_bandpass(const std::vector<double>& x, int step_minutes,
                                          double low, double high) {
    const std::size_t n = x.size();
    auto spec = naive_dft(x);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t mirror = k <= n / 2 ? k : n - k;
        const double f = static_cast<double>(mirror) * 1440.0 /
                         (static_cast<double>(n) * step_minutes);
        if (!(f >= low && f <= high)) spec[k] = 0;
    }
    return naive_idft_real(spec);
}

struct MedianFilterResult {
    std::vector<double> filtered;
    std::vector<std::size_t> outliers;
};

inline double sorted_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline MedianFilterResult sliding_median_mad(const std::vector<double>& x, int h, double k) {
    MedianFilterResult r;
    r.filtered = x;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - h);
        const std::ptrdiff_t hi = std::min(n, i + h + 1);
        std::vector<double> w(x.begin() + lo, x.begin() + hi);
        const double m = sorted_median(w);
        std::vector<double> dev;
        for (double v : w) dev.push_back(std::abs(v - m));
        const double s = 1.4826 * sorted_median(dev);
        if (std::abs(x[static_cast<std::size_t>(i)] - m) > k * s) {
            r.filtered[static_cast<std::size_t>(i)] = m;
            r.outliers.push_back(static_cast<std::size_t>(i));
        }
    }
    return r;
}

/// Rasterized Sibson oracle: Voronoi ownership is counted on a pixel grid
/// before and after inserting q; the weight of point i is the fraction of
/// q's cell stolen from i's cell.
struct PixelSibson {
    std::vector<double> weights;  // per input point
    std::size_t stolen_total = 0;
    bool touched_border = false;
};

inline PixelSibson pixel_sibson(const std::vector<citysense::Vec2>& pts,
                                const citysense::Vec2& q, int resolution) {
    double min_x = q.x, max_x = q.x, min_y = q.y, max_y = q.y;
    for (const auto& p : pts) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double span = std::max(max_x - min_x, max_y - min_y);
    // Generous margin: the inserted cell of an interior query is bounded by
    // its neighbours well within this.
    min_x -= span;
    max_x += span;
    min_y -= span;
    max_y += span;

    const double dx = (max_x - min_x) / resolution;
    const double dy = (max_y - min_y) / resolution;
    PixelSibson out;
    out.weights.assign(pts.size(), 0.0);
    std::vector<std::size_t> stolen(pts.size(), 0);

    for (int iy = 0; iy < resolution; ++iy) {
        const double y = min_y + (iy + 0.5) * dy;
        for (int ix = 0; ix < resolution; ++ix) {
            const double x = min_x + (ix + 0.5) * dx;
            std::size_t owner = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const double d2 = (pts[i].x - x) * (pts[i].x - x) +
                                  (pts[i].y - y) * (pts[i].y - y);
                if (d2 < best) {
                    best = d2;
                    owner = i;
                }
            }
            const double dq = (q.x - x) * (q.x - x) + (q.y - y) * (q.y - y);
            if (dq < best) {
                ++stolen[owner];
                if (ix == 0 || iy == 0 || ix == resolution - 1 || iy == resolution - 1) {
                    out.touched_border = true;
                }
            }
        }
    }
    for (std::size_t c : stolen) out.stolen_total += c;
    if (out.stolen_total > 0) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            out.weights[i] =
                static_cast<double>(stolen[i]) / static_cast<double>(out.stolen_total);
        }
    }
    return out;
}

/// Fresh scratch directory under the system temp root.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    const auto dir = std::filesystem::temp_directory_path() /
                     ("citysense_test_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace oracles
