#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "citysense/model.hpp"

namespace citysense {

/// Missing slots are quiet NaNs.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

struct ScaleMeta {
    double mean = 0.0;
    double stddev = 1.0;
    bool degenerate = false;  // set when the sample std was zero
};

/// Constant-step series on a UTC time grid; NaN marks missing slots.
struct RegularSeries {
    std::int64_t start = 0;  // epoch seconds of slot 0
    int step_minutes = 60;
    std::vector<double> values;
    ScaleMeta scale;
    Stressor stressor;

    std::size_t size() const { return values.size(); }
    std::int64_t time_at(std::size_t i) const {
        return start + static_cast<std::int64_t>(i) * step_minutes * 60;
    }
    std::size_t present_count() const;
};

/// Periodic time-of-day profile; indexable cyclically for any integer slot.
struct TypicalProfile {
    int step_minutes = 60;
    std::vector<double> slots;  // 1440/step_minutes entries
    int window_days = 30;
    std::int64_t as_of = 0;

    double at(long slot_index) const {
        const long n = static_cast<long>(slots.size());
        long i = slot_index % n;
        if (i < 0) i += n;
        return slots[static_cast<std::size_t>(i)];
    }
};

struct HampelResult {
    std::vector<double> filtered;
    std::vector<std::size_t> outlier_indices;
};

/// Sliding-window median test: a sample deviating from its window median by
/// more than k times the MAD-based std estimate is replaced by that median.
/// Windows are truncated at the series edges.
HampelResult hampel_filter(std::span<const double> values, int window_half, double k);

/// Averages readings into constant-step slots over [interval.start,
/// interval.end); slots with no readings become missing.
RegularSeries discretize(std::span<const RawReading> readings, int step_minutes,
                         const Interval& interval);

/// Centers and normalizes present values to mean 0, sample std 1, recording
/// the transform in scale. A zero-std series becomes all zeros with the
/// degenerate flag set.
RegularSeries standardize(const RegularSeries& series);

struct ImputeResult {
    RegularSeries series;  // no missing values
    std::vector<std::size_t> imputed_indices;
};

/// Fills missing slots with one-step predictions of an AR(init_order) model
/// fitted by least squares, iterating fit+fill until the imputed values
/// settle. Leading slots with no usable history are filled with 0 (the
/// standardized mean).
ImputeResult impute_missing(const RegularSeries& series, int init_order);

/// Ideal band-pass via the DFT: keeps bins with low_cut <= |f| <= high_cut
/// (cycles/day), zeroes the rest, transforms back. Circular semantics; DC
/// survives only when low_cut is 0.
RegularSeries sinc_smooth(const RegularSeries& series, double low_cut, double high_cut);

/// Mean value per local time-of-day slot over the trailing window_days of
/// history.
TypicalProfile typical_profile(const RegularSeries& history, int window_days,
                               int utc_offset_minutes);

/// Maps standardized values back to original units: v -> v*std + mean.
std::vector<double> invert_scaling(std::span<const double> values, const ScaleMeta& scale);

}  // namespace citysense
