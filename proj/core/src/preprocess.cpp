#include "citysense/preprocess.hpp"

#include <algorithm>
#include <complex>
#include <mutex>
#include <numeric>

#include <fftw3.h>

#include <Eigen/Dense>

#include "citysense/timeutil.hpp"

namespace citysense {

std::size_t RegularSeries::present_count() const {
    return static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [](double v) { return !is_missing(v); }));
}

namespace {

double median_of(std::vector<double>& scratch) {
    const std::size_t n = scratch.size();
    const std::size_t mid = n / 2;
    std::nth_element(scratch.begin(), scratch.begin() + mid, scratch.end());
    const double hi = scratch[mid];
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(scratch.begin(), scratch.begin() + mid);
    return 0.5 * (lo + hi);
}

// Gaussian-consistent scale factor for the median absolute deviation.
constexpr double kMadScale = 1.4826;

}  // namespace

HampelResult hampel_filter(std::span<const double> values, int window_half, double k) {
    if (values.empty()) throw Error("hampel_filter: empty series");
    if (window_half < 1) throw std::invalid_argument("hampel_filter: window_half must be >= 1");
    if (!(k > 0)) throw std::invalid_argument("hampel_filter: k must be > 0");

    const std::size_t n = values.size();
    HampelResult result;
    result.filtered.assign(values.begin(), values.end());

    std::vector<double> window, deviations;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= static_cast<std::size_t>(window_half)
                                   ? i - static_cast<std::size_t>(window_half)
                                   : 0;
        const std::size_t hi = std::min(n, i + static_cast<std::size_t>(window_half) + 1);
        window.assign(values.begin() + static_cast<std::ptrdiff_t>(lo),
                      values.begin() + static_cast<std::ptrdiff_t>(hi));
        const double m = median_of(window);
        deviations.resize(window.size());
        for (std::size_t j = 0; j < window.size(); ++j) {
            deviations[j] = std::abs(values[lo + j] - m);
        }
        const double s = kMadScale * median_of(deviations);
        if (std::abs(values[i] - m) > k * s) {
            result.filtered[i] = m;
            result.outlier_indices.push_back(i);
        }
    }
    return result;
}

RegularSeries discretize(std::span<const RawReading> readings, int step_minutes,
                         const Interval& interval) {
    if (step_minutes < 1 || 1440 % step_minutes != 0) {
        throw std::invalid_argument("discretize: step_minutes must divide 1440");
    }
    const std::int64_t step_s = static_cast<std::int64_t>(step_minutes) * 60;
    if (interval.length() < step_s) {
        throw Error("discretize: interval shorter than one step");
    }
    const std::size_t slots = static_cast<std::size_t>(interval.length() / step_s);

    RegularSeries out;
    out.start = interval.start;
    out.step_minutes = step_minutes;
    out.values.assign(slots, kMissing);
    if (!readings.empty()) out.stressor = readings.front().stressor;

    std::vector<double> sums(slots, 0.0);
    std::vector<std::size_t> counts(slots, 0);
    for (const RawReading& r : readings) {
        if (!interval.contains(r.timestamp)) continue;
        const std::size_t slot = static_cast<std::size_t>((r.timestamp - interval.start) / step_s);
        sums[slot] += r.value;
        counts[slot] += 1;
    }
    for (std::size_t i = 0; i < slots; ++i) {
        if (counts[i] > 0) out.values[i] = sums[i] / static_cast<double>(counts[i]);
    }
    return out;
}

RegularSeries standardize(const RegularSeries& series) {
    std::vector<double> present;
    present.reserve(series.values.size());
    for (double v : series.values) {
        if (!is_missing(v)) present.push_back(v);
    }
    if (present.size() < 2) {
        throw Error("standardize: need at least 2 present values");
    }
    const double mean =
        std::accumulate(present.begin(), present.end(), 0.0) / static_cast<double>(present.size());
    double ss = 0;
    for (double v : present) ss += (v - mean) * (v - mean);
    const double stddev = std::sqrt(ss / static_cast<double>(present.size() - 1));

    RegularSeries out = series;
    if (stddev == 0.0) {
        for (double& v : out.values) {
            if (!is_missing(v)) v = 0.0;
        }
        out.scale = {mean, 1.0, true};
        return out;
    }
    for (double& v : out.values) {
        if (!is_missing(v)) v = (v - mean) / stddev;
    }
    out.scale = {mean, stddev, false};
    return out;
}

namespace {

// Least-squares AR(order) coefficients without intercept, fitted on rows
// whose full lag window is present. Returns zeros when the regressors are
// rank deficient (e.g. an all-zero degenerate series).
std::vector<double> fit_ar(const std::vector<double>& x, int order) {
    std::vector<std::size_t> rows;
    for (std::size_t t = static_cast<std::size_t>(order); t < x.size(); ++t) {
        bool ok = !is_missing(x[t]);
        for (int i = 1; ok && i <= order; ++i) {
            ok = !is_missing(x[t - static_cast<std::size_t>(i)]);
        }
        if (ok) rows.push_back(t);
    }
    if (rows.size() < 2 * static_cast<std::size_t>(order)) {
        throw Error("impute_missing: too few present values to fit the initial model");
    }
    Eigen::MatrixXd A(rows.size(), order);
    Eigen::VectorXd y(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        y(static_cast<Eigen::Index>(r)) = x[rows[r]];
        for (int i = 1; i <= order; ++i) {
            A(static_cast<Eigen::Index>(r), i - 1) = x[rows[r] - static_cast<std::size_t>(i)];
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < order) {
        return std::vector<double>(static_cast<std::size_t>(order), 0.0);
    }
    Eigen::VectorXd phi = qr.solve(y);
    return std::vector<double>(phi.data(), phi.data() + order);
}

}  // namespace

ImputeResult impute_missing(const RegularSeries& series, int init_order) {
    if (init_order < 1) throw std::invalid_argument("impute_missing: init_order must be >= 1");
    const std::size_t present = series.present_count();
    if (present < 2 * static_cast<std::size_t>(init_order)) {
        throw Error("impute_missing: fewer than 2*init_order present values");
    }

    ImputeResult result;
    result.series = series;
    std::vector<double>& x = result.series.values;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (is_missing(x[i])) result.imputed_indices.push_back(i);
    }
    if (result.imputed_indices.empty()) return result;

    constexpr int kMaxIterations = 10;
    constexpr double kTolerance = 1e-6;
    std::vector<double> coeffs = fit_ar(series.values, init_order);

    std::vector<double> previous(result.imputed_indices.size(),
                                 std::numeric_limits<double>::infinity());
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        // Fill front to back so later gaps can use already-imputed history.
        for (std::size_t idx : result.imputed_indices) {
            if (idx < static_cast<std::size_t>(init_order)) {
                x[idx] = 0.0;  // standardized mean; no history to predict from
                continue;
            }
            double pred = 0;
            for (int i = 1; i <= init_order; ++i) {
                pred += coeffs[static_cast<std::size_t>(i - 1)] *
                        x[idx - static_cast<std::size_t>(i)];
            }
            x[idx] = pred;
        }
        double max_change = 0;
        for (std::size_t j = 0; j < result.imputed_indices.size(); ++j) {
            max_change = std::max(max_change, std::abs(x[result.imputed_indices[j]] - previous[j]));
            previous[j] = x[result.imputed_indices[j]];
        }
        if (max_change < kTolerance) break;
        coeffs = fit_ar(x, init_order);
    }
    return result;
}

namespace {

// FFTW plan creation/destruction is not thread safe; executions on distinct
// plans are.
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

RegularSeries sinc_smooth(const RegularSeries& series, double low_cut, double high_cut) {
    const std::size_t n = series.values.size();
    if (n < 4) throw Error("sinc_smooth: series shorter than 4 samples");
    for (double v : series.values) {
        if (is_missing(v)) throw Error("sinc_smooth: series still has missing values");
    }
    const double nyquist = 0.5 * kMinutesPerDay / series.step_minutes;  // cycles/day
    if (!(low_cut >= 0 && low_cut < high_cut && high_cut <= nyquist)) {
        throw Error("sinc_smooth: cut frequencies out of range");
    }

    const std::size_t nbins = n / 2 + 1;
    std::vector<std::complex<double>> spectrum(nbins);
    std::vector<double> buf(series.values);

    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_plan plan = fftw_plan_dft_r2c_1d(
            static_cast<int>(n), buf.data(),
            reinterpret_cast<fftw_complex*>(spectrum.data()), FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    // Bin k sits at k/(n*step) cycles per minute.
    const double bin_hz_day =
        static_cast<double>(kMinutesPerDay) / (static_cast<double>(n) * series.step_minutes);
    for (std::size_t k = 0; k < nbins; ++k) {
        const double f = static_cast<double>(k) * bin_hz_day;
        const bool keep = f >= low_cut && f <= high_cut;
        if (!keep) spectrum[k] = 0.0;
    }

    RegularSeries out = series;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_plan plan = fftw_plan_dft_c2r_1d(
            static_cast<int>(n), reinterpret_cast<fftw_complex*>(spectrum.data()),
            out.values.data(), FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : out.values) v *= inv_n;
    return out;
}

TypicalProfile typical_profile(const RegularSeries& history, int window_days,
                               int utc_offset_minutes) {
    if (window_days < 1) throw std::invalid_argument("typical_profile: window_days must be >= 1");
    const std::size_t per_day = static_cast<std::size_t>(kMinutesPerDay / history.step_minutes);
    const std::size_t needed = per_day * static_cast<std::size_t>(window_days);
    if (history.values.size() < needed) {
        throw Error("typical_profile: history shorter than the averaging window");
    }
    const std::size_t begin = history.values.size() - needed;

    TypicalProfile profile;
    profile.step_minutes = history.step_minutes;
    profile.window_days = window_days;
    profile.as_of = history.time_at(history.values.size());
    profile.slots.assign(per_day, 0.0);
    std::vector<std::size_t> counts(per_day, 0);

    for (std::size_t i = begin; i < history.values.size(); ++i) {
        const double v = history.values[i];
        if (is_missing(v)) throw Error("typical_profile: history still has missing values");
        const int slot = local_slot(history.time_at(i), utc_offset_minutes, history.step_minutes);
        profile.slots[static_cast<std::size_t>(slot)] += v;
        counts[static_cast<std::size_t>(slot)] += 1;
    }
    for (std::size_t s = 0; s < per_day; ++s) {
        if (counts[s] == 0) throw Error("typical_profile: empty time-of-day slot");
        profile.slots[s] /= static_cast<double>(counts[s]);
    }
    return profile;
}

std::vector<double> invert_scaling(std::span<const double> values, const ScaleMeta& scale) {
    std::vector<double> out(values.begin(), values.end());
    for (double& v : out) v = v * scale.stddev + scale.mean;
    return out;
}

}  // namespace citysense
