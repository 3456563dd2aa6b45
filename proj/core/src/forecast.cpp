#include "citysense/forecast.hpp"

#include <algorithm>
#include <cmath>

#include "citysense/timeutil.hpp"

namespace citysense {

const std::vector<double>& BucketedEdf::samples_for(std::size_t bucket) const {
    const std::vector<double>& own = buckets.at(bucket);
    if (own.size() < static_cast<std::size_t>(min_bucket_count)) return pooled;
    return own;
}

double BucketedEdf::edf_value(std::size_t bucket, double x) const {
    const std::vector<double>& s = samples_for(bucket);
    const auto it = std::upper_bound(s.begin(), s.end(), x);
    return static_cast<double>(it - s.begin()) / static_cast<double>(s.size());
}

BucketedEdf build_edf(std::span<const double> residuals,
                      std::span<const std::int64_t> timestamps, int step_minutes,
                      int utc_offset_minutes, int min_bucket_count) {
    if (residuals.empty()) throw Error("build_edf: no residuals");
    if (residuals.size() != timestamps.size()) {
        throw std::invalid_argument("build_edf: residuals/timestamps size mismatch");
    }
    BucketedEdf edf;
    edf.step_minutes = step_minutes;
    edf.min_bucket_count = min_bucket_count;
    edf.buckets.assign(static_cast<std::size_t>(kMinutesPerDay / step_minutes), {});
    edf.pooled.assign(residuals.begin(), residuals.end());
    std::sort(edf.pooled.begin(), edf.pooled.end());
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        const int slot = local_slot(timestamps[i], utc_offset_minutes, step_minutes);
        edf.buckets[static_cast<std::size_t>(slot)].push_back(residuals[i]);
    }
    for (auto& bucket : edf.buckets) std::sort(bucket.begin(), bucket.end());
    return edf;
}

double sample_noise(const BucketedEdf& edf, std::size_t bucket, std::mt19937_64& rng) {
    const std::vector<double>& s = edf.samples_for(bucket);
    std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
    return s[pick(rng)];
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

ForecastResult monte_carlo_forecast(const ArxModel& model, std::span<const double> init_state,
                                    const CircularInput& u, const BucketedEdf& edf,
                                    std::int64_t forecast_start, int horizon, int n_traj,
                                    std::span<const double> levels, std::uint64_t seed,
                                    int utc_offset_minutes) {
    if (n_traj < 100) throw std::invalid_argument("monte_carlo_forecast: n_traj must be >= 100");
    if (horizon < 1) throw std::invalid_argument("monte_carlo_forecast: horizon must be >= 1");

    // Time-of-day bucket feeding each future step.
    std::vector<std::size_t> step_bucket(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
        const std::int64_t instant =
            forecast_start + static_cast<std::int64_t>(t) * edf.step_minutes * 60;
        step_bucket[static_cast<std::size_t>(t)] = static_cast<std::size_t>(
            local_slot(instant, utc_offset_minutes, edf.step_minutes));
    }

    // trajectories[t] collects the step-t values of every trajectory.
    std::vector<std::vector<double>> per_step(
        static_cast<std::size_t>(horizon),
        std::vector<double>(static_cast<std::size_t>(n_traj)));
    std::vector<double> noise(static_cast<std::size_t>(horizon));
    for (int k = 0; k < n_traj; ++k) {
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(k))));
        for (int t = 0; t < horizon; ++t) {
            noise[static_cast<std::size_t>(t)] =
                sample_noise(edf, step_bucket[static_cast<std::size_t>(t)], rng);
        }
        const std::vector<double> traj = simulate(model, init_state, u, noise, horizon);
        for (int t = 0; t < horizon; ++t) {
            per_step[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] =
                traj[static_cast<std::size_t>(t)];
        }
    }

    ForecastResult result;
    result.start = forecast_start;
    result.step_minutes = edf.step_minutes;
    result.trajectory_count = n_traj;
    result.levels.assign(levels.begin(), levels.end());
    std::sort(result.levels.begin(), result.levels.end());
    result.mean.resize(static_cast<std::size_t>(horizon));
    result.lower.assign(result.levels.size(),
                        std::vector<double>(static_cast<std::size_t>(horizon)));
    result.upper.assign(result.levels.size(),
                        std::vector<double>(static_cast<std::size_t>(horizon)));

    for (int t = 0; t < horizon; ++t) {
        std::vector<double>& vals = per_step[static_cast<std::size_t>(t)];
        std::sort(vals.begin(), vals.end());
        double sum = 0;
        for (double v : vals) sum += v;
        result.mean[static_cast<std::size_t>(t)] = sum / static_cast<double>(n_traj);
        for (std::size_t li = 0; li < result.levels.size(); ++li) {
            const double alpha = result.levels[li];
            // Smallest value covering >= alpha of the trajectories from
            // below (upper bound), and its mirror image (lower bound).
            const std::size_t m =
                static_cast<std::size_t>(std::ceil(alpha * n_traj - 1e-9));
            result.upper[li][static_cast<std::size_t>(t)] = vals[m - 1];
            result.lower[li][static_cast<std::size_t>(t)] = vals[vals.size() - m];
        }
    }
    return result;
}

}  // namespace citysense
