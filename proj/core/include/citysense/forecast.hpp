#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "citysense/timeseries.hpp"

namespace citysense {

/// One empirical residual distribution per time-of-day bucket. Buckets with
/// fewer than min_bucket_count samples fall back to the pooled EDF, so every
/// bucket can always be sampled.
struct BucketedEdf {
    int step_minutes = 60;
    int min_bucket_count = 10;
    std::vector<std::vector<double>> buckets;  // sorted residuals per bucket
    std::vector<double> pooled;                // sorted, all residuals

    std::size_t bucket_count() const { return buckets.size(); }

    /// The sample a bucket actually draws from (its own, or pooled).
    const std::vector<double>& samples_for(std::size_t bucket) const;

    /// F̂(x) for one bucket: fraction of its effective sample <= x.
    double edf_value(std::size_t bucket, double x) const;
};

/// Assigns each residual to the local time-of-day bucket of its timestamp.
BucketedEdf build_edf(std::span<const double> residuals,
                      std::span<const std::int64_t> timestamps, int step_minutes,
                      int utc_offset_minutes, int min_bucket_count = 10);

/// Uniformly random element of the bucket's residual sample (bootstrap).
double sample_noise(const BucketedEdf& edf, std::size_t bucket, std::mt19937_64& rng);

struct ForecastResult {
    std::int64_t start = 0;  // instant of the first forecast step
    int step_minutes = 60;
    std::vector<double> mean;
    std::vector<double> levels;                // ascending
    std::vector<std::vector<double>> lower;    // [level][step]
    std::vector<std::vector<double>> upper;    // [level][step]
    int trajectory_count = 0;
    Stressor stressor;
    std::string sensor_id;
};

/// Simulates n_traj bootstrap trajectories and reduces them to a mean
/// forecast plus per-level pointwise prediction bands. The mean is the
/// trajectory average, never the noiseless linear prediction. Deterministic
/// for a fixed seed, and independent of how trajectories are scheduled:
/// every trajectory owns a seeded RNG stream.
ForecastResult monte_carlo_forecast(const ArxModel& model, std::span<const double> init_state,
                                    const CircularInput& u, const BucketedEdf& edf,
                                    std::int64_t forecast_start, int horizon, int n_traj,
                                    std::span<const double> levels, std::uint64_t seed,
                                    int utc_offset_minutes);

}  // namespace citysense
