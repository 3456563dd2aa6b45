#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "citysense/geo.hpp"
#include "citysense/model.hpp"

namespace citysense {

/// Ground truth for one stressor: a smooth spatial field, a diurnal profile
/// feeding an ARX(2,2) latent process at hourly steps, and the sampling
/// cadence of the virtual hardware.
struct StressorTruth {
    Stressor stressor;
    int cadence_minutes = 10;

    std::array<double, 2> ar{0.5, 0.2};   // a_1, a_2
    std::array<double, 2> ex{1.0, 0.3};   // b_0, b_1
    double noise_std = 0.2;
    std::array<double, 24> diurnal{};     // exogenous hourly profile (local time)

    struct Bump {
        double amp = 0, cx = 0, cy = 0, sigma = 1;
    };
    double field_base = 0;
    double field_grad_x = 0;  // per meter
    double field_grad_y = 0;
    std::vector<Bump> bumps;

    double field(double x, double y) const;
};

struct SynthSpec {
    int sensor_count = 10;
    double extent_m = 1000;
    double min_spacing_m = 50;
    int days = 35;
    std::int64_t start_epoch = 1459468800;  // 2016-04-01T00:00:00Z
    double dropout = 0.0;
    double outlier_rate = 0.0;
    double outlier_sigma = 10.0;  // spike size in units of the series std
    std::vector<StressorTruth> stressors;
    std::uint64_t seed = 1;
    double base_lat = 47.49;
    double base_lon = 19.01;
    int utc_offset_minutes = 60;
};

/// The full seven-stressor truth set with Table-consistent cadences.
std::vector<StressorTruth> default_stressor_truths();

struct OutlierEvent {
    std::string sensor_id;
    std::string stressor;
    std::int64_t timestamp = 0;
    double clean_value = 0;
    double spiked_value = 0;
};

struct GroundTruth {
    SynthSpec spec;
    std::vector<SensorMeta> sensors;
    std::vector<Vec2> positions;  // planar, frame at (base_lat, base_lon)
    std::vector<OutlierEvent> outliers;
    std::size_t readings_emitted = 0;
    std::size_t readings_dropped = 0;
};

/// Writes the network CSV, the readings CSV and a JSON ground-truth record;
/// deterministic per seed. Throws when the spacing constraint cannot be
/// met.
GroundTruth generate(const SynthSpec& spec, const std::filesystem::path& network_path,
                     const std::filesystem::path& readings_path,
                     const std::filesystem::path& truth_path);

/// The clean (outlier- and dropout-free) reading value for one sensor at one
/// instant; the oracle the readings are sampled from.
double ground_truth_value(const SynthSpec& spec, const StressorTruth& truth,
                          const Vec2& position, std::span<const double> latent,
                          std::int64_t timestamp);

/// The latent hourly ARX path for one (sensor, stressor) pair; deterministic
/// per (spec.seed, sensor index, stressor index).
std::vector<double> latent_path(const SynthSpec& spec, const StressorTruth& truth,
                                std::size_t sensor_index, std::size_t stressor_index);

}  // namespace citysense
