#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "citysense/ingest.hpp"
#include "citysense/model.hpp"

namespace citysense {

enum class PairState { ok, degraded, failed };

struct PairStatus {
    std::string sensor_id;
    std::string stressor;
    PairState state = PairState::ok;
    std::string reason;
    std::size_t outliers_removed = 0;
    std::size_t slots_imputed = 0;
    std::size_t records = 0;
    double elapsed_ms = 0;
};

struct RunReport {
    std::vector<PairStatus> pairs;  // one entry per input (sensor, stressor)
    std::size_t map_records = 0;
    std::size_t records_written = 0;
    Interval covered;
    double total_ms = 0;
};

/// The batch loop: read measurements, pre-process each air-quality
/// (sensor, stressor) pair, fit ARX models, bootstrap Monte Carlo forecasts,
/// build hourly maps for the trailing day, post-process back to original
/// units, and append everything to the analytical store. A failing pair is
/// reported and skipped, never aborting the batch. Unreadable inputs fail
/// globally before anything is written.
RunReport run_batch(const PipelineConfig& cfg, const std::filesystem::path& network_path,
                    const std::filesystem::path& readings_path,
                    const std::filesystem::path& store_path);

struct ForecastValidation {
    std::string stressor;
    double estimation_rmse = 0;  // standardized units
    double validation_rmse = 0;
    std::size_t pairs = 0;
};

/// Chronological split (no shuffling): ARX models are fitted on the leading
/// `split` fraction and scored one-step-ahead on both partitions, in
/// standardized units, pooled per stressor.
std::vector<ForecastValidation> validate_forecasting(const PipelineConfig& cfg,
                                                     const std::filesystem::path& network_path,
                                                     const std::filesystem::path& readings_path,
                                                     double split = 2.0 / 3.0);

struct MapValidation {
    std::string stressor;
    std::string method;
    double rmse = 0;
    std::size_t comparisons = 0;
};

/// Leave-one-out cross-validation of map generation: for every hour and
/// every sensor, the sensor's slot median is compared with the value the
/// chosen interpolator produces at its location from all other sensors
/// (corner virtual sensors injected for hull-bound methods).
std::vector<MapValidation> validate_maps(const PipelineConfig& cfg,
                                         const std::filesystem::path& network_path,
                                         const std::filesystem::path& readings_path,
                                         const std::vector<std::string>& methods);

}  // namespace citysense
