#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "citysense/model.hpp"

namespace citysense {

/// Raw readings grouped per (sensor, stressor), time sorted, deduplicated,
/// clipped to the covered interval.
struct MeasurementBatch {
    std::map<std::pair<std::string, std::string>, std::vector<RawReading>> groups;
    Interval covered;
    std::size_t dropped_out_of_interval = 0;
    std::size_t duplicates_collapsed = 0;

    const std::vector<RawReading>* find(const std::string& sensor_id,
                                        const std::string& stressor_name) const;
};

enum class RecordKind { forecast, band, value_map, reliability_map };

std::string record_kind_name(RecordKind kind);
std::optional<RecordKind> record_kind_from_name(const std::string& name);

/// One analytical output: a WKT geometry plus scalar metadata, as stored in
/// the analytical store.
struct AnalyticalRecord {
    RecordKind kind = RecordKind::forecast;
    std::string stressor;
    std::int64_t produced_at = 0;   // analytic instant, not wall clock
    std::string sensor_id;          // forecasts and bands
    double confidence_level = 0;    // bands only
    std::string method;             // interpolation or model identifier
    std::string wkt;
};

/// Network description CSV: header `sensor_id,latitude,longitude,elevation`.
std::vector<SensorMeta> load_network(const std::filesystem::path& path);

void write_network_csv(std::span<const SensorMeta> sensors, const std::filesystem::path& path);

/// Readings CSV: header `sensor_id,stressor,timestamp,value,unit`,
/// ISO-8601 UTC timestamps. Rows outside `interval` are dropped and counted;
/// duplicate (sensor, stressor, timestamp) keys collapse to the first seen.
MeasurementBatch load_readings(const std::filesystem::path& path, const Interval& interval);

/// Inverse of load_readings for already-clean batches.
void write_readings_csv(const MeasurementBatch& batch, const std::filesystem::path& path);

/// Appends records to the newline-delimited store (plus its sidecar index)
/// atomically: on failure the store is truncated back, so a batch is never
/// half visible. Single writer per store path (advisory lock). Every WKT
/// must pass validation first.
std::size_t store_records(std::span<const AnalyticalRecord> records,
                          const std::filesystem::path& store_path);

struct RecordFilter {
    std::optional<RecordKind> kind;
    std::optional<std::string> stressor;
    std::optional<Interval> produced_range;  // [start, end) on produced_at

    bool matches(const AnalyticalRecord& r) const;
};

/// All records matching every filter term, in produced_at order. A missing
/// store yields an empty result (with a warning on stderr), not an error.
std::vector<AnalyticalRecord> query_records(const std::filesystem::path& store_path,
                                            const RecordFilter& filter);

}  // namespace citysense
