#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace citysense {

/// Domain-level failure (bad input files, degenerate data, ...).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The seven air-quality stressors the analytics operate on, plus a
// passthrough for anything else the network measures (traffic histograms
// etc.) which is stored but never modelled.
enum class StressorKind {
    particulate_matter,
    temperature,
    uvb_index,
    ambient_light,
    air_pressure,
    relative_humidity,
    carbon_monoxide,
    other,
};

struct Stressor {
    StressorKind kind = StressorKind::other;
    std::string name;  // canonical for known kinds, free-form otherwise
    std::string unit;

    /// Maps a name from an input file to a stressor; unknown names become
    /// kind `other` with the name and unit preserved.
    static Stressor from_name(std::string_view name, std::string_view unit = "");

    bool air_quality() const { return kind != StressorKind::other; }

    bool operator==(const Stressor& rhs) const { return name == rhs.name; }
    bool operator<(const Stressor& rhs) const { return name < rhs.name; }
};

/// The seven modelled stressors with their default units.
const std::vector<Stressor>& air_quality_stressors();

struct SensorMeta {
    std::string sensor_id;
    double latitude = 0;   // WGS84 degrees
    double longitude = 0;  // WGS84 degrees
    double elevation = 0;  // meters
    bool is_virtual = false;
};

struct RawReading {
    std::string sensor_id;
    Stressor stressor;
    std::int64_t timestamp = 0;  // UTC epoch seconds
    double value = 0;
};

/// Half-open time interval [start, end) in UTC epoch seconds.
struct Interval {
    std::int64_t start = 0;
    std::int64_t end = 0;
    std::int64_t length() const { return end - start; }
    bool contains(std::int64_t t) const { return t >= start && t < end; }
};

/// Placement of a raster map: a corner, a bearing (degrees clockwise from
/// north), two edge lengths in meters, and the raster counts per axis.
struct MapGridSpec {
    double origin_lat = 47.49;
    double origin_lon = 19.01;
    double bearing_deg = 0.0;
    double edge1_m = 1000.0;
    double edge2_m = 1000.0;
    int n1 = 20;
    int n2 = 20;
};

struct PipelineConfig {
    int step_minutes = 60;

    struct {
        int window_half = 3;
        double threshold_k = 3.0;
    } hampel;

    struct {
        double low_cut = 0.2;  // cycles/day
        double high_cut = 6.0;
    } smoothing;

    int typical_window_days = 30;
    int impute_init_order = 1;

    int arx_p = 2;
    int arx_q = 2;

    int mc_trajectories = 1000;
    int horizon_steps = 24;
    std::vector<double> confidence_levels{0.90, 0.95, 0.98};
    int edf_min_bucket = 10;

    MapGridSpec grid;
    std::string interp_method = "idw";  // nearest | natural | linear | idw
    double idw_exponent = 2.0;

    /// Reliability falloff constants per stressor name, in m^2.
    std::map<std::string, double> reliability_c;

    /// "Hour of the day" is civil local time; Budapest is UTC+1 (+2 in DST).
    int local_utc_offset_minutes = 60;

    int workers = 1;
    std::uint64_t rng_seed = 1;

    double reliability_c_for(const Stressor& s) const;
};

/// Returns one message per violated invariant; empty means the config is
/// usable. Violations are data, not failures.
std::vector<std::string> validate_config(const PipelineConfig& cfg);

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const PipelineConfig& cfg, const std::filesystem::path& path);

}  // namespace citysense
