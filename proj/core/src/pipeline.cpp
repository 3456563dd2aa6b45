#include "citysense/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <thread>

#include "citysense/forecast.hpp"
#include "citysense/geo.hpp"
#include "citysense/mapgen.hpp"
#include "citysense/preprocess.hpp"
#include "citysense/timeseries.hpp"
#include "citysense/timeutil.hpp"

namespace citysense {

namespace {

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

Interval step_aligned_interval(const MeasurementBatch& batch, int step_minutes) {
    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    for (const auto& [key, readings] : batch.groups) {
        if (readings.empty()) continue;
        lo = std::min(lo, readings.front().timestamp);
        hi = std::max(hi, readings.back().timestamp);
    }
    if (lo > hi) return {0, 0};
    const std::int64_t step_s = static_cast<std::int64_t>(step_minutes) * 60;
    Interval iv;
    iv.start = (lo / step_s) * step_s;
    iv.end = ((hi / step_s) + 1) * step_s;
    return iv;
}

Interval full_interval() {
    return {std::numeric_limits<std::int64_t>::min() / 4,
            std::numeric_limits<std::int64_t>::max() / 4};
}

struct PairWork {
    std::string sensor_id;
    std::string stressor_name;
    Stressor stressor;
    const std::vector<RawReading>* readings = nullptr;
};

struct PairOutput {
    PairStatus status;
    std::vector<AnalyticalRecord> records;
    std::vector<RawReading> cleaned;  // hampel-cleaned raw readings, for maps
};

struct PreprocessedSeries {
    RegularSeries series;        // standardized, imputed, smoothed
    TypicalProfile profile;
    std::size_t outliers = 0;
    std::size_t imputed = 0;
};

/// hampel -> discretize -> standardize -> impute -> smooth -> typical values.
PreprocessedSeries preprocess_pair(const std::vector<RawReading>& readings,
                                   const PipelineConfig& cfg, const Interval& interval,
                                   std::vector<RawReading>* cleaned_out) {
    PreprocessedSeries out;
    std::vector<double> raw(readings.size());
    for (std::size_t i = 0; i < readings.size(); ++i) raw[i] = readings[i].value;

    const HampelResult hampel =
        hampel_filter(raw, cfg.hampel.window_half, cfg.hampel.threshold_k);
    out.outliers = hampel.outlier_indices.size();

    std::vector<RawReading> cleaned(readings);
    for (std::size_t i = 0; i < cleaned.size(); ++i) cleaned[i].value = hampel.filtered[i];
    if (cleaned_out) *cleaned_out = cleaned;

    RegularSeries series = discretize(cleaned, cfg.step_minutes, interval);
    series = standardize(series);
    if (series.scale.degenerate) {
        out.series = std::move(series);
        return out;  // caller marks the pair degraded
    }
    ImputeResult imputed = impute_missing(series, cfg.impute_init_order);
    out.imputed = imputed.imputed_indices.size();
    series = sinc_smooth(imputed.series, cfg.smoothing.low_cut, cfg.smoothing.high_cut);
    out.profile =
        typical_profile(series, cfg.typical_window_days, cfg.local_utc_offset_minutes);
    out.series = std::move(series);
    return out;
}

PairOutput process_pair(const PairWork& work, const PipelineConfig& cfg,
                        const Interval& interval) {
    PairOutput out;
    out.status.sensor_id = work.sensor_id;
    out.status.stressor = work.stressor_name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        PreprocessedSeries pre =
            preprocess_pair(*work.readings, cfg, interval, &out.cleaned);
        out.status.outliers_removed = pre.outliers;
        out.status.slots_imputed = pre.imputed;
        if (pre.series.scale.degenerate) {
            out.status.state = PairState::degraded;
            out.status.reason = "standardization degenerate (constant data)";
            return out;
        }

        const RegularSeries& x = pre.series;
        const CircularInput u =
            CircularInput::from_profile(pre.profile, x.start, cfg.local_utc_offset_minutes);
        const ArxModel model = fit_arx(x.values, u, cfg.arx_p, cfg.arx_q);

        std::vector<std::int64_t> residual_times(model.residuals.size());
        for (std::size_t i = 0; i < model.residuals.size(); ++i) {
            residual_times[i] = x.time_at(model.first_residual_index + i);
        }
        const BucketedEdf edf =
            build_edf(model.residuals, residual_times, cfg.step_minutes,
                      cfg.local_utc_offset_minutes, cfg.edf_min_bucket);

        const std::int64_t forecast_start = x.time_at(x.size());
        const CircularInput u_future = CircularInput::from_profile(
            pre.profile, forecast_start, cfg.local_utc_offset_minutes);
        std::vector<double> init(x.values.end() - cfg.arx_p, x.values.end());
        const std::uint64_t pair_seed =
            cfg.rng_seed ^ fnv1a(work.stressor_name, fnv1a(work.sensor_id));
        ForecastResult fc = monte_carlo_forecast(
            model, init, u_future, edf, forecast_start, cfg.horizon_steps,
            cfg.mc_trajectories, cfg.confidence_levels, pair_seed,
            cfg.local_utc_offset_minutes);
        fc.stressor = work.stressor;
        fc.sensor_id = work.sensor_id;

        // Post-processing: back to original units before fitting geometry.
        fc.mean = invert_scaling(fc.mean, x.scale);
        for (auto& band : fc.lower) band = invert_scaling(band, x.scale);
        for (auto& band : fc.upper) band = invert_scaling(band, x.scale);

        const ForecastWkt wkt = wkt_forecast(fc);
        const std::string model_name =
            "arx(" + std::to_string(cfg.arx_p) + "," + std::to_string(cfg.arx_q) + ")";
        AnalyticalRecord mean_rec;
        mean_rec.kind = RecordKind::forecast;
        mean_rec.stressor = work.stressor_name;
        mean_rec.produced_at = forecast_start;
        mean_rec.sensor_id = work.sensor_id;
        mean_rec.method = model_name;
        mean_rec.wkt = wkt.mean_linestring;
        out.records.push_back(std::move(mean_rec));
        for (const auto& [level, band_wkt] : wkt.band_multilinestrings) {
            AnalyticalRecord rec;
            rec.kind = RecordKind::band;
            rec.stressor = work.stressor_name;
            rec.produced_at = forecast_start;
            rec.sensor_id = work.sensor_id;
            rec.confidence_level = level;
            rec.method = model_name;
            rec.wkt = band_wkt;
            out.records.push_back(std::move(rec));
        }
        out.status.records = out.records.size();
    } catch (const std::exception& e) {
        out.status.state = PairState::failed;
        out.status.reason = e.what();
        out.records.clear();
    }
    out.status.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    return out;
}

/// Per-sensor slot medians (neighbour fallback on) for one stressor and one
/// slot, as map input points.
std::vector<ScatteredPoint> map_points_for_slot(
    const std::map<std::string, std::vector<RawReading>>& cleaned_by_sensor,
    const std::map<std::string, Vec2>& sensor_pos, const Interval& slot,
    bool neighbour_fallback) {
    std::vector<ScatteredPoint> points;
    for (const auto& [sensor_id, readings] : cleaned_by_sensor) {
        const auto pos = sensor_pos.find(sensor_id);
        if (pos == sensor_pos.end()) continue;
        std::vector<double> in_slot, prev, next;
        const std::int64_t len = slot.length();
        for (const RawReading& r : readings) {
            if (slot.contains(r.timestamp)) {
                in_slot.push_back(r.value);
            } else if (r.timestamp >= slot.start - len && r.timestamp < slot.start) {
                prev.push_back(r.value);
            } else if (r.timestamp >= slot.end && r.timestamp < slot.end + len) {
                next.push_back(r.value);
            }
        }
        const auto z = collapse_to_scalar(in_slot, prev, next, neighbour_fallback);
        if (!z) continue;
        points.push_back({sensor_id, pos->second, *z, false});
    }
    return points;
}

}  // namespace

RunReport run_batch(const PipelineConfig& cfg, const std::filesystem::path& network_path,
                    const std::filesystem::path& readings_path,
                    const std::filesystem::path& store_path) {
    const auto t0 = std::chrono::steady_clock::now();
    if (const auto violations = validate_config(cfg); !violations.empty()) {
        std::string msg = "run_batch: invalid config:";
        for (const std::string& v : violations) msg += " " + v + ";";
        throw Error(msg);
    }
    const std::vector<SensorMeta> sensors = load_network(network_path);
    MeasurementBatch batch = load_readings(readings_path, full_interval());
    const Interval interval = step_aligned_interval(batch, cfg.step_minutes);

    RunReport report;
    report.covered = interval;

    std::map<std::string, const SensorMeta*> sensor_by_id;
    for (const SensorMeta& m : sensors) sensor_by_id[m.sensor_id] = &m;

    // Air-quality pairs only; "other" stressors are stored but never modelled.
    std::vector<PairWork> pairs;
    for (const auto& [key, readings] : batch.groups) {
        const auto& [sensor_id, stressor_name] = key;
        if (readings.empty()) continue;
        const Stressor stressor = readings.front().stressor;
        if (!stressor.air_quality()) continue;
        PairWork w;
        w.sensor_id = sensor_id;
        w.stressor_name = stressor_name;
        w.stressor = stressor;
        w.readings = &readings;
        pairs.push_back(std::move(w));
    }

    std::vector<PairOutput> outputs(pairs.size());
    {
        std::atomic<std::size_t> next{0};
        const int workers = std::max(1, std::min<int>(cfg.workers,
                                                      static_cast<int>(pairs.size())));
        auto run = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= pairs.size()) break;
                if (sensor_by_id.find(pairs[i].sensor_id) == sensor_by_id.end()) {
                    outputs[i].status.sensor_id = pairs[i].sensor_id;
                    outputs[i].status.stressor = pairs[i].stressor_name;
                    outputs[i].status.state = PairState::failed;
                    outputs[i].status.reason = "sensor not in network description";
                    continue;
                }
                outputs[i] = process_pair(pairs[i], cfg, interval);
            }
        };
        if (workers == 1) {
            run();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(run);
            for (std::thread& t : pool) t.join();
        }
    }

    std::vector<AnalyticalRecord> records;
    for (PairOutput& o : outputs) {
        report.pairs.push_back(o.status);
        for (AnalyticalRecord& r : o.records) records.push_back(std::move(r));
    }

    // Map phase: per stressor, per slot of the trailing day, collapse each
    // sensor to a scalar and interpolate the raster.
    const LocalFrame frame{cfg.grid.origin_lat, cfg.grid.origin_lon};
    std::map<std::string, Vec2> sensor_pos;
    for (const SensorMeta& m : sensors) {
        sensor_pos[m.sensor_id] = project(frame, m.latitude, m.longitude);
    }
    std::map<std::string, std::map<std::string, std::vector<RawReading>>> cleaned_by_stressor;
    std::map<std::string, Stressor> stressor_by_name;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (outputs[i].cleaned.empty()) continue;
        cleaned_by_stressor[pairs[i].stressor_name][pairs[i].sensor_id] =
            std::move(outputs[i].cleaned);
        stressor_by_name[pairs[i].stressor_name] = pairs[i].stressor;
    }

    const std::int64_t step_s = static_cast<std::int64_t>(cfg.step_minutes) * 60;
    const int slots_per_day = kMinutesPerDay / cfg.step_minutes;
    const InterpMethod method = interp_method_from_name(cfg.interp_method);
    for (const auto& [stressor_name, by_sensor] : cleaned_by_stressor) {
        const Stressor stressor = stressor_by_name[stressor_name];
        const double c = cfg.reliability_c_for(stressor);
        for (int k = slots_per_day; k >= 1; --k) {
            const Interval slot{interval.end - k * step_s, interval.end - (k - 1) * step_s};
            const std::vector<ScatteredPoint> points =
                map_points_for_slot(by_sensor, sensor_pos, slot, true);
            if (points.empty()) continue;
            try {
                ValueGrid grid = generate_map(points, cfg.grid, frame, method, c,
                                              cfg.idw_exponent);
                grid.stressor = stressor;
                grid.slot_start = slot.start;
                AnalyticalRecord vrec;
                vrec.kind = RecordKind::value_map;
                vrec.stressor = stressor_name;
                vrec.produced_at = slot.start;
                vrec.method = grid.method;
                vrec.wkt = wkt_surface(grid, frame, SurfaceLayer::value);
                AnalyticalRecord rrec;
                rrec.kind = RecordKind::reliability_map;
                rrec.stressor = stressor_name;
                rrec.produced_at = slot.start;
                rrec.method = grid.method;
                rrec.wkt = wkt_surface(grid, frame, SurfaceLayer::reliability);
                records.push_back(std::move(vrec));
                records.push_back(std::move(rrec));
                report.map_records += 2;
            } catch (const std::exception&) {
                // A slot that cannot be interpolated is skipped, not fatal.
            }
        }
    }

    report.records_written = store_records(records, store_path);
    report.total_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
}

std::vector<ForecastValidation> validate_forecasting(const PipelineConfig& cfg,
                                                     const std::filesystem::path& network_path,
                                                     const std::filesystem::path& readings_path,
                                                     double split) {
    if (!(split > 0 && split < 1)) throw std::invalid_argument("split must lie in (0,1)");
    load_network(network_path);  // validates the network file
    MeasurementBatch batch = load_readings(readings_path, full_interval());
    const Interval interval = step_aligned_interval(batch, cfg.step_minutes);

    struct Acc {
        double est_ss = 0, val_ss = 0;
        std::size_t est_n = 0, val_n = 0, pairs = 0;
    };
    std::map<std::string, Acc> acc;

    const int slots_per_day = kMinutesPerDay / cfg.step_minutes;
    for (const auto& [key, readings] : batch.groups) {
        const auto& [sensor_id, stressor_name] = key;
        if (readings.empty() || !readings.front().stressor.air_quality()) continue;

        PreprocessedSeries pre;
        try {
            // The typical-value window is fitted to the training span below,
            // so only the basic cleaning steps can fail here.
            std::vector<double> raw(readings.size());
            for (std::size_t i = 0; i < readings.size(); ++i) raw[i] = readings[i].value;
            const HampelResult hampel =
                hampel_filter(raw, cfg.hampel.window_half, cfg.hampel.threshold_k);
            std::vector<RawReading> cleaned(readings);
            for (std::size_t i = 0; i < cleaned.size(); ++i) {
                cleaned[i].value = hampel.filtered[i];
            }
            RegularSeries series = discretize(cleaned, cfg.step_minutes, interval);
            series = standardize(series);
            if (series.scale.degenerate) continue;
            pre.series = sinc_smooth(impute_missing(series, cfg.impute_init_order).series,
                                     cfg.smoothing.low_cut, cfg.smoothing.high_cut);
        } catch (const std::exception&) {
            continue;  // pair unusable for validation
        }

        const RegularSeries& x = pre.series;
        const std::size_t n = x.size();
        const std::size_t train_n = static_cast<std::size_t>(split * static_cast<double>(n));
        if (train_n < static_cast<std::size_t>(2 * (cfg.arx_p + cfg.arx_q) + 2) ||
            train_n >= n) {
            throw Error("validate_forecasting: insufficient data for the split");
        }

        // Typical values come from the trailing window of the training span
        // only, so the validation rows stay out of sample.
        RegularSeries train = x;
        train.values.assign(x.values.begin(),
                            x.values.begin() + static_cast<std::ptrdiff_t>(train_n));
        const int window_days =
            std::min<int>(cfg.typical_window_days,
                          static_cast<int>(train_n / static_cast<std::size_t>(slots_per_day)));
        if (window_days < 1) throw Error("validate_forecasting: under one day of training data");
        const TypicalProfile profile =
            typical_profile(train, window_days, cfg.local_utc_offset_minutes);
        const CircularInput u =
            CircularInput::from_profile(profile, x.start, cfg.local_utc_offset_minutes);

        ArxModel model;
        try {
            model = fit_arx(train.values, u, cfg.arx_p, cfg.arx_q);
        } catch (const std::exception&) {
            continue;
        }
        const double est = model.fit_rmse;
        const double val = fit_rmse(model, x.values, u, train_n, n);
        Acc& a = acc[stressor_name];
        a.est_ss += est * est * static_cast<double>(model.residuals.size());
        a.est_n += model.residuals.size();
        a.val_ss += val * val * static_cast<double>(n - train_n);
        a.val_n += n - train_n;
        a.pairs += 1;
    }

    std::vector<ForecastValidation> out;
    for (const auto& [stressor, a] : acc) {
        if (a.est_n == 0 || a.val_n == 0) continue;
        ForecastValidation v;
        v.stressor = stressor;
        v.estimation_rmse = std::sqrt(a.est_ss / static_cast<double>(a.est_n));
        v.validation_rmse = std::sqrt(a.val_ss / static_cast<double>(a.val_n));
        v.pairs = a.pairs;
        out.push_back(std::move(v));
    }
    if (out.empty()) throw Error("validate_forecasting: no usable pairs");
    return out;
}

std::vector<MapValidation> validate_maps(const PipelineConfig& cfg,
                                         const std::filesystem::path& network_path,
                                         const std::filesystem::path& readings_path,
                                         const std::vector<std::string>& methods) {
    const std::vector<SensorMeta> sensors = load_network(network_path);
    if (sensors.size() < 3) throw Error("validate_maps: need at least 3 sensors");
    MeasurementBatch batch = load_readings(readings_path, full_interval());
    const Interval interval = step_aligned_interval(batch, cfg.step_minutes);

    const LocalFrame frame{cfg.grid.origin_lat, cfg.grid.origin_lon};
    std::map<std::string, Vec2> sensor_pos;
    for (const SensorMeta& m : sensors) {
        sensor_pos[m.sensor_id] = project(frame, m.latitude, m.longitude);
    }
    const MapGeometry geom(cfg.grid, frame);

    // Hampel-clean every pair once, grouped by stressor.
    std::map<std::string, std::map<std::string, std::vector<RawReading>>> cleaned;
    for (const auto& [key, readings] : batch.groups) {
        const auto& [sensor_id, stressor_name] = key;
        if (readings.empty() || !readings.front().stressor.air_quality()) continue;
        if (sensor_pos.find(sensor_id) == sensor_pos.end()) continue;
        std::vector<double> raw(readings.size());
        for (std::size_t i = 0; i < readings.size(); ++i) raw[i] = readings[i].value;
        const HampelResult h =
            hampel_filter(raw, cfg.hampel.window_half, cfg.hampel.threshold_k);
        std::vector<RawReading> c(readings);
        for (std::size_t i = 0; i < c.size(); ++i) c[i].value = h.filtered[i];
        cleaned[stressor_name][sensor_id] = std::move(c);
    }

    const std::int64_t step_s = static_cast<std::int64_t>(cfg.step_minutes) * 60;
    std::vector<MapValidation> out;
    for (const std::string& method_name : methods) {
        const InterpMethod method = interp_method_from_name(method_name);
        for (const auto& [stressor_name, by_sensor] : cleaned) {
            double ss = 0;
            std::size_t count = 0;
            for (std::int64_t slot_start = interval.start; slot_start < interval.end;
                 slot_start += step_s) {
                const Interval slot{slot_start, slot_start + step_s};
                const std::vector<ScatteredPoint> points =
                    map_points_for_slot(by_sensor, sensor_pos, slot, false);
                if (points.size() < 4) continue;
                for (std::size_t hold = 0; hold < points.size(); ++hold) {
                    std::vector<ScatteredPoint> others;
                    others.reserve(points.size() - 1);
                    for (std::size_t i = 0; i < points.size(); ++i) {
                        if (i != hold) others.push_back(points[i]);
                    }
                    const Vec2& at = points[hold].position;
                    double estimate;
                    try {
                        switch (method) {
                            case InterpMethod::nearest:
                                estimate = interp_nearest(others, at);
                                break;
                            case InterpMethod::idw:
                                estimate = interp_idw(others, at, cfg.idw_exponent);
                                break;
                            case InterpMethod::linear:
                            case InterpMethod::natural: {
                                const std::vector<ScatteredPoint> with_corners =
                                    inject_corner_virtual_sensors(others, geom.corners());
                                const auto z = method == InterpMethod::linear
                                                   ? interp_linear(with_corners, at)
                                                   : interp_natural(with_corners, at);
                                if (!z) continue;  // held-out point beyond the map
                                estimate = *z;
                                break;
                            }
                            default:
                                continue;
                        }
                    } catch (const std::exception&) {
                        continue;
                    }
                    const double err = estimate - points[hold].value;
                    ss += err * err;
                    ++count;
                }
            }
            if (count == 0) continue;
            MapValidation v;
            v.stressor = stressor_name;
            v.method = method_name;
            v.rmse = std::sqrt(ss / static_cast<double>(count));
            v.comparisons = count;
            out.push_back(std::move(v));
        }
    }
    return out;
}

}  // namespace citysense
