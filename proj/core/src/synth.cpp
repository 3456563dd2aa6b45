#include "citysense/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "citysense/ingest.hpp"
#include "citysense/timeutil.hpp"

namespace citysense {

using nlohmann::json;

double StressorTruth::field(double x, double y) const {
    double v = field_base + field_grad_x * x + field_grad_y * y;
    for (const Bump& b : bumps) {
        const double dx = x - b.cx, dy = y - b.cy;
        v += b.amp * std::exp(-(dx * dx + dy * dy) / (2 * b.sigma * b.sigma));
    }
    return v;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::mt19937_64 pair_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                         std::uint64_t stream) {
    return std::mt19937_64(
        splitmix64(seed ^ splitmix64(a * 0x100000001b3ULL + b * 31 + stream)));
}

std::array<double, 24> diurnal_profile(double amplitude, double phase_h, double second_harmonic) {
    std::array<double, 24> d{};
    for (int h = 0; h < 24; ++h) {
        const double w = 2.0 * 3.14159265358979323846 * (h - phase_h) / 24.0;
        d[static_cast<std::size_t>(h)] =
            amplitude * std::sin(w) + second_harmonic * std::sin(2 * w);
    }
    return d;
}

}  // namespace

std::vector<StressorTruth> default_stressor_truths() {
    std::vector<StressorTruth> out;
    const auto& kinds = air_quality_stressors();
    auto make = [&](StressorKind kind, int cadence, double noise, double amp, double phase,
                    double harm, double base, double gx, double gy,
                    std::vector<StressorTruth::Bump> bumps) {
        StressorTruth t;
        for (const Stressor& s : kinds) {
            if (s.kind == kind) t.stressor = s;
        }
        t.cadence_minutes = cadence;
        t.noise_std = noise;
        t.diurnal = diurnal_profile(amp, phase, harm);
        t.field_base = base;
        t.field_grad_x = gx;
        t.field_grad_y = gy;
        t.bumps = std::move(bumps);
        out.push_back(std::move(t));
    };
    // Cadences sit inside the sampling ranges of the deployed hardware.
    make(StressorKind::particulate_matter, 10, 0.35, 0.8, 4, 0.25, 30, 0.004, -0.002,
         {{8, 300, 650, 220}, {-5, 700, 250, 260}});
    make(StressorKind::temperature, 5, 0.12, 1.2, 9, 0.1, 21, 0.0008, 0.0005,
         {{1.5, 500, 500, 350}});
    make(StressorKind::uvb_index, 10, 0.18, 1.0, 8, 0.3, 3, 0.0005, 0.001,
         {{0.8, 250, 300, 300}});
    make(StressorKind::ambient_light, 10, 0.3, 1.1, 8, 0.35, 500, 0.05, 0.08,
         {{120, 650, 700, 240}});
    make(StressorKind::air_pressure, 5, 0.08, 0.4, 2, 0.05, 1013, 0.0004, -0.0003, {});
    make(StressorKind::relative_humidity, 5, 0.15, 0.9, 16, 0.1, 55, -0.003, 0.002,
         {{6, 420, 180, 300}});
    make(StressorKind::carbon_monoxide, 30, 0.25, 0.7, 7, 0.3, 0.6, 0.00012, 0.00009,
         {{0.35, 800, 450, 200}});
    return out;
}

std::vector<double> latent_path(const SynthSpec& spec, const StressorTruth& truth,
                                std::size_t sensor_index, std::size_t stressor_index) {
    // Hourly latent ARX(2,2): warmup steps let the process forget x_0 = 0.
    const std::size_t warmup = 96;
    const std::size_t steps = static_cast<std::size_t>(spec.days) * 24 + 2;
    std::mt19937_64 rng = pair_rng(spec.seed, sensor_index, stressor_index, 0xa17e07);
    std::normal_distribution<double> noise(0.0, truth.noise_std);

    const int start_hour =
        local_slot(spec.start_epoch, spec.utc_offset_minutes, 60);
    std::vector<double> x(warmup + steps, 0.0);
    for (std::size_t t = 2; t < x.size(); ++t) {
        const long hour = start_hour + static_cast<long>(t) - static_cast<long>(warmup);
        auto u = [&](long h) {
            long i = h % 24;
            if (i < 0) i += 24;
            return truth.diurnal[static_cast<std::size_t>(i)];
        };
        x[t] = truth.ar[0] * x[t - 1] + truth.ar[1] * x[t - 2] + truth.ex[0] * u(hour) +
               truth.ex[1] * u(hour - 1) + noise(rng);
    }
    return std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(warmup), x.end());
}

double ground_truth_value(const SynthSpec& spec, const StressorTruth& truth,
                          const Vec2& position, std::span<const double> latent,
                          std::int64_t timestamp) {
    // Linear interpolation of the hourly latent keeps the sampled signal
    // smooth between steps.
    const double hours =
        static_cast<double>(timestamp - spec.start_epoch) / 3600.0;
    const std::size_t i0 = static_cast<std::size_t>(hours);
    const double frac = hours - static_cast<double>(i0);
    const double temporal = latent[i0] * (1.0 - frac) + latent[i0 + 1] * frac;
    return truth.field(position.x, position.y) + temporal;
}

GroundTruth generate(const SynthSpec& spec, const std::filesystem::path& network_path,
                     const std::filesystem::path& readings_path,
                     const std::filesystem::path& truth_path) {
    if (spec.sensor_count < 1) throw Error("synth: sensor_count must be >= 1");
    if (spec.dropout < 0 || spec.dropout >= 1 || spec.outlier_rate < 0 ||
        spec.outlier_rate >= 1) {
        throw Error("synth: dropout and outlier_rate must lie in [0,1)");
    }
    if (spec.stressors.empty()) throw Error("synth: no stressors configured");

    GroundTruth truth;
    truth.spec = spec;

    // Sensor placement: uniform with pairwise spacing >= min_spacing_m.
    std::mt19937_64 place_rng(splitmix64(spec.seed ^ 0x5e25ULL));
    std::uniform_real_distribution<double> coord(0.0, spec.extent_m);
    const std::size_t max_attempts = 20000 * static_cast<std::size_t>(spec.sensor_count);
    std::size_t attempts = 0;
    while (truth.positions.size() < static_cast<std::size_t>(spec.sensor_count)) {
        if (++attempts > max_attempts) {
            throw Error("synth: cannot place sensors with the requested spacing");
        }
        const Vec2 p{coord(place_rng), coord(place_rng)};
        bool ok = true;
        for (const Vec2& q : truth.positions) {
            const double dx = p.x - q.x, dy = p.y - q.y;
            if (dx * dx + dy * dy < spec.min_spacing_m * spec.min_spacing_m) {
                ok = false;
                break;
            }
        }
        if (ok) truth.positions.push_back(p);
    }

    const LocalFrame frame{spec.base_lat, spec.base_lon};
    for (std::size_t i = 0; i < truth.positions.size(); ++i) {
        SensorMeta m;
        char buf[16];
        std::snprintf(buf, sizeof buf, "s%03zu", i + 1);
        m.sensor_id = buf;
        unproject(frame, truth.positions[i], m.latitude, m.longitude);
        m.elevation = 8.5;  // pole height
        truth.sensors.push_back(std::move(m));
    }
    write_network_csv(truth.sensors, network_path);

    std::ofstream out(readings_path);
    if (!out) throw Error("synth: cannot write readings file: " + readings_path.string());
    out << "sensor_id,stressor,timestamp,value,unit\n";

    const std::int64_t end_epoch =
        spec.start_epoch + static_cast<std::int64_t>(spec.days) * 86400;
    for (std::size_t si = 0; si < truth.sensors.size(); ++si) {
        for (std::size_t ki = 0; ki < spec.stressors.size(); ++ki) {
            const StressorTruth& st = spec.stressors[ki];
            const std::vector<double> latent = latent_path(spec, st, si, ki);

            // Clean values first; the spike size scales with their spread.
            std::vector<std::int64_t> times;
            std::vector<double> clean;
            for (std::int64_t ts = spec.start_epoch; ts < end_epoch;
                 ts += static_cast<std::int64_t>(st.cadence_minutes) * 60) {
                times.push_back(ts);
                clean.push_back(
                    ground_truth_value(spec, st, truth.positions[si], latent, ts));
            }
            double mean = 0;
            for (double v : clean) mean += v;
            mean /= static_cast<double>(clean.size());
            double var = 0;
            for (double v : clean) var += (v - mean) * (v - mean);
            const double sd = std::sqrt(var / static_cast<double>(clean.size() - 1));

            std::mt19937_64 corr_rng = pair_rng(spec.seed, si, ki, 0xc0441);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            for (std::size_t r = 0; r < times.size(); ++r) {
                if (spec.dropout > 0 && unit(corr_rng) < spec.dropout) {
                    ++truth.readings_dropped;
                    continue;
                }
                double value = clean[r];
                if (spec.outlier_rate > 0 && unit(corr_rng) < spec.outlier_rate) {
                    const double sign = unit(corr_rng) < 0.5 ? -1.0 : 1.0;
                    value += sign * spec.outlier_sigma * sd;
                    truth.outliers.push_back({truth.sensors[si].sensor_id,
                                              st.stressor.name, times[r], clean[r], value});
                }
                out << truth.sensors[si].sensor_id << "," << st.stressor.name << ","
                    << format_iso8601(times[r]) << "," << format_coord(value) << ","
                    << st.stressor.unit << "\n";
                ++truth.readings_emitted;
            }
        }
    }
    out.close();

    json j;
    j["seed"] = spec.seed;
    j["sensor_count"] = spec.sensor_count;
    j["days"] = spec.days;
    j["start"] = format_iso8601(spec.start_epoch);
    j["extent_m"] = spec.extent_m;
    j["dropout"] = spec.dropout;
    j["outlier_rate"] = spec.outlier_rate;
    j["outlier_sigma"] = spec.outlier_sigma;
    j["readings_emitted"] = truth.readings_emitted;
    j["readings_dropped"] = truth.readings_dropped;
    json sensors = json::array();
    for (std::size_t i = 0; i < truth.sensors.size(); ++i) {
        sensors.push_back({{"sensor_id", truth.sensors[i].sensor_id},
                           {"x", truth.positions[i].x},
                           {"y", truth.positions[i].y},
                           {"latitude", truth.sensors[i].latitude},
                           {"longitude", truth.sensors[i].longitude}});
    }
    j["sensors"] = sensors;
    json stressors = json::array();
    for (const StressorTruth& st : spec.stressors) {
        json bumps = json::array();
        for (const auto& b : st.bumps) {
            bumps.push_back({{"amp", b.amp}, {"cx", b.cx}, {"cy", b.cy}, {"sigma", b.sigma}});
        }
        stressors.push_back({{"name", st.stressor.name},
                             {"cadence_minutes", st.cadence_minutes},
                             {"ar", st.ar},
                             {"ex", st.ex},
                             {"noise_std", st.noise_std},
                             {"diurnal", st.diurnal},
                             {"field_base", st.field_base},
                             {"field_grad_x", st.field_grad_x},
                             {"field_grad_y", st.field_grad_y},
                             {"bumps", bumps}});
    }
    j["stressors"] = stressors;
    json manifest = json::array();
    for (const OutlierEvent& e : truth.outliers) {
        manifest.push_back({{"sensor_id", e.sensor_id},
                            {"stressor", e.stressor},
                            {"timestamp", format_iso8601(e.timestamp)},
                            {"clean_value", e.clean_value},
                            {"spiked_value", e.spiked_value}});
    }
    j["outlier_manifest"] = manifest;

    std::ofstream tf(truth_path);
    if (!tf) throw Error("synth: cannot write truth file: " + truth_path.string());
    tf << j.dump(2) << "\n";
    return truth;
}

}  // namespace citysense
