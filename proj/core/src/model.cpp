#include "citysense/model.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace citysense {

using nlohmann::json;

const std::vector<Stressor>& air_quality_stressors() {
    static const std::vector<Stressor> kStressors = {
        {StressorKind::particulate_matter, "particulate_matter", "g/m3"},
        {StressorKind::temperature, "temperature", "degC"},
        {StressorKind::uvb_index, "uvb_index", "index"},
        {StressorKind::ambient_light, "ambient_light", "lux"},
        {StressorKind::air_pressure, "air_pressure", "mbar"},
        {StressorKind::relative_humidity, "relative_humidity", "%"},
        {StressorKind::carbon_monoxide, "carbon_monoxide", "ppm"},
    };
    return kStressors;
}

Stressor Stressor::from_name(std::string_view name, std::string_view unit) {
    for (const Stressor& s : air_quality_stressors()) {
        if (s.name == name) return s;
    }
    Stressor s;
    s.kind = StressorKind::other;
    s.name = std::string(name);
    s.unit = std::string(unit);
    return s;
}

double PipelineConfig::reliability_c_for(const Stressor& s) const {
    if (auto it = reliability_c.find(s.name); it != reliability_c.end()) {
        return it->second;
    }
    // Slowly varying quantities keep confidence over longer distances than
    // locally generated ones (dust, CO, light).
    switch (s.kind) {
        case StressorKind::temperature:
        case StressorKind::air_pressure:
        case StressorKind::relative_humidity:
            return 5000.0;
        default:
            return 1500.0;
    }
}

std::vector<std::string> validate_config(const PipelineConfig& cfg) {
    std::vector<std::string> v;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) v.push_back(msg);
    };
    check(cfg.step_minutes >= 1, "step_minutes must be >= 1");
    check(cfg.step_minutes < 1 || 1440 % cfg.step_minutes == 0,
          "step_minutes must divide 1440");
    check(cfg.hampel.window_half >= 1, "hampel.window_half must be >= 1");
    check(cfg.hampel.threshold_k > 0, "hampel.threshold_k must be > 0");
    check(cfg.smoothing.low_cut >= 0, "smoothing.low_cut must be >= 0");
    check(cfg.smoothing.high_cut > cfg.smoothing.low_cut,
          "smoothing.high_cut must exceed smoothing.low_cut");
    check(cfg.typical_window_days >= 1, "typical_window_days must be >= 1");
    check(cfg.impute_init_order >= 1, "impute_init_order must be >= 1");
    check(cfg.arx_p >= 0 && cfg.arx_q >= 0 && cfg.arx_p + cfg.arx_q >= 1,
          "arx orders must satisfy p+q >= 1");
    check(cfg.mc_trajectories >= 1, "mc_trajectories must be >= 1");
    check(cfg.horizon_steps >= 1, "horizon_steps must be >= 1");
    for (double level : cfg.confidence_levels) {
        if (!(level > 0.0 && level < 1.0)) {
            v.push_back("confidence_levels entries must lie in (0,1)");
            break;
        }
    }
    check(cfg.edf_min_bucket >= 1, "edf_min_bucket must be >= 1");
    check(cfg.grid.edge1_m > 0 && cfg.grid.edge2_m > 0,
          "grid edge lengths must be > 0");
    check(cfg.grid.n1 >= 2 && cfg.grid.n2 >= 2, "grid raster counts must be >= 2");
    check(cfg.grid.bearing_deg >= 0 && cfg.grid.bearing_deg < 360,
          "grid bearing_deg must lie in [0,360)");
    check(cfg.interp_method == "nearest" || cfg.interp_method == "natural" ||
              cfg.interp_method == "linear" || cfg.interp_method == "idw",
          "interp_method must be one of nearest|natural|linear|idw");
    check(cfg.idw_exponent > 0, "idw_exponent must be > 0");
    for (const auto& [name, c] : cfg.reliability_c) {
        if (!(c > 0)) {
            v.push_back("reliability_c for '" + name + "' must be > 0");
        }
    }
    check(cfg.workers >= 1, "workers must be >= 1");
    return v;
}

static void from_json_into(const json& j, PipelineConfig& cfg) {
    cfg.step_minutes = j.value("step_minutes", cfg.step_minutes);
    if (j.contains("hampel")) {
        const json& h = j.at("hampel");
        cfg.hampel.window_half = h.value("window_half", cfg.hampel.window_half);
        cfg.hampel.threshold_k = h.value("threshold_k", cfg.hampel.threshold_k);
    }
    if (j.contains("smoothing")) {
        const json& s = j.at("smoothing");
        cfg.smoothing.low_cut = s.value("low_cut_cycles_per_day", cfg.smoothing.low_cut);
        cfg.smoothing.high_cut = s.value("high_cut_cycles_per_day", cfg.smoothing.high_cut);
    }
    cfg.typical_window_days = j.value("typical_window_days", cfg.typical_window_days);
    cfg.impute_init_order = j.value("impute_init_order", cfg.impute_init_order);
    if (j.contains("arx")) {
        cfg.arx_p = j.at("arx").value("p", cfg.arx_p);
        cfg.arx_q = j.at("arx").value("q", cfg.arx_q);
    }
    if (j.contains("forecast")) {
        const json& f = j.at("forecast");
        cfg.mc_trajectories = f.value("trajectories", cfg.mc_trajectories);
        cfg.horizon_steps = f.value("horizon_steps", cfg.horizon_steps);
        if (f.contains("confidence_levels")) {
            cfg.confidence_levels = f.at("confidence_levels").get<std::vector<double>>();
        }
        cfg.edf_min_bucket = f.value("edf_min_bucket", cfg.edf_min_bucket);
    }
    if (j.contains("map")) {
        const json& m = j.at("map");
        if (m.contains("grid")) {
            const json& g = m.at("grid");
            cfg.grid.origin_lat = g.value("origin_lat", cfg.grid.origin_lat);
            cfg.grid.origin_lon = g.value("origin_lon", cfg.grid.origin_lon);
            cfg.grid.bearing_deg = g.value("bearing_deg", cfg.grid.bearing_deg);
            cfg.grid.edge1_m = g.value("edge1_m", cfg.grid.edge1_m);
            cfg.grid.edge2_m = g.value("edge2_m", cfg.grid.edge2_m);
            cfg.grid.n1 = g.value("n1", cfg.grid.n1);
            cfg.grid.n2 = g.value("n2", cfg.grid.n2);
        }
        cfg.interp_method = m.value("method", cfg.interp_method);
        cfg.idw_exponent = m.value("idw_exponent", cfg.idw_exponent);
        if (m.contains("reliability_c")) {
            cfg.reliability_c =
                m.at("reliability_c").get<std::map<std::string, double>>();
        }
    }
    cfg.local_utc_offset_minutes =
        j.value("local_utc_offset_minutes", cfg.local_utc_offset_minutes);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error("config parse error in " + path.string() + ": " + e.what());
    }
    PipelineConfig cfg;
    try {
        from_json_into(j, cfg);
    } catch (const json::exception& e) {
        throw Error("config field error in " + path.string() + ": " + e.what());
    }
    return cfg;
}

void save_config(const PipelineConfig& cfg, const std::filesystem::path& path) {
    json j;
    j["step_minutes"] = cfg.step_minutes;
    j["hampel"] = {{"window_half", cfg.hampel.window_half},
                   {"threshold_k", cfg.hampel.threshold_k}};
    j["smoothing"] = {{"low_cut_cycles_per_day", cfg.smoothing.low_cut},
                      {"high_cut_cycles_per_day", cfg.smoothing.high_cut}};
    j["typical_window_days"] = cfg.typical_window_days;
    j["impute_init_order"] = cfg.impute_init_order;
    j["arx"] = {{"p", cfg.arx_p}, {"q", cfg.arx_q}};
    j["forecast"] = {{"trajectories", cfg.mc_trajectories},
                     {"horizon_steps", cfg.horizon_steps},
                     {"confidence_levels", cfg.confidence_levels},
                     {"edf_min_bucket", cfg.edf_min_bucket}};
    j["map"] = {{"grid",
                 {{"origin_lat", cfg.grid.origin_lat},
                  {"origin_lon", cfg.grid.origin_lon},
                  {"bearing_deg", cfg.grid.bearing_deg},
                  {"edge1_m", cfg.grid.edge1_m},
                  {"edge2_m", cfg.grid.edge2_m},
                  {"n1", cfg.grid.n1},
                  {"n2", cfg.grid.n2}}},
                {"method", cfg.interp_method},
                {"idw_exponent", cfg.idw_exponent},
                {"reliability_c", cfg.reliability_c}};
    j["local_utc_offset_minutes"] = cfg.local_utc_offset_minutes;
    j["workers"] = cfg.workers;
    j["rng_seed"] = cfg.rng_seed;

    std::ofstream out(path);
    if (!out) throw Error("cannot write config file: " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace citysense
