#include <doctest.h>

#include "citysense/model.hpp"
#include "citysense/timeutil.hpp"

#include "oracles.hpp"

using namespace citysense;

TEST_CASE("default config satisfies every invariant") {
    PipelineConfig cfg;
    CHECK(validate_config(cfg).empty());
    // The defaults are the published operating point.
    CHECK(cfg.arx_p == 2);
    CHECK(cfg.arx_q == 2);
    CHECK(cfg.typical_window_days == 30);
    CHECK(cfg.horizon_steps == 24);
    REQUIRE(cfg.confidence_levels.size() == 3);
    CHECK(cfg.confidence_levels[0] == doctest::Approx(0.90));
    CHECK(cfg.confidence_levels[1] == doctest::Approx(0.95));
    CHECK(cfg.confidence_levels[2] == doctest::Approx(0.98));
}

TEST_CASE("validate_config names offending fields") {
    PipelineConfig cfg;
    cfg.step_minutes = 0;
    auto v = validate_config(cfg);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "step_minutes must be >= 1");

    cfg = PipelineConfig{};
    cfg.confidence_levels = {0.9, 1.5};
    v = validate_config(cfg);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("confidence_levels") != std::string::npos);

    cfg = PipelineConfig{};
    cfg.arx_p = 0;
    cfg.arx_q = 0;
    CHECK(validate_config(cfg).size() == 1);

    cfg = PipelineConfig{};
    cfg.grid.n1 = 1;
    CHECK(validate_config(cfg).size() == 1);
}

TEST_CASE("stressor names map to the seven modelled kinds") {
    CHECK(Stressor::from_name("temperature").kind == StressorKind::temperature);
    CHECK(Stressor::from_name("particulate_matter").unit == "g/m3");
    const Stressor other = Stressor::from_name("noise_histogram", "dBA");
    CHECK(other.kind == StressorKind::other);
    CHECK(other.name == "noise_histogram");
    CHECK(other.unit == "dBA");
    CHECK_FALSE(other.air_quality());
    CHECK(air_quality_stressors().size() == 7);
}

TEST_CASE("reliability constants distinguish slow and local stressors") {
    PipelineConfig cfg;
    CHECK(cfg.reliability_c_for(Stressor::from_name("temperature")) == 5000.0);
    CHECK(cfg.reliability_c_for(Stressor::from_name("carbon_monoxide")) == 1500.0);
    cfg.reliability_c["temperature"] = 1234.0;
    CHECK(cfg.reliability_c_for(Stressor::from_name("temperature")) == 1234.0);
}

TEST_CASE("config file round trip") {
    const auto dir = oracles::temp_dir("config");
    PipelineConfig cfg;
    cfg.step_minutes = 30;
    cfg.hampel.window_half = 5;
    cfg.confidence_levels = {0.5, 0.8};
    cfg.interp_method = "natural";
    cfg.reliability_c["uvb_index"] = 900.0;
    cfg.rng_seed = 4242;
    save_config(cfg, dir / "cfg.json");
    const PipelineConfig back = load_config(dir / "cfg.json");
    CHECK(back.step_minutes == 30);
    CHECK(back.hampel.window_half == 5);
    CHECK(back.confidence_levels == std::vector<double>{0.5, 0.8});
    CHECK(back.interp_method == "natural");
    CHECK(back.reliability_c.at("uvb_index") == 900.0);
    CHECK(back.rng_seed == 4242);
    std::filesystem::remove_all(dir);
}

TEST_CASE("iso8601 parse and format") {
    const auto t = parse_iso8601("2016-05-01T12:30:45Z");
    REQUIRE(t.has_value());
    CHECK(format_iso8601(*t) == "2016-05-01T12:30:45Z");
    CHECK(*parse_iso8601("1970-01-01T00:00:00Z") == 0);
    CHECK(*parse_iso8601("2016-01-01T00:00:00Z") == 1451606400);

    CHECK_FALSE(parse_iso8601("2016-05-01 12:30:45Z").has_value());
    CHECK_FALSE(parse_iso8601("2016-05-01T12:30:45").has_value());
    CHECK_FALSE(parse_iso8601("2016-13-01T00:00:00Z").has_value());
    CHECK_FALSE(parse_iso8601("garbage").has_value());
}

TEST_CASE("local slots follow the configured offset") {
    const std::int64_t midnight_utc = *parse_iso8601("2016-05-01T00:00:00Z");
    CHECK(local_slot(midnight_utc, 0, 60) == 0);
    CHECK(local_slot(midnight_utc, 60, 60) == 1);   // 01:00 local
    CHECK(local_slot(midnight_utc, -60, 60) == 23);  // 23:00 previous local day
    CHECK(local_slot(midnight_utc, 120, 30) == 4);
}
