#include <doctest.h>

#include <random>

#include "citysense/preprocess.hpp"
#include "citysense/timeutil.hpp"

#include "oracles.hpp"

using namespace citysense;

namespace {

RegularSeries make_series(std::vector<double> values, int step_minutes = 60,
                          std::int64_t start = 1459468800) {
    RegularSeries s;
    s.start = start;
    s.step_minutes = step_minutes;
    s.values = std::move(values);
    return s;
}

}  // namespace

TEST_CASE("hampel replaces an isolated spike with the window median") {
    const std::vector<double> v{5, 5, 5, 100, 5, 5, 5};
    const auto r = hampel_filter(v, 3, 3.0);
    CHECK(r.filtered[3] == 5);
    CHECK(r.outlier_indices == std::vector<std::size_t>{3});
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i != 3) CHECK(r.filtered[i] == v[i]);
    }
}

TEST_CASE("hampel keeps a constant series untouched") {
    const std::vector<double> v(20, 7.0);
    const auto r = hampel_filter(v, 3, 3.0);
    CHECK(r.filtered == v);
    CHECK(r.outlier_indices.empty());
}

TEST_CASE("hampel zero-MAD window keeps the center when it equals the median") {
    // All but one value identical: MAD is 0, center == median stays.
    const std::vector<double> v{4, 4, 4, 4, 4, 4.5, 4};
    const auto r = hampel_filter(v, 3, 3.0);
    CHECK(r.filtered[0] == 4);
    // The deviating point is flagged (|4.5-4| > 3*0).
    CHECK(std::find(r.outlier_indices.begin(), r.outlier_indices.end(), 5) !=
          r.outlier_indices.end());
}

TEST_CASE("hampel matches the sliding median/MAD oracle on noisy data") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> noise(0, 1);
    std::vector<double> v(400);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = std::sin(0.07 * static_cast<double>(i)) + 0.1 * noise(rng);
    }
    v[50] += 30;
    v[212] -= 25;
    const auto got = hampel_filter(v, 3, 3.0);
    const auto want = oracles::sliding_median_mad(v, 3, 3.0);
    CHECK(got.outlier_indices == want.outliers);
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(got.filtered[i] == doctest::Approx(want.filtered[i]).epsilon(1e-12));
    }
}

TEST_CASE("hampel is idempotent on its own output") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> noise(0, 0.05);
    std::vector<double> v(600);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = std::sin(0.05 * static_cast<double>(i)) + noise(rng);
    }
    for (std::size_t i = 30; i < v.size(); i += 97) v[i] += 10;
    const auto once = hampel_filter(v, 3, 3.0);
    const auto twice = hampel_filter(once.filtered, 3, 3.0);
    CHECK(twice.outlier_indices.empty());
    CHECK(twice.filtered == once.filtered);
}

TEST_CASE("hampel rejects an empty series") {
    CHECK_THROWS_AS(hampel_filter(std::vector<double>{}, 3, 3.0), Error);
}

TEST_CASE("discretize averages readings per slot and marks empty slots") {
    const std::int64_t t0 = 1459468800;
    const Stressor temp = Stressor::from_name("temperature");
    std::vector<RawReading> readings{
        {"s1", temp, t0 + 600, 10.0},
        {"s1", temp, t0 + 1800, 20.0},
        {"s1", temp, t0 + 7200 + 60, 7.0},
    };
    const RegularSeries s = discretize(readings, 60, {t0, t0 + 3 * 3600});
    REQUIRE(s.values.size() == 3);
    CHECK(s.values[0] == doctest::Approx(15.0));
    CHECK(is_missing(s.values[1]));
    CHECK(s.values[2] == doctest::Approx(7.0));
    CHECK(s.time_at(1) == t0 + 3600);
}

TEST_CASE("discretize is invariant to reading order") {
    const std::int64_t t0 = 1459468800;
    const Stressor temp = Stressor::from_name("temperature");
    std::mt19937_64 rng(5);
    std::vector<RawReading> readings;
    for (int i = 0; i < 200; ++i) {
        readings.push_back({"s1", temp, t0 + (i * 137) % 86400,
                            static_cast<double>(i % 17)});
    }
    auto shuffled = readings;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const Interval iv{t0, t0 + 86400};
    const RegularSeries a = discretize(readings, 60, iv);
    const RegularSeries b = discretize(shuffled, 60, iv);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (is_missing(a.values[i])) {
            CHECK(is_missing(b.values[i]));
        } else {
            CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("discretize rejects an interval shorter than one step") {
    CHECK_THROWS_AS(discretize({}, 60, {0, 300}), Error);
}

TEST_CASE("discretize handles dense cadences into hourly slots") {
    // 5-minute sampling into 60-minute slots: 12 readings averaged per slot.
    const std::int64_t t0 = 1459468800;
    const Stressor temp = Stressor::from_name("temperature");
    std::vector<RawReading> readings;
    for (int i = 0; i < 12 * 24; ++i) {
        readings.push_back({"s1", temp, t0 + i * 300, 1.0});
    }
    const RegularSeries s = discretize(readings, 60, {t0, t0 + 86400});
    REQUIRE(s.values.size() == 24);
    for (double v : s.values) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("standardize hits the sample-std convention") {
    const RegularSeries s = standardize(make_series({1, 2, 3}));
    CHECK(s.values[0] == doctest::Approx(-1.0));
    CHECK(s.values[1] == doctest::Approx(0.0));
    CHECK(s.values[2] == doctest::Approx(1.0));
    CHECK(s.scale.mean == doctest::Approx(2.0));
    CHECK(s.scale.stddev == doctest::Approx(1.0));
    CHECK_FALSE(s.scale.degenerate);
}

TEST_CASE("standardize flags constant series as degenerate") {
    const RegularSeries s = standardize(make_series({4, 4, 4}));
    for (double v : s.values) CHECK(v == 0.0);
    CHECK(s.scale.degenerate);
    CHECK(s.scale.mean == doctest::Approx(4.0));
    CHECK(s.scale.stddev == 1.0);
}

TEST_CASE("standardized series has mean 0 and std 1, missing preserved") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d(5.0, 3.0);
    std::vector<double> v(500);
    for (auto& x : v) x = d(rng);
    v[17] = kMissing;
    v[301] = kMissing;
    const RegularSeries s = standardize(make_series(v));
    double sum = 0, ss = 0;
    std::size_t n = 0;
    for (double x : s.values) {
        if (is_missing(x)) continue;
        sum += x;
        ++n;
    }
    const double mean = sum / static_cast<double>(n);
    for (double x : s.values) {
        if (!is_missing(x)) ss += (x - mean) * (x - mean);
    }
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(ss / static_cast<double>(n - 1)) - 1.0) < 1e-9);
    CHECK(is_missing(s.values[17]));
    CHECK(is_missing(s.values[301]));
}

TEST_CASE("invert_scaling undoes standardize") {
    const std::vector<double> v{-1, 0, 1};
    const auto orig = invert_scaling(v, {2.0, 1.0, false});
    CHECK(orig == std::vector<double>{1, 2, 3});

    std::mt19937_64 rng(9);
    std::normal_distribution<double> d(0, 10);
    std::vector<double> raw(128);
    for (auto& x : raw) x = d(rng);
    const RegularSeries s = standardize(make_series(raw));
    const auto back = invert_scaling(s.values, s.scale);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        CHECK(back[i] == doctest::Approx(raw[i]).epsilon(1e-12));
    }
}

TEST_CASE("impute is the identity when nothing is missing") {
    const auto r = impute_missing(make_series({1, 2, 1, 2, 1, 2}), 1);
    CHECK(r.imputed_indices.empty());
    CHECK(r.series.values == std::vector<double>{1, 2, 1, 2, 1, 2});
}

TEST_CASE("impute fills an interior gap with the AR(1) prediction") {
    // Noiseless AR(1): x_t = 0.8 x_{t-1}.
    std::vector<double> v(120);
    v[0] = 1.0;
    for (std::size_t i = 1; i < v.size(); ++i) v[i] = 0.8 * v[i - 1];
    const double expect = 0.8 * v[49];
    v[50] = kMissing;
    const auto r = impute_missing(make_series(v), 1);
    CHECK(r.imputed_indices == std::vector<std::size_t>{50});
    CHECK(r.series.values[50] == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("impute fills leading gaps with the standardized mean") {
    std::vector<double> v{kMissing, kMissing, 1, -1, 1, -1, 1, -1};
    const auto r = impute_missing(make_series(v), 2);
    CHECK(r.imputed_indices == std::vector<std::size_t>{0, 1});
    CHECK(r.series.values[0] == 0.0);
    CHECK(r.series.values[1] == 0.0);
}

TEST_CASE("impute never touches present values") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> noise(0, 1);
    std::vector<double> v(300);
    for (auto& x : v) x = noise(rng);
    auto gappy = v;
    for (std::size_t i = 40; i < 300; i += 53) gappy[i] = kMissing;
    const auto r = impute_missing(make_series(gappy), 2);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!is_missing(gappy[i])) CHECK(r.series.values[i] == gappy[i]);
    }
    for (double x : r.series.values) CHECK_FALSE(is_missing(x));
}

TEST_CASE("impute refuses series with too few present values") {
    const std::vector<double> v{1.0, kMissing, kMissing, kMissing};
    CHECK_THROWS_AS(impute_missing(make_series(v), 1), Error);
}

TEST_CASE("sinc_smooth keeps an in-band bin-aligned sinusoid intact") {
    const std::size_t n = 240;  // 10 days hourly
    std::vector<double> v(n);
    // Bin 10 of a 240-sample hourly series sits at exactly 1 cycle/day.
    for (std::size_t t = 0; t < n; ++t) {
        v[t] = std::cos(2 * 3.14159265358979323846 * 10.0 * static_cast<double>(t) / n);
    }
    const RegularSeries out = sinc_smooth(make_series(v), 0.5, 6.0);
    for (std::size_t t = 0; t < n; ++t) {
        CHECK(out.values[t] == doctest::Approx(v[t]).epsilon(1e-9));
    }
}

TEST_CASE("sinc_smooth with positive low cut removes the mean") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> d(5.0, 1.0);
    std::vector<double> v(200);
    for (auto& x : v) x = d(rng);
    const RegularSeries out = sinc_smooth(make_series(v), 0.2, 6.0);
    double mean = 0;
    for (double x : out.values) mean += x;
    mean /= static_cast<double>(out.values.size());
    CHECK(std::abs(mean) < 1e-9);
}

TEST_CASE("sinc_smooth separates in-band from out-of-band against the DFT oracle") {
    const std::size_t n = 480;  // 20 days hourly
    const double tau = 2 * 3.14159265358979323846;
    std::vector<double> v(n), inband(n);
    // 1 cycle/day (bin 20) is in [0.5, 6]; 12 cycles/day (bin 240 = Nyquist)
    // and DC are outside.
    for (std::size_t t = 0; t < n; ++t) {
        inband[t] = std::sin(tau * 20.0 * static_cast<double>(t) / n);
        v[t] = 3.0 + inband[t] + 0.7 * std::cos(tau * 240.0 * static_cast<double>(t) / n);
    }
    const RegularSeries got = sinc_smooth(make_series(v), 0.5, 6.0);
    const auto want = oracles::naive_bandpass(v, 60, 0.5, 6.0);
    for (std::size_t t = 0; t < n; ++t) {
        CHECK(got.values[t] == doctest::Approx(want[t]).epsilon(1e-9));
        CHECK(got.values[t] == doctest::Approx(inband[t]).epsilon(1e-9));
    }
}

TEST_CASE("sinc_smooth is an idempotent projection") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> d(0, 1);
    std::vector<double> v(336);
    for (auto& x : v) x = d(rng);
    const RegularSeries once = sinc_smooth(make_series(v), 0.2, 6.0);
    const RegularSeries twice = sinc_smooth(once, 0.2, 6.0);
    for (std::size_t t = 0; t < v.size(); ++t) {
        CHECK(twice.values[t] == doctest::Approx(once.values[t]).epsilon(1e-9));
    }
}

TEST_CASE("sinc_smooth validates inputs") {
    CHECK_THROWS_AS(sinc_smooth(make_series({1, 2, 3}), 0.2, 6.0), Error);  // too short
    CHECK_THROWS_AS(sinc_smooth(make_series({1, 2, 3, 4}), 6.0, 0.2), Error);
    CHECK_THROWS_AS(sinc_smooth(make_series({1, 2, 3, 4}), 0.0, 13.0), Error);  // > Nyquist
    std::vector<double> with_gap{1, 2, kMissing, 4};
    CHECK_THROWS_AS(sinc_smooth(make_series(with_gap), 0.2, 6.0), Error);
}

TEST_CASE("typical_profile averages by local time of day") {
    // 30 identical days, hourly steps: the profile is the daily pattern.
    const int days = 30;
    std::vector<double> v;
    std::vector<double> day(24);
    for (int h = 0; h < 24; ++h) day[static_cast<std::size_t>(h)] = std::sin(h / 24.0 * 6.28);
    for (int d = 0; d < days; ++d) v.insert(v.end(), day.begin(), day.end());

    const std::int64_t start = *parse_iso8601("2016-04-01T00:00:00Z");
    const TypicalProfile p = typical_profile(make_series(v, 60, start), 30, 0);
    REQUIRE(p.slots.size() == 24);
    for (int h = 0; h < 24; ++h) {
        CHECK(p.at(h) == doctest::Approx(day[static_cast<std::size_t>(h)]).epsilon(1e-12));
    }
    // Cyclic indexing works for any integer.
    CHECK(p.at(-1) == doctest::Approx(day[23]));
    CHECK(p.at(240) == doctest::Approx(day[0]));
}

TEST_CASE("typical_profile respects the local offset") {
    std::vector<double> v;
    for (int d = 0; d < 30; ++d) {
        for (int h = 0; h < 24; ++h) v.push_back(static_cast<double>(h));
    }
    const std::int64_t start = *parse_iso8601("2016-04-01T00:00:00Z");
    const TypicalProfile p = typical_profile(make_series(v, 60, start), 30, 60);
    // Sample at UTC hour 0 lands in local slot 1.
    CHECK(p.at(1) == doctest::Approx(0.0));
    CHECK(p.at(0) == doctest::Approx(23.0));
}

TEST_CASE("typical_profile tracks drift through the trailing window") {
    // 60 days where the second month runs 1.0 higher: a profile computed at
    // the end must reflect the recent level, matching a direct average.
    std::vector<double> v;
    for (int d = 0; d < 60; ++d) {
        for (int h = 0; h < 24; ++h) {
            v.push_back(std::sin(h / 24.0 * 6.28) + (d >= 30 ? 1.0 : 0.0));
        }
    }
    const std::int64_t start = *parse_iso8601("2016-04-01T00:00:00Z");
    const TypicalProfile late = typical_profile(make_series(v, 60, start), 30, 0);
    std::vector<double> direct(24, 0.0);
    for (std::size_t i = v.size() - 30 * 24; i < v.size(); ++i) {
        direct[i % 24] += v[i] / 30.0;
    }
    for (int h = 0; h < 24; ++h) {
        CHECK(late.at(h) == doctest::Approx(direct[static_cast<std::size_t>(h)]).epsilon(1e-12));
    }
    // A week earlier the window still straddles the level change.
    std::vector<double> earlier(v.begin(), v.end() - 7 * 24);
    const TypicalProfile early = typical_profile(make_series(earlier, 60, start), 30, 0);
    CHECK(std::abs(early.at(3) - late.at(3)) > 0.1);
}

TEST_CASE("typical_profile needs enough history") {
    std::vector<double> v(24 * 10, 1.0);
    CHECK_THROWS_AS(typical_profile(make_series(v), 30, 0), Error);
}
