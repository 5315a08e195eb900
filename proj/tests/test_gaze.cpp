#include "gazefeed/gaze.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <random>
#include <sstream>

using namespace gazefeed;

namespace {

constexpr double kDt = 1000.0 / 60.0;  // 60 Hz sample interval

std::vector<GazeSample> stationary_burst(const std::string& screen, double t0, double x, double y,
                                         int n, double dt = kDt) {
    std::vector<GazeSample> out;
    for (int i = 0; i < n; ++i) {
        out.push_back({screen, t0 + i * dt, x, y, true});
    }
    return out;
}

void append(std::vector<GazeSample>& dst, const std::vector<GazeSample>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

}  // namespace

TEST_SUITE("gaze") {

TEST_CASE("parse_gaze_log maps fields directly") {
    std::istringstream in("screen_id,timestamp_ms,x_px,y_px,valid\ns1,0,960,600,1\n");
    GazeLog log = parse_gaze_log(in);
    REQUIRE(log.errors.empty());
    REQUIRE(log.samples.size() == 1);
    const GazeSample& s = log.samples[0];
    CHECK(s.screen_id == "s1");
    CHECK(s.timestamp_ms == 0.0);
    CHECK(s.x == 960.0);
    CHECK(s.y == 600.0);
    CHECK(s.valid);
}

TEST_CASE("parse_gaze_log accepts an empty file with a valid header") {
    std::istringstream in("screen_id,timestamp_ms,x_px,y_px,valid\n");
    GazeLog log = parse_gaze_log(in);
    CHECK(log.samples.empty());
    CHECK(log.errors.empty());
}

TEST_CASE("parse_gaze_log collects one bad row among 100") {
    std::ostringstream file;
    file << "screen_id,timestamp_ms,x_px,y_px,valid\n";
    for (int i = 0; i < 100; ++i) {
        if (i == 42) {
            file << "s1," << i * kDt << ",not_a_number,600,1\n";
        } else {
            file << "s1," << i * kDt << ",960,600,1\n";
        }
    }
    std::istringstream in(file.str());
    GazeLog log = parse_gaze_log(in);
    CHECK(log.samples.size() == 99);
    REQUIRE(log.errors.size() == 1);
    CHECK(log.errors[0].line == 44);  // header +1, rows are lines 2..101
}

TEST_CASE("parse_gaze_log rejects a missing header") {
    std::istringstream in("s1,0,960,600,1\n");
    CHECK_THROWS_AS(parse_gaze_log(in), FormatError);
}

TEST_CASE("parse_gaze_log fails once more than 10% of rows are bad") {
    std::ostringstream file;
    file << "screen_id,timestamp_ms,x_px,y_px,valid\n";
    for (int i = 0; i < 10; ++i) {
        file << "s1," << i * kDt << (i < 8 ? ",960,600,1\n" : ",bad,600,1\n");
    }
    std::istringstream in(file.str());
    CHECK_THROWS_AS(parse_gaze_log(in), FormatError);
}

TEST_CASE("parse_gaze_log flags valid samples outside the canvas") {
    std::ostringstream file;
    file << "screen_id,timestamp_ms,x_px,y_px,valid\n";
    file << "s1,0,1921,600,1\n";    // valid but off-canvas → row error
    file << "s1,16,-5,600,0\n";     // invalid sample may sit anywhere
    for (int i = 2; i < 12; ++i) file << "s1," << i * 16 << ",960,600,1\n";
    std::istringstream in(file.str());
    GazeLog log = parse_gaze_log(in);
    CHECK(log.samples.size() == 11);
    CHECK(log.errors.size() == 1);
}

TEST_CASE("detect_fixations: 30 stationary samples form one fixation") {
    auto samples = stationary_burst("s1", 0.0, 960.0, 600.0, 30);
    FixationParams params;  // defaults: 80 px, 100 ms, 75 ms
    auto fixations = detect_fixations(samples, params);
    REQUIRE(fixations.size() == 1);
    CHECK(fixations[0].duration_ms == doctest::Approx(29 * kDt));  // ≈ 483 ms
    CHECK(fixations[0].centroid_x == doctest::Approx(960.0));
    CHECK(fixations[0].centroid_y == doctest::Approx(600.0));
    CHECK(fixations[0].start_ms == 0.0);
}

TEST_CASE("detect_fixations: alternating far-apart samples yield nothing") {
    std::vector<GazeSample> samples;
    for (int i = 0; i < 40; ++i) {
        bool even = i % 2 == 0;
        samples.push_back({"s1", i * kDt, even ? 0.0 : 1900.0, even ? 0.0 : 1100.0, true});
    }
    FixationParams params;
    params.dispersion_threshold_px = 100.0;
    CHECK(detect_fixations(samples, params).empty());
}

TEST_CASE("detect_fixations: two clusters joined by a transition sample") {
    // 300 ms clusters 800 px apart; expected output computed by the
    // enumeration oracle and pinned here.
    std::vector<GazeSample> samples = stationary_burst("s1", 0.0, 400.0, 600.0, 19);
    double t = 19 * kDt;
    samples.push_back({"s1", t, 800.0, 600.0, true});
    append(samples, stationary_burst("s1", t + kDt, 1200.0, 600.0, 19));

    FixationParams params;
    auto fixations = detect_fixations(samples, params);
    auto expected = oracle::idt_fixations(samples, params);
    REQUIRE(fixations.size() == 2);
    REQUIRE(expected.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(fixations[i].start_ms == expected[i].start_ms);
        CHECK(fixations[i].duration_ms == expected[i].duration_ms);
        CHECK(fixations[i].centroid_x == expected[i].centroid_x);
        CHECK(fixations[i].centroid_y == expected[i].centroid_y);
    }
    CHECK(fixations[0].centroid_x == doctest::Approx(400.0));
    CHECK(fixations[1].centroid_x == doctest::Approx(1200.0));
    CHECK(fixations[0].duration_ms == doctest::Approx(18 * kDt));
}

TEST_CASE("detect_fixations rejects unsorted input") {
    std::vector<GazeSample> samples = {{"s1", 100.0, 960, 600, true},
                                       {"s1", 50.0, 960, 600, true}};
    CHECK_THROWS_AS(detect_fixations(samples, FixationParams{}), std::invalid_argument);
}

TEST_CASE("detect_fixations rejects multi-screen input and bad params") {
    std::vector<GazeSample> samples = {{"s1", 0.0, 960, 600, true},
                                       {"s2", 16.0, 960, 600, true}};
    CHECK_THROWS_AS(detect_fixations(samples, FixationParams{}), std::invalid_argument);
    FixationParams bad;
    bad.min_duration_ms = 0.0;
    CHECK_THROWS_AS(detect_fixations({}, bad), std::invalid_argument);
}

TEST_CASE("invalid gap up to max_gap_ms bridges a fixation") {
    FixationParams params;
    auto base = stationary_burst("s1", 0.0, 500.0, 500.0, 30);
    auto baseline = detect_fixations(base, params).size();
    REQUIRE(baseline == 1);

    // mark a middle run invalid; extent (k−1)·dt must stay ≤ max_gap
    for (int k = 1; (k - 1) * kDt <= params.max_gap_ms; ++k) {
        auto samples = base;
        for (int i = 12; i < 12 + k; ++i) samples[i].valid = false;
        CAPTURE(k);
        CHECK(detect_fixations(samples, params).size() == 1);
    }
    // one past the budget splits the window into two halves (each still long
    // enough to be its own fixation here)
    auto samples = base;
    int k_too_many = static_cast<int>(params.max_gap_ms / kDt) + 2;
    for (int i = 12; i < 12 + k_too_many; ++i) samples[i].valid = false;
    CHECK(detect_fixations(samples, params).size() == 2);
}

TEST_CASE("fixation properties on randomized traces") {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> ux(0.0, 1920.0);
    std::uniform_real_distribution<double> uy(0.0, 1200.0);
    std::uniform_real_distribution<double> jitter(-15.0, 15.0);
    std::uniform_int_distribution<int> burst_len(2, 40);
    std::uniform_int_distribution<int> mode(0, 3);

    FixationParams params;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<GazeSample> samples;
        double t = 0.0;
        while (samples.size() < 120) {
            int m = mode(rng);
            int n = burst_len(rng);
            double cx = ux(rng), cy = uy(rng);
            for (int i = 0; i < n; ++i) {
                GazeSample s;
                s.screen_id = "s1";
                s.timestamp_ms = t;
                s.x = m == 0 ? std::clamp(cx + jitter(rng), 0.0, 1920.0) : ux(rng);
                s.y = m == 0 ? std::clamp(cy + jitter(rng), 0.0, 1200.0) : uy(rng);
                s.valid = m != 2;
                samples.push_back(s);
                t += kDt;
            }
        }

        auto fixations = detect_fixations(samples, params);
        auto expected = oracle::idt_fixations(samples, params);

        // equivalence with the enumeration oracle
        REQUIRE(fixations.size() == expected.size());
        for (std::size_t i = 0; i < fixations.size(); ++i) {
            CHECK(fixations[i].start_ms == expected[i].start_ms);
            CHECK(fixations[i].duration_ms == expected[i].duration_ms);
            CHECK(fixations[i].centroid_x == doctest::Approx(expected[i].centroid_x));
            CHECK(fixations[i].centroid_y == doctest::Approx(expected[i].centroid_y));
        }

        // no overlap, sorted by start, durations meet the minimum
        for (std::size_t i = 0; i < fixations.size(); ++i) {
            CHECK(fixations[i].duration_ms >= params.min_duration_ms);
            if (i > 0) {
                CHECK(fixations[i].start_ms >=
                      fixations[i - 1].start_ms + fixations[i - 1].duration_ms);
            }
        }

        // determinism
        auto again = detect_fixations(samples, params);
        REQUIRE(again.size() == fixations.size());
        for (std::size_t i = 0; i < fixations.size(); ++i) {
            CHECK(again[i].start_ms == fixations[i].start_ms);
            CHECK(again[i].centroid_x == fixations[i].centroid_x);
        }
    }
}

TEST_CASE("member bounding box of each fixation respects the dispersion cap") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pos(200.0, 1700.0);
    std::uniform_real_distribution<double> step(-30.0, 30.0);
    FixationParams params;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<GazeSample> samples;
        double x = pos(rng), y = pos(rng) * 0.6, t = 0.0;
        for (int i = 0; i < 300; ++i) {
            x = std::clamp(x + step(rng), 0.0, 1920.0);
            y = std::clamp(y + step(rng), 0.0, 1200.0);
            samples.push_back({"s1", t, x, y, true});
            t += kDt;
        }
        for (const auto& f : detect_fixations(samples, params)) {
            double min_x = 1e9, max_x = -1e9, min_y = 1e9, max_y = -1e9;
            for (const auto& s : samples) {
                if (s.timestamp_ms < f.start_ms ||
                    s.timestamp_ms > f.start_ms + f.duration_ms || !s.valid) {
                    continue;
                }
                min_x = std::min(min_x, s.x);
                max_x = std::max(max_x, s.x);
                min_y = std::min(min_y, s.y);
                max_y = std::max(max_y, s.y);
            }
            CHECK((max_x - min_x) + (max_y - min_y) <= params.dispersion_threshold_px + 1e-9);
            CHECK(f.centroid_x >= min_x);
            CHECK(f.centroid_x <= max_x);
            CHECK(f.centroid_y >= min_y);
            CHECK(f.centroid_y <= max_y);
        }
    }
}

}  // TEST_SUITE
