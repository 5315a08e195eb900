#include "gazefeed/aoi.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <random>
#include <sstream>

using namespace gazefeed;

namespace {

// Two rows of four 200x150 boxes, movie ids 1..8.
ScreenLayout grid_layout(const std::string& screen_id = "s1",
                         Modality modality = Modality::image) {
    ScreenLayout layout;
    layout.screen_id = screen_id;
    layout.modality = modality;
    for (int i = 0; i < 8; ++i) {
        double left = 100.0 + (i % 4) * 400.0;
        double top = 200.0 + (i / 4) * 500.0;
        layout.aois.push_back({i + 1, {left, top, 200.0, 150.0}});
        layout.detail_button_rects.push_back({i + 1, {left, top + 160.0, 60.0, 20.0}});
        layout.select_button_rects.push_back({i + 1, {left + 80.0, top + 160.0, 60.0, 20.0}});
    }
    layout.validate();
    return layout;
}

Fixation fix_at(const std::string& screen, double x, double y, double duration) {
    Fixation f;
    f.screen_id = screen;
    f.start_ms = 0.0;
    f.duration_ms = duration;
    f.centroid_x = x;
    f.centroid_y = y;
    return f;
}

AoiDwell dwell_with(const std::string& user, Modality modality,
                    const std::vector<double>& durations, const std::string& screen = "s1") {
    AoiDwell d;
    d.user_id = user;
    d.screen_id = screen;
    d.modality = modality;
    for (std::size_t i = 0; i < durations.size(); ++i) {
        d.duration_ms[static_cast<MovieId>(i + 1)] = durations[i];
    }
    return d;
}

UserDurationStats stats_of(const std::string& user, Modality modality, double mu, double sigma) {
    UserDurationStats s;
    s.user_id = user;
    s.modality = modality;
    s.mu_ms = mu;
    s.sigma_ms = sigma;
    s.n_screens = 1;
    return s;
}

}  // namespace

TEST_SUITE("aoi") {

TEST_CASE("layout validation catches bad geometry") {
    ScreenLayout layout = grid_layout();
    SUBCASE("valid layout passes") { CHECK_NOTHROW(layout.validate()); }
    SUBCASE("seven AOIs fail") {
        layout.aois.pop_back();
        CHECK_THROWS_AS(layout.validate(), std::invalid_argument);
    }
    SUBCASE("overlapping AOIs fail") {
        layout.aois[1].rect = layout.aois[0].rect;
        layout.aois[1].rect.left += 10.0;
        CHECK_THROWS_AS(layout.validate(), std::invalid_argument);
    }
    SUBCASE("out-of-canvas rect fails") {
        layout.aois[7].rect.left = 1900.0;
        CHECK_THROWS_AS(layout.validate(), std::invalid_argument);
    }
}

TEST_CASE("aggregate_dwell sums durations into the hit AOI") {
    ScreenLayout layout = grid_layout();
    // movie 3's rect: left 900, top 200
    std::vector<Fixation> fixations = {fix_at("s1", 950.0, 250.0, 200.0),
                                       fix_at("s1", 1000.0, 300.0, 300.0)};
    AoiDwell dwell = aggregate_dwell("u1", fixations, layout);
    CHECK(dwell.duration_ms.at(3) == 500.0);
    for (MovieId m : {1, 2, 4, 5, 6, 7, 8}) CHECK(dwell.duration_ms.at(m) == 0.0);
}

TEST_CASE("aggregate_dwell ignores centroids outside every AOI") {
    ScreenLayout layout = grid_layout();
    std::vector<Fixation> fixations = {fix_at("s1", 50.0, 50.0, 400.0)};
    AoiDwell dwell = aggregate_dwell("u1", fixations, layout);
    for (const auto& [movie, ms] : dwell.duration_ms) {
        (void)movie;
        CHECK(ms == 0.0);
    }
}

TEST_CASE("aggregate_dwell rect membership is left/top inclusive, right/bottom exclusive") {
    ScreenLayout layout = grid_layout();
    const Rect r = layout.aois[0].rect;  // movie 1
    CHECK(aggregate_dwell("u", {fix_at("s1", r.left, r.top, 100.0)}, layout).duration_ms.at(1) ==
          100.0);
    CHECK(aggregate_dwell("u", {fix_at("s1", r.left + r.width, r.top, 100.0)}, layout)
              .duration_ms.at(1) == 0.0);
    CHECK(aggregate_dwell("u", {fix_at("s1", r.left, r.top + r.height, 100.0)}, layout)
              .duration_ms.at(1) == 0.0);
}

TEST_CASE("aggregate_dwell rejects a screen mismatch") {
    ScreenLayout layout = grid_layout();
    CHECK_THROWS_AS(aggregate_dwell("u1", {fix_at("s2", 950.0, 250.0, 100.0)}, layout),
                    std::invalid_argument);
}

TEST_CASE("aggregate_dwell matches the brute-force hit-test oracle on random traces") {
    ScreenLayout layout = grid_layout();
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ux(0.0, 1920.0);
    std::uniform_real_distribution<double> uy(0.0, 1200.0);
    std::uniform_real_distribution<double> dur(10.0, 800.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Fixation> fixations;
        for (int i = 0; i < 50; ++i) fixations.push_back(fix_at("s1", ux(rng), uy(rng), dur(rng)));
        AoiDwell dwell = aggregate_dwell("u1", fixations, layout);
        auto expected = oracle::dwell_totals(fixations, layout);
        double fixation_total = 0.0, dwell_total = 0.0;
        for (const auto& f : fixations) fixation_total += f.duration_ms;
        for (const auto& [movie, ms] : dwell.duration_ms) {
            CHECK(ms == doctest::Approx(expected.at(movie)).epsilon(1e-12));
            dwell_total += ms;
        }
        CHECK(dwell_total <= fixation_total + 1e-9);
    }
}

TEST_CASE("compute_user_stats: single screen population of 8 values") {
    // oracle (two-pass sample std over [1000,2000,3000,0,0,0,0,0]):
    // mean 750, Σdev² = 9.5e6, σ = sqrt(9.5e6/7) = 1164.9649...
    auto [mu, sigma] = oracle::mean_sample_std({1000, 2000, 3000, 0, 0, 0, 0, 0});
    REQUIRE(mu == doctest::Approx(750.0));
    REQUIRE(sigma == doctest::Approx(1164.96489).epsilon(1e-6));

    std::vector<AoiDwell> dwells = {
        dwell_with("u1", Modality::image, {1000, 2000, 3000, 0, 0, 0, 0, 0})};
    UserDurationStats stats = compute_user_stats(dwells, Modality::image);
    CHECK(stats.mu_ms == doctest::Approx(750.0));
    CHECK(stats.sigma_ms == doctest::Approx(sigma).epsilon(1e-12));
    CHECK(stats.n_screens == 1);
}

TEST_CASE("compute_user_stats: constant durations have zero sigma") {
    std::vector<AoiDwell> dwells = {
        dwell_with("u1", Modality::text, {500, 500, 500, 500, 500, 500, 500, 500}, "a"),
        dwell_with("u1", Modality::text, {500, 500, 500, 500, 500, 500, 500, 500}, "b")};
    UserDurationStats stats = compute_user_stats(dwells, Modality::text);
    CHECK(stats.mu_ms == 500.0);
    CHECK(stats.sigma_ms == 0.0);
    CHECK(stats.n_screens == 2);
}

TEST_CASE("compute_user_stats merges screens into one population") {
    std::vector<double> a = {120, 0, 310, 45, 0, 990, 12, 0};
    std::vector<double> b = {0, 64, 0, 830, 220, 0, 75, 400};
    std::vector<AoiDwell> dwells = {dwell_with("u7", Modality::image, a, "s1"),
                                    dwell_with("u7", Modality::image, b, "s2"),
                                    dwell_with("u7", Modality::text, {1, 2, 3, 4, 5, 6, 7, 8}, "t")};
    std::vector<double> merged = a;
    merged.insert(merged.end(), b.begin(), b.end());
    auto [mu, sigma] = oracle::mean_sample_std(merged);

    UserDurationStats stats = compute_user_stats(dwells, Modality::image);
    CHECK(stats.mu_ms == doctest::Approx(mu).epsilon(1e-12));
    CHECK(stats.sigma_ms == doctest::Approx(sigma).epsilon(1e-12));
    CHECK(stats.n_screens == 2);
}

TEST_CASE("compute_user_stats errors") {
    std::vector<AoiDwell> dwells = {dwell_with("u1", Modality::image, {1, 0, 0, 0, 0, 0, 0, 0})};
    CHECK_THROWS(compute_user_stats(dwells, Modality::text));  // no records of that modality
    dwells.push_back(dwell_with("u2", Modality::image, {1, 0, 0, 0, 0, 0, 0, 0}, "s2"));
    CHECK_THROWS_AS(compute_user_stats(dwells, Modality::image), std::invalid_argument);
}

TEST_CASE("apply_threshold keeps movies strictly above tau") {
    AoiDwell dwell = dwell_with("u1", Modality::image, {100, 200, 300, 400, 500, 600, 700, 800});
    auto included = apply_threshold(dwell, stats_of("u1", Modality::image, 150.0, 0.0),
                                    {ThresholdKind::mu});
    CHECK(included == std::set<MovieId>{2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("apply_threshold: negative tau clamps to any positive dwell") {
    AoiDwell dwell = dwell_with("u1", Modality::image, {0, 10, 0, 5, 0, 0, 1, 0});
    // μ = 100, σ = 300 → μ−σ = −200
    auto included = apply_threshold(dwell, stats_of("u1", Modality::image, 100.0, 300.0),
                                    {ThresholdKind::mu_minus_sigma});
    CHECK(included == std::set<MovieId>{2, 4, 7});
}

TEST_CASE("apply_threshold: duration exactly tau is excluded") {
    AoiDwell dwell = dwell_with("u1", Modality::image, {150, 150.0001, 0, 0, 0, 0, 0, 0});
    auto included = apply_threshold(dwell, stats_of("u1", Modality::image, 150.0, 0.0),
                                    {ThresholdKind::mu});
    CHECK(included == std::set<MovieId>{2});
}

TEST_CASE("apply_threshold rejects user or modality mismatches") {
    AoiDwell dwell = dwell_with("u1", Modality::image, {1, 2, 3, 4, 5, 6, 7, 8});
    CHECK_THROWS_AS(
        apply_threshold(dwell, stats_of("u2", Modality::image, 1.0, 1.0), {ThresholdKind::mu}),
        std::invalid_argument);
    CHECK_THROWS_AS(
        apply_threshold(dwell, stats_of("u1", Modality::text, 1.0, 1.0), {ThresholdKind::mu}),
        std::invalid_argument);
}

TEST_CASE("threshold monotonicity and scale invariance over random fixtures") {
    std::mt19937_64 rng(512);
    std::uniform_real_distribution<double> dur(0.0, 2000.0);
    std::uniform_real_distribution<double> scale_dist(0.1, 8.0);
    std::bernoulli_distribution zero(0.35);

    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> durations(8);
        for (double& d : durations) d = zero(rng) ? 0.0 : dur(rng);
        AoiDwell dwell = dwell_with("u1", Modality::image, durations);
        UserDurationStats stats =
            compute_user_stats({dwell}, Modality::image);

        auto plus = apply_threshold(dwell, stats, {ThresholdKind::mu_plus_sigma});
        auto mid = apply_threshold(dwell, stats, {ThresholdKind::mu});
        auto minus = apply_threshold(dwell, stats, {ThresholdKind::mu_minus_sigma});
        CHECK(std::includes(mid.begin(), mid.end(), plus.begin(), plus.end()));
        CHECK(std::includes(minus.begin(), minus.end(), mid.begin(), mid.end()));

        // never includes a zero-dwell movie
        for (MovieId m : minus) CHECK(dwell.duration_ms.at(m) > 0.0);

        // scaling durations by c > 0 rescales μ/σ and keeps the sets
        double c = scale_dist(rng);
        std::vector<double> scaled = durations;
        for (double& d : scaled) d *= c;
        AoiDwell dwell_c = dwell_with("u1", Modality::image, scaled);
        UserDurationStats stats_c = compute_user_stats({dwell_c}, Modality::image);
        CHECK(stats_c.mu_ms == doctest::Approx(c * stats.mu_ms).epsilon(1e-9));
        CHECK(stats_c.sigma_ms == doctest::Approx(c * stats.sigma_ms).epsilon(1e-9));
        for (ThresholdKind kind :
             {ThresholdKind::mu_plus_sigma, ThresholdKind::mu, ThresholdKind::mu_minus_sigma}) {
            CHECK(apply_threshold(dwell_c, stats_c, {kind}) ==
                  apply_threshold(dwell, stats, {kind}));
        }
    }
}

TEST_CASE("layout JSON round trip") {
    std::vector<ScreenLayout> layouts = {grid_layout("s1", Modality::image),
                                         grid_layout("s2", Modality::text)};
    std::stringstream buf;
    write_layouts(buf, layouts);
    auto loaded = load_layouts(buf);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].screen_id == "s1");
    CHECK(loaded[1].modality == Modality::text);
    CHECK(loaded[0].aois.size() == 8);
    CHECK(loaded[0].aois[3].rect.left == layouts[0].aois[3].rect.left);
    CHECK(loaded[1].detail_button_rects.size() == 8);

    std::istringstream bad("{\"not\": \"an array\"}");
    CHECK_THROWS_AS(load_layouts(bad), FormatError);
}

}  // TEST_SUITE
