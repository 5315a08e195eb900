#include "gazefeed/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace gazefeed {

void SynthConfig::validate() const {
    if (n_users < 1 || n_genres < 1 || screens_per_modality < 1 || n_background_users < 1 ||
        background_ratings_per_user < 1 || catalog_slack < 0) {
        throw std::invalid_argument("SynthConfig: counts out of range");
    }
    if (n_movies < 16 * screens_per_modality) {
        throw std::invalid_argument(
            "SynthConfig: n_movies must cover 2 x screens_per_modality x 8 distinct movies per "
            "user");
    }
    if (detail_click_prob < 0 || detail_click_prob > 1 || seen_prob < 0 || seen_prob > 1) {
        throw std::invalid_argument("SynthConfig: probabilities must lie in [0,1]");
    }
    if (sample_rate_hz <= 0 || base_ms < 0 || affinity_gain_ms < 0 || noise_sigma_ms < 0 ||
        min_dwell_ms < 0 || jitter_px < 0 || selection_noise < 0) {
        throw std::invalid_argument("SynthConfig: rates and durations must be non-negative");
    }
}

namespace {

using Vec = std::vector<double>;

void normalize(Vec& v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        v.assign(v.size(), 1.0 / std::sqrt(static_cast<double>(v.size())));
        return;
    }
    for (double& x : v) x /= norm;
}

// A movie leans on one primary genre plus a little spillover.
Vec movie_genre_vector(std::mt19937_64& rng, int dim) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vec v(dim);
    for (double& x : v) x = 0.15 * unit(rng);
    v[rng() % dim] += 1.0;
    normalize(v);
    return v;
}

// A user holds a ranked handful of preferred genres.
Vec user_genre_vector(std::mt19937_64& rng, int dim) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vec v(dim);
    for (double& x : v) x = 0.10 * unit(rng);
    const double weights[3] = {1.0, 0.55, 0.3};
    for (double w : weights) v[rng() % dim] += w;  // genres may repeat; that just sharpens
    normalize(v);
    return v;
}

double cosine_affinity(const Vec& a, const Vec& b) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return std::clamp(dot, 0.0, 1.0);
}

// 8 AOI slots on a circle centered in the 1920x1200 canvas.
ScreenLayout make_layout(const std::string& screen_id, Modality modality,
                         const std::vector<MovieId>& movies) {
    const double cx = kScreenWidthPx / 2.0;
    const double cy = kScreenHeightPx / 2.0;
    // adjacent slots are (111.3, 268.7) px apart at radius 380; boxes must
    // clear one axis on every pair
    const double radius = 380.0;
    const double box_w = modality == Modality::image ? 240.0 : 260.0;
    const double box_h = modality == Modality::image ? 200.0 : 110.0;

    ScreenLayout layout;
    layout.screen_id = screen_id;
    layout.modality = modality;
    for (int s = 0; s < 8; ++s) {
        double angle = 2.0 * M_PI * s / 8.0;
        double ax = cx + radius * std::cos(angle);
        double ay = cy + radius * std::sin(angle);
        Rect aoi{ax - box_w / 2.0, ay - box_h / 2.0, box_w, box_h};
        layout.aois.push_back({movies[s], aoi});
        // selection / detail buttons along the AOI's bottom edge
        Rect select{aoi.left + 10.0, aoi.top + aoi.height - 26.0, 80.0, 20.0};
        Rect detail{aoi.left + aoi.width - 90.0, aoi.top + aoi.height - 26.0, 80.0, 20.0};
        layout.select_button_rects.push_back({movies[s], select});
        layout.detail_button_rects.push_back({movies[s], detail});
    }
    layout.validate();
    return layout;
}

struct ScreenPlan {
    std::vector<MovieId> presented;   // 8
    std::vector<double> affinity;     // by presented order
    std::vector<double> dwell_ms;     // target dwell; 0 when the movie is skipped
    std::vector<int> n_samples;       // burst length realizing the target; 0 when skipped
    std::vector<int> visit_order;     // indices into presented with a burst
    MovieId best = 0;
};

}  // namespace

SynthStudy generate_study(const SynthConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    const double interval_ms = 1000.0 / config.sample_rate_hz;
    const int total_catalog = config.n_movies + config.catalog_slack;

    // Genre vectors for the full catalog (background users rate past n_movies).
    std::vector<Vec> movie_vec(total_catalog + 1);
    for (int m = 1; m <= total_catalog; ++m) movie_vec[m] = movie_genre_vector(rng, config.n_genres);

    SynthStudy study;

    for (int u = 1; u <= config.n_users; ++u) {
        char user_buf[16];
        std::snprintf(user_buf, sizeof(user_buf), "u%02d", u);
        std::string user_id = user_buf;
        Vec user_vec = user_genre_vector(rng, config.n_genres);
        auto& gaze = study.gaze_by_user[user_id];

        // each movie is presented to a user at most once across all screens,
        // so held-out screens never share movies with the user's own training
        // interactions
        std::vector<MovieId> user_pool(config.n_movies);
        std::iota(user_pool.begin(), user_pool.end(), MovieId{1});
        std::shuffle(user_pool.begin(), user_pool.end(), rng);
        std::size_t pool_next = 0;

        for (int mod = 0; mod < 2; ++mod) {
            Modality modality = mod == 0 ? Modality::image : Modality::text;
            for (int s = 0; s < config.screens_per_modality; ++s) {
                char screen_buf[32];
                std::snprintf(screen_buf, sizeof(screen_buf), "%s_%s_%02d", user_id.c_str(),
                              modality == Modality::image ? "img" : "txt", s + 1);
                std::string screen_id = screen_buf;

                ScreenPlan plan;
                plan.presented.assign(user_pool.begin() + pool_next,
                                      user_pool.begin() + pool_next + 8);
                pool_next += 8;

                // utility carries a per-screen taste shock on top of affinity
                const double shock_sigma =
                    config.affinity_gain_ms > 0.0
                        ? config.selection_noise * config.noise_sigma_ms / config.affinity_gain_ms
                        : 0.0;
                double best_utility = -1e300;
                for (MovieId m : plan.presented) {
                    double a = cosine_affinity(user_vec, movie_vec[m]);
                    plan.affinity.push_back(a);
                    double utility = a + shock_sigma * noise(rng);
                    if (utility > best_utility) {
                        best_utility = utility;
                        plan.best = m;
                    }
                }
                for (std::size_t p = 0; p < plan.presented.size(); ++p) {
                    double target = config.base_ms + config.affinity_gain_ms * plan.affinity[p] +
                                    config.noise_sigma_ms * noise(rng);
                    if (target < config.min_dwell_ms || target <= 0.0) {
                        plan.dwell_ms.push_back(0.0);
                        plan.n_samples.push_back(0);
                        continue;
                    }
                    plan.dwell_ms.push_back(target);
                    plan.n_samples.push_back(
                        std::max(2, static_cast<int>(std::lround(target / interval_ms)) + 1));
                    plan.visit_order.push_back(static_cast<int>(p));
                }
                std::shuffle(plan.visit_order.begin(), plan.visit_order.end(), rng);

                ScreenLayout layout = make_layout(screen_id, modality, plan.presented);

                // gaze trace: stationary burst per visited AOI, 2-sample saccade between
                double t = 0.0;
                double prev_x = kScreenWidthPx / 2.0;
                double prev_y = kScreenHeightPx / 2.0;
                bool first_visit = true;
                if (plan.visit_order.empty()) {
                    // nothing held attention; a brief center glance keeps the
                    // screen present in the log without producing a fixation
                    for (int q = 0; q < 3; ++q) {
                        GazeSample sample;
                        sample.screen_id = screen_id;
                        sample.timestamp_ms = t;
                        sample.x = prev_x + config.jitter_px * (2.0 * unit(rng) - 1.0);
                        sample.y = prev_y + config.jitter_px * (2.0 * unit(rng) - 1.0);
                        gaze.push_back(std::move(sample));
                        t += interval_ms;
                    }
                }
                for (int p : plan.visit_order) {
                    const Rect& r = layout.aois[p].rect;
                    double ax = r.left + r.width / 2.0;
                    double ay = r.top + r.height / 2.0;
                    if (!first_visit) {
                        for (double frac : {1.0 / 3.0, 2.0 / 3.0}) {
                            GazeSample s_mid;
                            s_mid.screen_id = screen_id;
                            s_mid.timestamp_ms = t;
                            s_mid.x = prev_x + frac * (ax - prev_x);
                            s_mid.y = prev_y + frac * (ay - prev_y);
                            gaze.push_back(std::move(s_mid));
                            t += interval_ms;
                        }
                    }
                    first_visit = false;
                    int n_samples = plan.n_samples[p];
                    for (int q = 0; q < n_samples; ++q) {
                        GazeSample sample;
                        sample.screen_id = screen_id;
                        sample.timestamp_ms = t;
                        sample.x = ax + config.jitter_px * (2.0 * unit(rng) - 1.0);
                        sample.y = ay + config.jitter_px * (2.0 * unit(rng) - 1.0);
                        gaze.push_back(std::move(sample));
                        t += interval_ms;
                    }
                    prev_x = ax;
                    prev_y = ay;
                }

                StudyEvents event;
                event.user_id = user_id;
                event.screen_id = screen_id;
                event.modality = modality;
                std::copy(plan.presented.begin(), plan.presented.end(), event.presented.begin());
                event.selected = plan.best;

                // detail clicks concentrate on the top-dwell movies
                std::vector<int> by_dwell(8);
                std::iota(by_dwell.begin(), by_dwell.end(), 0);
                std::sort(by_dwell.begin(), by_dwell.end(), [&](int a, int b) {
                    if (plan.dwell_ms[a] != plan.dwell_ms[b]) {
                        return plan.dwell_ms[a] > plan.dwell_ms[b];
                    }
                    return plan.presented[a] < plan.presented[b];
                });
                for (int rank = 0; rank < 3; ++rank) {
                    int p = by_dwell[rank];
                    if (plan.dwell_ms[p] <= 0.0) continue;
                    if (unit(rng) < config.detail_click_prob) event.detailed.insert(plan.presented[p]);
                }
                for (std::size_t p = 0; p < plan.presented.size(); ++p) {
                    double prob = std::clamp(config.seen_prob * (0.4 + 1.2 * plan.affinity[p]), 0.0, 1.0);
                    if (unit(rng) < prob) event.seen.insert(plan.presented[p]);
                }

                GroundTruthScreen gt;
                gt.user_id = user_id;
                gt.screen_id = screen_id;
                gt.modality = modality;
                gt.best_movie = plan.best;
                for (std::size_t p = 0; p < plan.presented.size(); ++p) {
                    gt.movies.push_back({plan.presented[p], plan.affinity[p], plan.dwell_ms[p]});
                }

                study.layouts.push_back(std::move(layout));
                study.events.push_back(std::move(event));
                study.truth.screens.push_back(std::move(gt));
            }
        }
    }

    // background population, identity-disjoint from the study users
    std::uniform_int_distribution<MovieId> catalog_dist(1, total_catalog);
    std::int64_t next_timestamp = 1'000'000'000;
    for (int b = 0; b < config.n_background_users; ++b) {
        std::int64_t user_id = 100'000 + b;
        Vec user_vec = user_genre_vector(rng, config.n_genres);
        std::set<MovieId> rated;
        while (static_cast<int>(rated.size()) < config.background_ratings_per_user) {
            rated.insert(catalog_dist(rng));
        }
        for (MovieId m : rated) {
            double a = cosine_affinity(user_vec, movie_vec[m]);
            double raw = 2.75 + 2.5 * a + 0.35 * noise(rng);
            double stars = std::clamp(std::round(raw * 2.0) / 2.0, 0.5, 5.0);
            study.background.push_back({user_id, m, stars, next_timestamp++});
        }
    }
    return study;
}

namespace {

std::string fmt_ms(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string join_ids(const std::set<MovieId>& ids) {
    std::string out;
    for (MovieId m : ids) {
        if (!out.empty()) out.push_back(';');
        out += std::to_string(m);
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary: no platform newline translation
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

void write_study(const std::filesystem::path& dir, const SynthStudy& study) {
    std::filesystem::create_directories(dir / "gaze");

    {
        auto out = open_out(dir / "layouts.json");
        write_layouts(out, study.layouts);
    }
    {
        auto out = open_out(dir / "events.csv");
        out << "user_id,screen_id,modality,presented,selected,detailed,seen\n";
        for (const auto& e : study.events) {
            std::string presented;
            for (MovieId m : e.presented) {
                if (!presented.empty()) presented.push_back(';');
                presented += std::to_string(m);
            }
            out << e.user_id << ',' << e.screen_id << ',' << to_string(e.modality) << ','
                << presented << ',' << e.selected << ',' << join_ids(e.detailed) << ','
                << join_ids(e.seen) << '\n';
        }
    }
    {
        auto out = open_out(dir / "ratings.csv");
        out << "userId,movieId,rating,timestamp\n";
        char buf[16];
        for (const auto& r : study.background) {
            std::snprintf(buf, sizeof(buf), "%.1f", r.rating);
            out << r.user_id << ',' << r.movie_id << ',' << buf << ',' << r.timestamp << '\n';
        }
    }
    {
        auto out = open_out(dir / "ground_truth.csv");
        out << "user_id,screen_id,modality,movie_id,affinity,planted_dwell_ms,is_selected\n";
        char buf[32];
        for (const auto& s : study.truth.screens) {
            for (const auto& m : s.movies) {
                std::snprintf(buf, sizeof(buf), "%.9f", m.affinity);
                out << s.user_id << ',' << s.screen_id << ',' << to_string(s.modality) << ','
                    << m.movie_id << ',' << buf << ',' << fmt_ms(m.dwell_ms) << ','
                    << (m.movie_id == s.best_movie ? 1 : 0) << '\n';
            }
        }
    }
    for (const auto& [user_id, samples] : study.gaze_by_user) {
        auto out = open_out(dir / "gaze" / (user_id + ".csv"));
        out << "screen_id,timestamp_ms,x_px,y_px,valid\n";
        for (const auto& s : samples) {
            out << s.screen_id << ',' << fmt_ms(s.timestamp_ms) << ',' << fmt_ms(s.x) << ','
                << fmt_ms(s.y) << ',' << (s.valid ? '1' : '0') << '\n';
        }
    }
}

GroundTruth load_ground_truth(std::istream& in) {
    require_header(in, "user_id,screen_id,modality,movie_id,affinity,planted_dwell_ms,is_selected",
                   "ground truth");
    GroundTruth truth;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_fields(line);
        if (fields.size() != 7) throw FormatError("ground truth: expected 7 fields");
        if (truth.screens.empty() || truth.screens.back().screen_id != fields[1] ||
            truth.screens.back().user_id != fields[0]) {
            GroundTruthScreen s;
            s.user_id = fields[0];
            s.screen_id = fields[1];
            s.modality = parse_modality(fields[2]);
            truth.screens.push_back(std::move(s));
        }
        auto& screen = truth.screens.back();
        PlantedMovie m;
        m.movie_id = parse_int(fields[3], "movie_id");
        m.affinity = parse_double(fields[4], "affinity");
        m.dwell_ms = parse_double(fields[5], "planted_dwell_ms");
        if (parse_bool01(fields[6], "is_selected")) screen.best_movie = m.movie_id;
        screen.movies.push_back(std::move(m));
    }
    return truth;
}

}  // namespace gazefeed
