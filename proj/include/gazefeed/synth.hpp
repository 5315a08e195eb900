// synth.hpp — seeded generator of a complete synthetic study: circular-list
// layouts, 60 Hz gaze logs, selection/detail/seen events, background ratings,
// and the ground truth behind all of it.
//
// Per (user, movie) affinity is the cosine of non-negative genre vectors. A
// movie's target dwell on a screen is base_ms + affinity_gain_ms·affinity +
// Gaussian noise; targets under min_dwell_ms emit no AOI visit, so every
// emitted burst is long enough for the detector. Bursts realize the target to
// within half a sample interval and the ground truth stores the target, so
// detect_fixations + aggregate_dwell recover it to ±Δ/2. The selected movie
// is the affinity argmax.

#pragma once

#include "gazefeed/feedback.hpp"

#include <filesystem>

namespace gazefeed {

struct SynthConfig {
    int n_users = 55;
    int n_movies = 400;  // study catalog; screens draw from 1..n_movies
    int n_genres = 12;
    int screens_per_modality = 12;

    // Dwell model. With the defaults, movies outside the user's genres mostly
    // stay below min_dwell_ms and draw no visit (roughly 44% of slots get
    // looked at), so which movies were fixated at all carries preference
    // signal of its own.
    double base_ms = 0.0;
    double affinity_gain_ms = 1100.0;
    double noise_sigma_ms = 120.0;
    double min_dwell_ms = 250.0;  // attention floor; targets below it emit no visit
    double jitter_px = 2.0;       // within-fixation scatter, far below dispersion thresholds

    // Per-screen utility = affinity + selection_noise · (noise_sigma_ms /
    // affinity_gain_ms) · N(0,1); the selected movie is the utility argmax.
    // Selection reads preference through the same noise floor as dwell, so a
    // noiseless study makes it the exact affinity argmax.
    double selection_noise = 4.0;

    double detail_click_prob = 0.35;
    double seen_prob = 0.25;
    double sample_rate_hz = 60.0;

    int n_background_users = 500;
    int background_ratings_per_user = 30;
    int catalog_slack = 100;  // background-only movie ids above n_movies

    std::uint64_t seed = 1;

    void validate() const;
};

struct PlantedMovie {
    MovieId movie_id = 0;
    double affinity = 0.0;  // in [0, 1]
    double dwell_ms = 0.0;  // target dwell; 0 when the movie was not visited
};

struct GroundTruthScreen {
    std::string user_id;
    std::string screen_id;
    Modality modality = Modality::image;
    MovieId best_movie = 0;  // utility argmax = the selected movie
    std::vector<PlantedMovie> movies;  // presented order
};

struct GroundTruth {
    std::vector<GroundTruthScreen> screens;
};

struct SynthStudy {
    std::vector<ScreenLayout> layouts;
    std::map<std::string, std::vector<GazeSample>> gaze_by_user;  // timestamps restart per screen
    std::vector<StudyEvents> events;
    std::vector<Rating> background;
    GroundTruth truth;
};

SynthStudy generate_study(const SynthConfig& config);

// Emits layouts.json, events.csv, ratings.csv, ground_truth.csv and
// gaze/<user_id>.csv under dir. Byte-identical for identical studies.
void write_study(const std::filesystem::path& dir, const SynthStudy& study);

GroundTruth load_ground_truth(std::istream& in);

}  // namespace gazefeed
