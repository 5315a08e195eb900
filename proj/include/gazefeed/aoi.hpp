// aoi.hpp — screen geometry, per-movie dwell aggregation, per-user duration
// statistics and the μ+σ / μ / μ−σ threshold filters.
//
// The statistics population for one (user, modality) is every per-movie total
// duration across that user's screens of the modality — 8 values per screen,
// zeros included for movies never fixated. Sigma is the sample (n−1) standard
// deviation; a population of one value has sigma 0.

#pragma once

#include "gazefeed/gaze.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace gazefeed {

using MovieId = std::int64_t;

enum class Modality { image, text };

Modality parse_modality(const std::string& s);  // "image" | "text"
const char* to_string(Modality m);

struct Rect {
    double left = 0, top = 0, width = 0, height = 0;

    // left/top-inclusive, right/bottom-exclusive
    bool contains(double x, double y) const {
        return x >= left && x < left + width && y >= top && y < top + height;
    }
    bool overlaps(const Rect& o) const {
        return left < o.left + o.width && o.left < left + width && top < o.top + o.height &&
               o.top < top + height;
    }
};

struct AoiBox {
    MovieId movie_id = 0;
    Rect rect;
};

struct ScreenLayout {
    std::string screen_id;
    Modality modality = Modality::image;
    std::vector<AoiBox> aois;  // exactly 8, pairwise non-overlapping
    std::vector<AoiBox> detail_button_rects;
    std::vector<AoiBox> select_button_rects;

    void validate() const;  // throws std::invalid_argument
};

struct AoiDwell {
    std::string user_id;
    std::string screen_id;
    Modality modality = Modality::image;
    std::map<MovieId, double> duration_ms;  // keys are exactly the screen's 8 movie ids
};

struct UserDurationStats {
    std::string user_id;
    Modality modality = Modality::image;
    double mu_ms = 0.0;
    double sigma_ms = 0.0;
    int n_screens = 0;
};

enum class ThresholdKind { mu_plus_sigma, mu, mu_minus_sigma };

struct ThresholdSpec {
    ThresholdKind kind = ThresholdKind::mu;

    double tau(const UserDurationStats& stats) const;
    const char* label() const;  // "mu_plus_sigma" | "mu" | "mu_minus_sigma"
};

ThresholdSpec parse_threshold(const std::string& label);

// Adds each fixation whose centroid falls inside a movie AOI to that movie's
// total. Fixations must belong to layout.screen_id.
AoiDwell aggregate_dwell(const std::string& user_id, const std::vector<Fixation>& fixations,
                         const ScreenLayout& layout);

// dwells must all belong to one user and contain at least one record of the
// requested modality.
UserDurationStats compute_user_stats(const std::vector<AoiDwell>& dwells, Modality modality);

// Movies with duration strictly greater than τ. A negative τ clamps to "any
// positive dwell": a movie never fixated is never included.
std::set<MovieId> apply_threshold(const AoiDwell& dwell, const UserDurationStats& stats,
                                  const ThresholdSpec& spec);

// Layout document: a JSON array of ScreenLayout objects.
std::vector<ScreenLayout> load_layouts(std::istream& in);
void write_layouts(std::ostream& out, const std::vector<ScreenLayout>& layouts);

}  // namespace gazefeed
