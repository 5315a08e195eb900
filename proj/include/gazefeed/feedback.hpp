// feedback.hpp — study events and MovieLens-format ratings, per-method
// training-set assembly under the modality hold-out protocol, and the
// inclusion-percentage analysis.
//
// Interaction users are keyed by string. Background (ratings) users use their
// numeric id as decimal text; study users are keyed "study:<user_id>", which
// keeps the two populations identity-disjoint by construction.

#pragma once

#include "gazefeed/aoi.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <utility>

namespace gazefeed {

struct StudyEvents {
    std::string user_id;
    std::string screen_id;
    Modality modality = Modality::image;
    std::array<MovieId, 8> presented{};
    MovieId selected = 0;
    std::set<MovieId> detailed;
    std::set<MovieId> seen;  // analysis ground truth only, never a training pair
};

struct Rating {
    std::int64_t user_id = 0;
    MovieId movie_id = 0;
    double rating = 0.0;  // half-star steps, 0.5–5.0
    std::int64_t timestamp = 0;
};

enum class MethodKind { random, selected, selected_detailed, selected_detailed_aoi };

struct FeedbackMethod {
    MethodKind kind = MethodKind::random;
    ThresholdSpec threshold{};  // meaningful only for selected_detailed_aoi

    std::string label() const;        // machine label, e.g. "selected_detailed_aoi_mu"
    std::string table_label() const;  // Table-style label, e.g. "Selected, Detailed, AOIs μ"

    static std::vector<FeedbackMethod> all();  // the six table rows, in table order
    static FeedbackMethod from_label(const std::string& label);
};

inline std::string study_user_key(const std::string& user_id) { return "study:" + user_id; }
inline std::string background_user_key(std::int64_t user_id) { return std::to_string(user_id); }

struct InteractionSet {
    // sorted, duplicate-free (user key, movie) pairs
    std::vector<std::pair<std::string, MovieId>> pairs;
    std::map<std::string, int> user_index;  // contiguous, assigned over sorted keys
    std::map<MovieId, int> item_index;

    int n_users() const { return static_cast<int>(user_index.size()); }
    int n_items() const { return static_cast<int>(item_index.size()); }
    bool contains(const std::string& user, MovieId movie) const;

    static InteractionSet from_pairs(const std::set<std::pair<std::string, MovieId>>& pairs);
};

struct EventsLog {
    std::vector<StudyEvents> events;
    std::vector<RowError> errors;
};

struct RatingsLog {
    std::vector<Rating> ratings;
    std::vector<RowError> errors;
};

// CSV `userId,movieId,rating,timestamp` (MovieLens format).
RatingsLog load_ratings(std::istream& in);

// CSV `user_id,screen_id,modality,presented,selected,detailed,seen` where the
// id lists are ;-separated. Rows violating the StudyEvents invariants are
// collected as row errors.
EventsLog load_events(std::istream& in);

// Keeps users with at least one rating ≥ 4.0 on a study movie, then binarizes
// all of their ratings ≥ 4.0 (any movie). Output is independent of row order.
InteractionSet prepare_background(const std::vector<Rating>& ratings,
                                  const std::set<MovieId>& study_movies);

struct HoldOut {
    std::string user_id;
    Modality modality = Modality::image;
};

using DwellKey = std::pair<std::string, std::string>;  // (user_id, screen_id)
using DwellMap = std::map<DwellKey, AoiDwell>;
using StatsKey = std::pair<std::string, Modality>;
using StatsMap = std::map<StatsKey, UserDurationStats>;

// Background pairs plus study pairs from every screen outside the held-out
// (user, modality) set. selected → always a pair (methods past random);
// detailed added for selected_detailed and AOI methods; AOI methods union in
// apply_threshold output. `random` contributes no study pairs.
InteractionSet assemble_training(const FeedbackMethod& method,
                                 const std::vector<StudyEvents>& events, const DwellMap& dwells,
                                 const StatsMap& stats, const InteractionSet& background,
                                 const std::optional<HoldOut>& held_out);

struct InclusionCell {
    double mean_pct = 0.0;
    int n_screens = 0;  // screens where the category was non-empty
};

struct InclusionRow {
    std::string filter_label;  // all_movies | unfiltered_aoi | mu_plus_sigma | mu | mu_minus_sigma
    InclusionCell selected, detailed, seen, all_presented;
};

struct InclusionReport {
    std::vector<InclusionRow> rows;  // fixed order: all_movies, unfiltered_aoi, μ+σ, μ, μ−σ
};

// Per screen, the percentage of each category retained by each dwell filter,
// averaged across screens (screens with an empty category skipped for it).
InclusionReport inclusion_analysis(const std::vector<StudyEvents>& events, const DwellMap& dwells,
                                   const StatsMap& stats);

void write_inclusion_csv(std::ostream& out, const InclusionReport& report);
std::string inclusion_markdown(const InclusionReport& report);

}  // namespace gazefeed
