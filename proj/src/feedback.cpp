#include "gazefeed/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gazefeed {

std::string FeedbackMethod::label() const {
    switch (kind) {
        case MethodKind::random: return "random";
        case MethodKind::selected: return "selected";
        case MethodKind::selected_detailed: return "selected_detailed";
        case MethodKind::selected_detailed_aoi:
            return std::string("selected_detailed_aoi_") + threshold.label();
    }
    throw std::logic_error("bad MethodKind");
}

std::string FeedbackMethod::table_label() const {
    switch (kind) {
        case MethodKind::random: return "Baseline (Random)";
        case MethodKind::selected: return "Baseline (Selected)";
        case MethodKind::selected_detailed: return "Baseline (Selected, Detailed)";
        case MethodKind::selected_detailed_aoi:
            switch (threshold.kind) {
                case ThresholdKind::mu_plus_sigma: return "Selected, Detailed, AOIs μ+σ";
                case ThresholdKind::mu: return "Selected, Detailed, AOIs μ";
                case ThresholdKind::mu_minus_sigma: return "Selected, Detailed, AOIs μ−σ";
            }
    }
    throw std::logic_error("bad MethodKind");
}

std::vector<FeedbackMethod> FeedbackMethod::all() {
    return {
        {MethodKind::random, {}},
        {MethodKind::selected, {}},
        {MethodKind::selected_detailed, {}},
        {MethodKind::selected_detailed_aoi, {ThresholdKind::mu_plus_sigma}},
        {MethodKind::selected_detailed_aoi, {ThresholdKind::mu}},
        {MethodKind::selected_detailed_aoi, {ThresholdKind::mu_minus_sigma}},
    };
}

FeedbackMethod FeedbackMethod::from_label(const std::string& label) {
    for (const auto& m : all()) {
        if (m.label() == label) return m;
    }
    throw std::invalid_argument("unknown feedback method `" + label + "`");
}

bool InteractionSet::contains(const std::string& user, MovieId movie) const {
    return std::binary_search(pairs.begin(), pairs.end(), std::make_pair(user, movie));
}

InteractionSet InteractionSet::from_pairs(const std::set<std::pair<std::string, MovieId>>& pairs) {
    InteractionSet out;
    out.pairs.assign(pairs.begin(), pairs.end());
    for (const auto& [user, movie] : out.pairs) {
        out.user_index.emplace(user, 0);
        out.item_index.emplace(movie, 0);
    }
    int u = 0;
    for (auto& [user, idx] : out.user_index) {
        (void)user;
        idx = u++;
    }
    int i = 0;
    for (auto& [movie, idx] : out.item_index) {
        (void)movie;
        idx = i++;
    }
    return out;
}

RatingsLog load_ratings(std::istream& in) {
    require_header(in, "userId,movieId,rating,timestamp", "ratings");

    RatingsLog log;
    std::string line;
    int line_no = 1;
    std::size_t attempted = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        ++attempted;
        auto fields = split_fields(line);
        try {
            if (fields.size() != 4) throw std::runtime_error("expected 4 fields");
            Rating r;
            r.user_id = parse_int(fields[0], "userId");
            r.movie_id = parse_int(fields[1], "movieId");
            r.rating = parse_double(fields[2], "rating");
            r.timestamp = parse_int(fields[3], "timestamp");
            double steps = r.rating * 2.0;
            if (r.rating < 0.5 || r.rating > 5.0 || std::abs(steps - std::round(steps)) > 1e-9) {
                throw std::runtime_error("rating outside half-star range `" + fields[2] + "`");
            }
            log.ratings.push_back(r);
        } catch (const std::exception& ex) {
            log.errors.push_back({line_no, ex.what()});
        }
    }
    enforce_error_budget(attempted, log.errors, "ratings");
    return log;
}

namespace {

std::vector<MovieId> parse_id_list(const std::string& field, const char* name) {
    std::vector<MovieId> ids;
    if (field.empty()) return ids;
    for (const auto& part : split_fields(field, ';')) {
        ids.push_back(parse_int(part, name));
    }
    return ids;
}

}  // namespace

EventsLog load_events(std::istream& in) {
    require_header(in, "user_id,screen_id,modality,presented,selected,detailed,seen", "events");

    EventsLog log;
    std::string line;
    int line_no = 1;
    std::size_t attempted = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        ++attempted;
        auto fields = split_fields(line);
        try {
            if (fields.size() != 7) throw std::runtime_error("expected 7 fields");
            StudyEvents e;
            e.user_id = fields[0];
            e.screen_id = fields[1];
            e.modality = parse_modality(fields[2]);
            if (e.user_id.empty() || e.screen_id.empty()) {
                throw std::runtime_error("empty user_id or screen_id");
            }
            auto presented = parse_id_list(fields[3], "presented");
            if (presented.size() != 8) throw std::runtime_error("presented must list 8 movies");
            std::set<MovieId> in_screen(presented.begin(), presented.end());
            if (in_screen.size() != 8) throw std::runtime_error("presented movies not distinct");
            std::copy(presented.begin(), presented.end(), e.presented.begin());
            e.selected = parse_int(fields[4], "selected");
            if (!in_screen.count(e.selected)) {
                throw std::runtime_error("selected movie not among presented");
            }
            for (MovieId m : parse_id_list(fields[5], "detailed")) {
                if (!in_screen.count(m)) throw std::runtime_error("detailed movie not presented");
                e.detailed.insert(m);
            }
            for (MovieId m : parse_id_list(fields[6], "seen")) {
                if (!in_screen.count(m)) throw std::runtime_error("seen movie not presented");
                e.seen.insert(m);
            }
            log.events.push_back(std::move(e));
        } catch (const std::exception& ex) {
            log.errors.push_back({line_no, ex.what()});
        }
    }
    enforce_error_budget(attempted, log.errors, "events");
    return log;
}

InteractionSet prepare_background(const std::vector<Rating>& ratings,
                                  const std::set<MovieId>& study_movies) {
    if (study_movies.empty()) {
        throw std::invalid_argument("prepare_background: study movie set is empty");
    }
    std::set<std::int64_t> qualified;
    for (const auto& r : ratings) {
        if (r.rating >= 4.0 && study_movies.count(r.movie_id)) qualified.insert(r.user_id);
    }
    std::set<std::pair<std::string, MovieId>> pairs;
    for (const auto& r : ratings) {
        if (r.rating >= 4.0 && qualified.count(r.user_id)) {
            pairs.emplace(background_user_key(r.user_id), r.movie_id);
        }
    }
    return InteractionSet::from_pairs(pairs);
}

namespace {

// Movies a screen contributes under a method; `random` contributes none.
std::set<MovieId> method_movies(const FeedbackMethod& method, const StudyEvents& e,
                                const DwellMap& dwells, const StatsMap& stats) {
    std::set<MovieId> movies;
    if (method.kind == MethodKind::random) return movies;
    movies.insert(e.selected);
    if (method.kind == MethodKind::selected) return movies;
    movies.insert(e.detailed.begin(), e.detailed.end());
    if (method.kind == MethodKind::selected_detailed) return movies;

    auto stats_it = stats.find({e.user_id, e.modality});
    if (stats_it == stats.end()) {
        throw std::runtime_error("missing duration stats for user " + e.user_id + ", modality " +
                                 to_string(e.modality));
    }
    auto dwell_it = dwells.find({e.user_id, e.screen_id});
    if (dwell_it == dwells.end()) {
        throw std::runtime_error("missing dwell record for user " + e.user_id + ", screen " +
                                 e.screen_id);
    }
    auto thresholded = apply_threshold(dwell_it->second, stats_it->second, method.threshold);
    movies.insert(thresholded.begin(), thresholded.end());
    return movies;
}

}  // namespace

InteractionSet assemble_training(const FeedbackMethod& method,
                                 const std::vector<StudyEvents>& events, const DwellMap& dwells,
                                 const StatsMap& stats, const InteractionSet& background,
                                 const std::optional<HoldOut>& held_out) {
    if (held_out) {
        bool known = std::any_of(events.begin(), events.end(), [&](const StudyEvents& e) {
            return e.user_id == held_out->user_id;
        });
        if (!known) {
            throw std::invalid_argument("assemble_training: held-out user " + held_out->user_id +
                                        " has no study events");
        }
    }
    std::set<std::pair<std::string, MovieId>> pairs(background.pairs.begin(),
                                                    background.pairs.end());
    for (const auto& e : events) {
        if (held_out && e.user_id == held_out->user_id && e.modality == held_out->modality) {
            continue;
        }
        std::string key = study_user_key(e.user_id);
        for (MovieId m : method_movies(method, e, dwells, stats)) {
            pairs.emplace(key, m);
        }
    }
    return InteractionSet::from_pairs(pairs);
}

namespace {

struct CellAcc {
    double sum_pct = 0.0;
    int n = 0;
    void add(double pct) {
        sum_pct += pct;
        ++n;
    }
    InclusionCell finish() const { return {n > 0 ? sum_pct / n : 0.0, n}; }
};

struct RowAcc {
    CellAcc selected, detailed, seen, all_presented;
};

double pct_included(const std::set<MovieId>& category, const std::set<MovieId>& included) {
    int hit = 0;
    for (MovieId m : category) {
        if (included.count(m)) ++hit;
    }
    return 100.0 * static_cast<double>(hit) / static_cast<double>(category.size());
}

}  // namespace

InclusionReport inclusion_analysis(const std::vector<StudyEvents>& events, const DwellMap& dwells,
                                   const StatsMap& stats) {
    // Row 0 is "all movies" (no filter); rows 1..4 are the dwell filters.
    const std::array<std::string, 5> labels = {"all_movies", "unfiltered_aoi", "mu_plus_sigma",
                                               "mu", "mu_minus_sigma"};
    std::array<RowAcc, 5> acc;

    for (const auto& e : events) {
        auto stats_it = stats.find({e.user_id, e.modality});
        if (stats_it == stats.end()) {
            throw std::runtime_error("inclusion_analysis: missing stats for user " + e.user_id +
                                     ", modality " + to_string(e.modality));
        }
        auto dwell_it = dwells.find({e.user_id, e.screen_id});
        if (dwell_it == dwells.end()) {
            throw std::runtime_error("inclusion_analysis: missing dwell for user " + e.user_id +
                                     ", screen " + e.screen_id);
        }
        const AoiDwell& dwell = dwell_it->second;

        std::set<MovieId> presented(e.presented.begin(), e.presented.end());
        std::set<MovieId> sel{e.selected};

        std::array<std::set<MovieId>, 5> included;
        included[0] = presented;
        for (const auto& [movie, ms] : dwell.duration_ms) {
            if (ms > 0.0) included[1].insert(movie);
        }
        included[2] = apply_threshold(dwell, stats_it->second, {ThresholdKind::mu_plus_sigma});
        included[3] = apply_threshold(dwell, stats_it->second, {ThresholdKind::mu});
        included[4] = apply_threshold(dwell, stats_it->second, {ThresholdKind::mu_minus_sigma});

        for (std::size_t f = 0; f < acc.size(); ++f) {
            acc[f].selected.add(pct_included(sel, included[f]));
            if (!e.detailed.empty()) acc[f].detailed.add(pct_included(e.detailed, included[f]));
            if (!e.seen.empty()) acc[f].seen.add(pct_included(e.seen, included[f]));
            acc[f].all_presented.add(pct_included(presented, included[f]));
        }
    }

    InclusionReport report;
    for (std::size_t f = 0; f < acc.size(); ++f) {
        InclusionRow row;
        row.filter_label = labels[f];
        row.selected = acc[f].selected.finish();
        row.detailed = acc[f].detailed.finish();
        row.seen = acc[f].seen.finish();
        row.all_presented = acc[f].all_presented.finish();
        report.rows.push_back(std::move(row));
    }
    return report;
}

namespace {

std::string cell_csv(const InclusionCell& c) {
    if (c.n_screens == 0) return ",";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f,%d", c.mean_pct, c.n_screens);
    return buf;
}

std::string cell_md(const InclusionCell& c) {
    if (c.n_screens == 0) return "—";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", c.mean_pct);
    return buf;
}

const char* filter_display(const std::string& label) {
    if (label == "all_movies") return "All movies";
    if (label == "unfiltered_aoi") return "Unfiltered AOIs";
    if (label == "mu_plus_sigma") return "AOIs μ+σ";
    if (label == "mu") return "AOIs μ";
    return "AOIs μ−σ";
}

}  // namespace

void write_inclusion_csv(std::ostream& out, const InclusionReport& report) {
    out << "filter,selected_pct,selected_screens,detailed_pct,detailed_screens,"
           "seen_pct,seen_screens,all_presented_pct,all_presented_screens\n";
    for (const auto& row : report.rows) {
        out << row.filter_label << ',' << cell_csv(row.selected) << ',' << cell_csv(row.detailed)
            << ',' << cell_csv(row.seen) << ',' << cell_csv(row.all_presented) << '\n';
    }
}

std::string inclusion_markdown(const InclusionReport& report) {
    std::ostringstream out;
    out << "| Filter | Selected | Detailed | Seen | All presented |\n";
    out << "|---|---|---|---|---|\n";
    for (const auto& row : report.rows) {
        out << "| " << filter_display(row.filter_label) << " | " << cell_md(row.selected) << " | "
            << cell_md(row.detailed) << " | " << cell_md(row.seen) << " | "
            << cell_md(row.all_presented) << " |\n";
    }
    return out.str();
}

}  // namespace gazefeed
