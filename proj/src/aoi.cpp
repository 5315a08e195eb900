#include "gazefeed/aoi.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace gazefeed {

Modality parse_modality(const std::string& s) {
    if (s == "image") return Modality::image;
    if (s == "text") return Modality::text;
    throw std::invalid_argument("unknown modality `" + s + "`");
}

const char* to_string(Modality m) { return m == Modality::image ? "image" : "text"; }

void ScreenLayout::validate() const {
    if (screen_id.empty()) throw std::invalid_argument("layout: empty screen_id");
    if (aois.size() != 8) {
        throw std::invalid_argument("layout " + screen_id + ": expected exactly 8 movie AOIs, got " +
                                    std::to_string(aois.size()));
    }
    auto check_bounds = [&](const AoiBox& box, const char* what) {
        const Rect& r = box.rect;
        if (r.width <= 0 || r.height <= 0 || r.left < 0 || r.top < 0 ||
            r.left + r.width > kScreenWidthPx || r.top + r.height > kScreenHeightPx) {
            throw std::invalid_argument("layout " + screen_id + ": " + what + " rect for movie " +
                                        std::to_string(box.movie_id) + " outside 1920x1200");
        }
    };
    std::set<MovieId> ids;
    for (const auto& box : aois) {
        check_bounds(box, "aoi");
        if (!ids.insert(box.movie_id).second) {
            throw std::invalid_argument("layout " + screen_id + ": duplicate movie id " +
                                        std::to_string(box.movie_id));
        }
    }
    for (std::size_t i = 0; i < aois.size(); ++i) {
        for (std::size_t j = i + 1; j < aois.size(); ++j) {
            if (aois[i].rect.overlaps(aois[j].rect)) {
                throw std::invalid_argument("layout " + screen_id + ": AOI rects overlap");
            }
        }
    }
    for (const auto& box : detail_button_rects) check_bounds(box, "detail button");
    for (const auto& box : select_button_rects) check_bounds(box, "select button");
}

double ThresholdSpec::tau(const UserDurationStats& stats) const {
    switch (kind) {
        case ThresholdKind::mu_plus_sigma: return stats.mu_ms + stats.sigma_ms;
        case ThresholdKind::mu: return stats.mu_ms;
        case ThresholdKind::mu_minus_sigma: return stats.mu_ms - stats.sigma_ms;
    }
    throw std::logic_error("bad ThresholdKind");
}

const char* ThresholdSpec::label() const {
    switch (kind) {
        case ThresholdKind::mu_plus_sigma: return "mu_plus_sigma";
        case ThresholdKind::mu: return "mu";
        case ThresholdKind::mu_minus_sigma: return "mu_minus_sigma";
    }
    throw std::logic_error("bad ThresholdKind");
}

ThresholdSpec parse_threshold(const std::string& label) {
    if (label == "mu_plus_sigma") return {ThresholdKind::mu_plus_sigma};
    if (label == "mu") return {ThresholdKind::mu};
    if (label == "mu_minus_sigma") return {ThresholdKind::mu_minus_sigma};
    throw std::invalid_argument("unknown threshold `" + label + "`");
}

AoiDwell aggregate_dwell(const std::string& user_id, const std::vector<Fixation>& fixations,
                         const ScreenLayout& layout) {
    AoiDwell dwell;
    dwell.user_id = user_id;
    dwell.screen_id = layout.screen_id;
    dwell.modality = layout.modality;
    for (const auto& box : layout.aois) dwell.duration_ms[box.movie_id] = 0.0;

    for (const auto& f : fixations) {
        if (f.screen_id != layout.screen_id) {
            throw std::invalid_argument("aggregate_dwell: fixation from screen " + f.screen_id +
                                        " against layout " + layout.screen_id);
        }
        for (const auto& box : layout.aois) {
            if (box.rect.contains(f.centroid_x, f.centroid_y)) {
                dwell.duration_ms[box.movie_id] += f.duration_ms;
                break;  // AOI rects are disjoint
            }
        }
    }
    return dwell;
}

UserDurationStats compute_user_stats(const std::vector<AoiDwell>& dwells, Modality modality) {
    std::vector<double> values;
    int n_screens = 0;
    std::string user_id;
    for (const auto& d : dwells) {
        if (user_id.empty()) {
            user_id = d.user_id;
        } else if (d.user_id != user_id) {
            throw std::invalid_argument("compute_user_stats: dwells from multiple users (" +
                                        user_id + ", " + d.user_id + ")");
        }
        if (d.modality != modality) continue;
        ++n_screens;
        for (const auto& [movie, ms] : d.duration_ms) {
            (void)movie;
            values.push_back(ms);
        }
    }
    if (values.empty()) {
        throw std::runtime_error(std::string("compute_user_stats: no dwell records of modality ") +
                                 to_string(modality));
    }

    double sum = 0.0;
    for (double v : values) sum += v;
    double mu = sum / static_cast<double>(values.size());
    double sigma = 0.0;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - mu) * (v - mu);
        sigma = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }

    UserDurationStats stats;
    stats.user_id = user_id;
    stats.modality = modality;
    stats.mu_ms = mu;
    stats.sigma_ms = sigma;
    stats.n_screens = n_screens;
    return stats;
}

std::set<MovieId> apply_threshold(const AoiDwell& dwell, const UserDurationStats& stats,
                                  const ThresholdSpec& spec) {
    if (stats.user_id != dwell.user_id) {
        throw std::invalid_argument("apply_threshold: stats user " + stats.user_id +
                                    " does not match dwell user " + dwell.user_id);
    }
    if (stats.modality != dwell.modality) {
        throw std::invalid_argument("apply_threshold: modality mismatch for user " + dwell.user_id);
    }
    // τ below zero clamps to "fixated at all"; the inequality stays strict.
    double cutoff = std::max(spec.tau(stats), 0.0);
    std::set<MovieId> included;
    for (const auto& [movie, ms] : dwell.duration_ms) {
        if (ms > cutoff) included.insert(movie);
    }
    return included;
}

namespace {

nlohmann::json rect_to_json(const Rect& r) {
    return {{"left", r.left}, {"top", r.top}, {"width", r.width}, {"height", r.height}};
}

Rect rect_from_json(const nlohmann::json& j) {
    Rect r;
    r.left = j.at("left").get<double>();
    r.top = j.at("top").get<double>();
    r.width = j.at("width").get<double>();
    r.height = j.at("height").get<double>();
    return r;
}

nlohmann::json boxes_to_json(const std::vector<AoiBox>& boxes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : boxes) {
        arr.push_back({{"movie_id", b.movie_id}, {"rect", rect_to_json(b.rect)}});
    }
    return arr;
}

std::vector<AoiBox> boxes_from_json(const nlohmann::json& arr) {
    std::vector<AoiBox> boxes;
    for (const auto& j : arr) {
        boxes.push_back({j.at("movie_id").get<MovieId>(), rect_from_json(j.at("rect"))});
    }
    return boxes;
}

}  // namespace

std::vector<ScreenLayout> load_layouts(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
        throw FormatError(std::string("layout document: ") + ex.what());
    }
    if (!doc.is_array()) throw FormatError("layout document: expected a JSON array of screens");
    std::vector<ScreenLayout> layouts;
    try {
        for (const auto& j : doc) {
            ScreenLayout layout;
            layout.screen_id = j.at("screen_id").get<std::string>();
            layout.modality = parse_modality(j.at("modality").get<std::string>());
            layout.aois = boxes_from_json(j.at("aois"));
            layout.detail_button_rects = boxes_from_json(j.at("detail_button_rects"));
            layout.select_button_rects = boxes_from_json(j.at("select_button_rects"));
            layout.validate();
            layouts.push_back(std::move(layout));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw FormatError(std::string("layout document: ") + ex.what());
    }
    return layouts;
}

void write_layouts(std::ostream& out, const std::vector<ScreenLayout>& layouts) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& layout : layouts) {
        arr.push_back({{"screen_id", layout.screen_id},
                       {"modality", to_string(layout.modality)},
                       {"aois", boxes_to_json(layout.aois)},
                       {"detail_button_rects", boxes_to_json(layout.detail_button_rects)},
                       {"select_button_rects", boxes_to_json(layout.select_button_rects)}});
    }
    out << arr.dump(2) << "\n";
}

}  // namespace gazefeed
