#include "gazefeed/gaze.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace gazefeed {

void FixationParams::validate() const {
    if (dispersion_threshold_px <= 0.0 || min_duration_ms <= 0.0 || max_gap_ms <= 0.0) {
        throw std::invalid_argument("FixationParams: all fields must be strictly positive");
    }
}

GazeLog parse_gaze_log(std::istream& in) {
    require_header(in, "screen_id,timestamp_ms,x_px,y_px,valid", "gaze log");

    GazeLog log;
    std::map<std::string, double> last_ts;  // per-screen monotonicity check
    std::string line;
    int line_no = 1;
    std::size_t attempted = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        ++attempted;
        auto fields = split_fields(line);
        try {
            if (fields.size() != 5) throw std::runtime_error("expected 5 fields");
            GazeSample s;
            s.screen_id = fields[0];
            s.timestamp_ms = parse_double(fields[1], "timestamp_ms");
            s.x = parse_double(fields[2], "x_px");
            s.y = parse_double(fields[3], "y_px");
            s.valid = parse_bool01(fields[4], "valid");
            if (s.screen_id.empty()) throw std::runtime_error("empty screen_id");
            if (s.valid && (s.x < 0.0 || s.x > kScreenWidthPx || s.y < 0.0 || s.y > kScreenHeightPx)) {
                throw std::runtime_error("valid sample outside 1920x1200 canvas");
            }
            auto it = last_ts.find(s.screen_id);
            if (it != last_ts.end() && s.timestamp_ms < it->second) {
                throw std::runtime_error("timestamp decreases within screen " + s.screen_id);
            }
            last_ts[s.screen_id] = s.timestamp_ms;
            log.samples.push_back(std::move(s));
        } catch (const std::exception& ex) {
            log.errors.push_back({line_no, ex.what()});
        }
    }
    enforce_error_budget(attempted, log.errors, "gaze log");
    return log;
}

namespace {

struct BBox {
    double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    explicit BBox(const GazeSample& s) : min_x(s.x), max_x(s.x), min_y(s.y), max_y(s.y) {}
    double dispersion_with(const GazeSample& s) const {
        double lo_x = std::min(min_x, s.x), hi_x = std::max(max_x, s.x);
        double lo_y = std::min(min_y, s.y), hi_y = std::max(max_y, s.y);
        return (hi_x - lo_x) + (hi_y - lo_y);
    }
    void add(const GazeSample& s) {
        min_x = std::min(min_x, s.x);
        max_x = std::max(max_x, s.x);
        min_y = std::min(min_y, s.y);
        max_y = std::max(max_y, s.y);
    }
};

}  // namespace

std::vector<Fixation> detect_fixations(const std::vector<GazeSample>& samples,
                                       const FixationParams& params) {
    params.validate();
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].screen_id != samples[0].screen_id) {
            throw std::invalid_argument("detect_fixations: samples span multiple screens");
        }
        if (samples[i].timestamp_ms < samples[i - 1].timestamp_ms) {
            throw std::invalid_argument("detect_fixations: samples not sorted by timestamp");
        }
    }

    // Valid-sample indices; all window logic runs on these.
    std::vector<std::size_t> v;
    v.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].valid) v.push_back(i);
    }

    // Bridgeable between consecutive valid samples: either contiguous, or the
    // invalid run between them spans at most max_gap_ms.
    auto bridge_ok = [&](std::size_t pos) {
        std::size_t a = v[pos], b = v[pos + 1];
        if (b == a + 1) return true;
        double run = samples[b - 1].timestamp_ms - samples[a + 1].timestamp_ms;
        return run <= params.max_gap_ms;
    };

    std::vector<Fixation> out;
    std::size_t start = 0;
    while (start < v.size()) {
        BBox box(samples[v[start]]);
        std::size_t end = start;
        while (end + 1 < v.size() && bridge_ok(end) &&
               box.dispersion_with(samples[v[end + 1]]) <= params.dispersion_threshold_px) {
            ++end;
            box.add(samples[v[end]]);
        }
        double span = samples[v[end]].timestamp_ms - samples[v[start]].timestamp_ms;
        if (span >= params.min_duration_ms) {
            Fixation f;
            f.screen_id = samples[v[start]].screen_id;
            f.start_ms = samples[v[start]].timestamp_ms;
            f.duration_ms = span;
            double sx = 0, sy = 0;
            for (std::size_t p = start; p <= end; ++p) {
                sx += samples[v[p]].x;
                sy += samples[v[p]].y;
            }
            double n = static_cast<double>(end - start + 1);
            f.centroid_x = sx / n;
            f.centroid_y = sy / n;
            out.push_back(std::move(f));
            start = end + 1;
        } else {
            ++start;
        }
    }
    return out;
}

}  // namespace gazefeed
