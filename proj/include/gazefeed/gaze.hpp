// gaze.hpp — raw gaze log parsing and dispersion-based (I-DT) fixation detection.
//
// Detection walks the valid samples left to right and greedily grows a window
// while its bounding-box dispersion (width + height) stays within
// dispersion_threshold_px. A maximal window spanning at least min_duration_ms
// becomes one fixation; windows never overlap. Invalid samples are excluded
// from centroids and dispersion but a run of them inside a window is bridged
// when its time extent is at most max_gap_ms; longer runs split the window.

#pragma once

#include "gazefeed/csv.hpp"

#include <string>
#include <vector>

namespace gazefeed {

inline constexpr double kScreenWidthPx = 1920.0;
inline constexpr double kScreenHeightPx = 1200.0;

struct GazeSample {
    std::string screen_id;
    double timestamp_ms = 0.0;
    double x = 0.0;
    double y = 0.0;
    bool valid = true;
};

struct FixationParams {
    double dispersion_threshold_px = 80.0;
    double min_duration_ms = 100.0;
    double max_gap_ms = 75.0;

    void validate() const;  // all strictly positive
};

struct Fixation {
    std::string screen_id;
    double start_ms = 0.0;
    double duration_ms = 0.0;  // last member timestamp − first member timestamp
    double centroid_x = 0.0;
    double centroid_y = 0.0;
};

struct GazeLog {
    std::vector<GazeSample> samples;
    std::vector<RowError> errors;
};

// CSV with header `screen_id,timestamp_ms,x_px,y_px,valid`. Malformed rows
// (including valid samples outside the 1920x1200 canvas or timestamps that go
// backwards within a screen) are collected; FormatError past the 10% budget.
GazeLog parse_gaze_log(std::istream& in);

// Samples must be sorted by timestamp and share one screen_id
// (std::invalid_argument otherwise). Output is sorted by start and
// non-overlapping.
std::vector<Fixation> detect_fixations(const std::vector<GazeSample>& samples,
                                       const FixationParams& params);

}  // namespace gazefeed
