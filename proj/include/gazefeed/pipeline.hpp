// pipeline.hpp — one config file drives every command; each command writes its
// artifacts plus a manifest (effective config, seed, input content hashes) so
// identical inputs and seed reproduce outputs byte for byte.

#pragma once

#include "gazefeed/eval.hpp"
#include "gazefeed/synth.hpp"

#include <filesystem>

namespace gazefeed {

class MissingArtifactError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    std::filesystem::path out_dir = "out";

    // Input locations; empty fields default to the synth outputs under out_dir.
    std::filesystem::path gaze_dir;
    std::filesystem::path layouts_path;
    std::filesystem::path events_path;
    std::filesystem::path ratings_path;

    FixationParams fixation;
    std::vector<FeedbackMethod> methods = FeedbackMethod::all();
    TrainConfig train;
    std::vector<TrainConfig> grid;  // empty → default grid
    SplitSpec split;
    SynthConfig synth;
    std::uint64_t seed = 1;
    int jobs = 1;

    std::optional<HoldOut> held_out;       // `assemble` only
    bool train_config_from_grid = false;   // `experiment`: read grid_search.json

    std::filesystem::path gaze_dir_or_default() const;
    std::filesystem::path layouts_or_default() const;
    std::filesystem::path events_or_default() const;
    std::filesystem::path ratings_or_default() const;

    static PipelineConfig load(const std::filesystem::path& path);
    void apply_json(const std::string& json_text);  // overlays fields present in the document
    std::string to_json() const;                    // effective config echo
};

std::vector<TrainConfig> default_grid(std::uint64_t seed);

// synth | fixations | aoi-stats | assemble | grid-search | experiment |
// inclusion | report. Returns the process exit status (0 on success) and
// prints a diagnostic to stderr on failure.
int run_command(const std::string& command, const PipelineConfig& config);

// The individual commands; each throws on failure.
void cmd_synth(const PipelineConfig&);
void cmd_fixations(const PipelineConfig&);
void cmd_aoi_stats(const PipelineConfig&);
void cmd_assemble(const PipelineConfig&);
void cmd_grid_search(const PipelineConfig&);
void cmd_experiment(const PipelineConfig&);
void cmd_inclusion(const PipelineConfig&);
void cmd_report(const PipelineConfig&);

}  // namespace gazefeed
