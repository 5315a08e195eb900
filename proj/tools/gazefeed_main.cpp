// gazefeed — turn gaze logs into implicit feedback, train biased MF
// recommenders, and evaluate held-out screen rankings.

#include "gazefeed/pipeline.hpp"

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace {

struct Flags {
    std::string config_path;
    std::string out_dir;
    std::string methods;
    std::string held_out_user;
    std::string held_out_modality;
    std::uint64_t seed = 0;
    int jobs = 0;
    bool from_grid = false;
    bool seed_set = false;
    bool out_set = false;
    bool methods_set = false;
    bool jobs_set = false;
};

// Config file first, then flags on top.
gazefeed::PipelineConfig effective_config(const Flags& flags) {
    gazefeed::PipelineConfig cfg;
    if (!flags.config_path.empty()) {
        cfg = gazefeed::PipelineConfig::load(flags.config_path);
    }
    if (flags.seed_set) cfg.seed = flags.seed;
    if (flags.out_set) cfg.out_dir = flags.out_dir;
    if (flags.jobs_set) cfg.jobs = flags.jobs;
    if (flags.methods_set) {
        cfg.methods.clear();
        for (const auto& label : gazefeed::split_fields(flags.methods, ',')) {
            cfg.methods.push_back(gazefeed::FeedbackMethod::from_label(label));
        }
    }
    if (!flags.held_out_user.empty()) {
        gazefeed::HoldOut hold;
        hold.user_id = flags.held_out_user;
        hold.modality = gazefeed::parse_modality(
            flags.held_out_modality.empty() ? "image" : flags.held_out_modality);
        cfg.held_out = hold;
    }
    cfg.train_config_from_grid = flags.from_grid;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gazefeed: eye-tracking implicit feedback for movie recommendation"};
    app.require_subcommand(1);

    Flags flags;
    std::string command;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config_path, "pipeline config file (JSON)");
        sub->add_option("--seed", flags.seed, "master seed (overrides config)")
            ->each([&](const std::string&) { flags.seed_set = true; });
        sub->add_option("--out", flags.out_dir, "output directory (overrides config)")
            ->each([&](const std::string&) { flags.out_set = true; });
        sub->add_option("--methods", flags.methods, "comma-separated feedback methods")
            ->each([&](const std::string&) { flags.methods_set = true; });
        sub->add_option("--jobs", flags.jobs, "parallel tasks (overrides config)")
            ->envname("GF_JOBS")
            ->each([&](const std::string&) { flags.jobs_set = true; });
        sub->callback([&, sub] { command = sub->get_name(); });
        return sub;
    };

    add_common(app.add_subcommand("synth", "generate a synthetic study"));
    add_common(app.add_subcommand("fixations", "detect fixations in the gaze logs"));
    add_common(app.add_subcommand("aoi-stats", "aggregate AOI dwell and per-user stats"));
    auto* assemble = add_common(
        app.add_subcommand("assemble", "dump per-method training interaction sets"));
    assemble->add_option("--held-out-user", flags.held_out_user,
                         "exclude this user's screens of --held-out-modality");
    assemble->add_option("--held-out-modality", flags.held_out_modality, "image|text");
    add_common(app.add_subcommand("grid-search", "hyperparameter search on the background set"));
    auto* experiment = add_common(
        app.add_subcommand("experiment", "train per-(user,modality) models and rank screens"));
    experiment->add_flag("--from-grid", flags.from_grid,
                         "use the best config from grid_search.json");
    add_common(app.add_subcommand("inclusion", "AOI inclusion-percentage analysis"));
    add_common(app.add_subcommand("report", "render the combined markdown report"));

    CLI11_PARSE(app, argc, argv);

    try {
        return gazefeed::run_command(command, effective_config(flags));
    } catch (const std::exception& ex) {
        std::cerr << "gazefeed " << command << ": " << ex.what() << "\n";
        return 1;
    }
}
