#include "gazefeed/pipeline.hpp"

#include "gazefeed/sha256.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace gazefeed {

namespace fs = std::filesystem;
using nlohmann::json;

std::filesystem::path PipelineConfig::gaze_dir_or_default() const {
    return gaze_dir.empty() ? out_dir / "synth" / "gaze" : gaze_dir;
}
std::filesystem::path PipelineConfig::layouts_or_default() const {
    return layouts_path.empty() ? out_dir / "synth" / "layouts.json" : layouts_path;
}
std::filesystem::path PipelineConfig::events_or_default() const {
    return events_path.empty() ? out_dir / "synth" / "events.csv" : events_path;
}
std::filesystem::path PipelineConfig::ratings_or_default() const {
    return ratings_path.empty() ? out_dir / "synth" / "ratings.csv" : ratings_path;
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

void maybe_path(const json& j, const char* key, fs::path& field) {
    if (j.contains(key)) field = fs::path(j.at(key).get<std::string>());
}

TrainConfig train_from_json(const json& j, const TrainConfig& base) {
    TrainConfig t = base;
    maybe(j, "k", t.k);
    maybe(j, "learning_rate", t.learning_rate);
    maybe(j, "reg_lambda", t.reg_lambda);
    maybe(j, "epochs", t.epochs);
    maybe(j, "neg_ratio", t.neg_ratio);
    return t;
}

json train_to_json(const TrainConfig& t) {
    return {{"k", t.k},
            {"learning_rate", t.learning_rate},
            {"reg_lambda", t.reg_lambda},
            {"epochs", t.epochs},
            {"neg_ratio", t.neg_ratio}};
}

}  // namespace

void PipelineConfig::apply_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& ex) {
        throw FormatError(std::string("config: ") + ex.what());
    }
    maybe_path(doc, "out_dir", out_dir);
    if (doc.contains("paths")) {
        const json& p = doc.at("paths");
        maybe_path(p, "gaze_dir", gaze_dir);
        maybe_path(p, "layouts", layouts_path);
        maybe_path(p, "events", events_path);
        maybe_path(p, "ratings", ratings_path);
    }
    if (doc.contains("fixation")) {
        const json& f = doc.at("fixation");
        maybe(f, "dispersion_threshold_px", fixation.dispersion_threshold_px);
        maybe(f, "min_duration_ms", fixation.min_duration_ms);
        maybe(f, "max_gap_ms", fixation.max_gap_ms);
    }
    if (doc.contains("methods")) {
        methods.clear();
        for (const auto& label : doc.at("methods")) {
            methods.push_back(FeedbackMethod::from_label(label.get<std::string>()));
        }
    }
    if (doc.contains("train")) train = train_from_json(doc.at("train"), train);
    if (doc.contains("grid")) {
        grid.clear();
        for (const auto& cell : doc.at("grid")) grid.push_back(train_from_json(cell, TrainConfig{}));
    }
    if (doc.contains("split")) {
        const json& s = doc.at("split");
        maybe(s, "train", split.train);
        maybe(s, "validation", split.validation);
        maybe(s, "test", split.test);
    }
    if (doc.contains("synth")) {
        const json& s = doc.at("synth");
        maybe(s, "n_users", synth.n_users);
        maybe(s, "n_movies", synth.n_movies);
        maybe(s, "n_genres", synth.n_genres);
        maybe(s, "screens_per_modality", synth.screens_per_modality);
        maybe(s, "base_ms", synth.base_ms);
        maybe(s, "affinity_gain_ms", synth.affinity_gain_ms);
        maybe(s, "noise_sigma_ms", synth.noise_sigma_ms);
        maybe(s, "min_dwell_ms", synth.min_dwell_ms);
        maybe(s, "jitter_px", synth.jitter_px);
        maybe(s, "detail_click_prob", synth.detail_click_prob);
        maybe(s, "seen_prob", synth.seen_prob);
        maybe(s, "sample_rate_hz", synth.sample_rate_hz);
        maybe(s, "n_background_users", synth.n_background_users);
        maybe(s, "background_ratings_per_user", synth.background_ratings_per_user);
        maybe(s, "catalog_slack", synth.catalog_slack);
    }
    maybe(doc, "seed", seed);
    maybe(doc, "jobs", jobs);
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("config file not found: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    PipelineConfig cfg;
    cfg.apply_json(buf.str());
    return cfg;
}

std::string PipelineConfig::to_json() const {
    json methods_json = json::array();
    for (const auto& m : methods) methods_json.push_back(m.label());
    json grid_json = json::array();
    for (const auto& cell : grid) grid_json.push_back(train_to_json(cell));
    json doc = {
        {"out_dir", out_dir.generic_string()},
        {"paths",
         {{"gaze_dir", gaze_dir_or_default().generic_string()},
          {"layouts", layouts_or_default().generic_string()},
          {"events", events_or_default().generic_string()},
          {"ratings", ratings_or_default().generic_string()}}},
        {"fixation",
         {{"dispersion_threshold_px", fixation.dispersion_threshold_px},
          {"min_duration_ms", fixation.min_duration_ms},
          {"max_gap_ms", fixation.max_gap_ms}}},
        {"methods", methods_json},
        {"train", train_to_json(train)},
        {"grid", grid_json},
        {"split", {{"train", split.train}, {"validation", split.validation}, {"test", split.test}}},
        {"synth",
         {{"n_users", synth.n_users},
          {"n_movies", synth.n_movies},
          {"n_genres", synth.n_genres},
          {"screens_per_modality", synth.screens_per_modality},
          {"base_ms", synth.base_ms},
          {"affinity_gain_ms", synth.affinity_gain_ms},
          {"noise_sigma_ms", synth.noise_sigma_ms},
          {"min_dwell_ms", synth.min_dwell_ms},
          {"jitter_px", synth.jitter_px},
          {"detail_click_prob", synth.detail_click_prob},
          {"seen_prob", synth.seen_prob},
          {"sample_rate_hz", synth.sample_rate_hz},
          {"n_background_users", synth.n_background_users},
          {"background_ratings_per_user", synth.background_ratings_per_user},
          {"catalog_slack", synth.catalog_slack}}},
        {"seed", seed},
        {"jobs", jobs},
    };
    return doc.dump(2);
}

std::vector<TrainConfig> default_grid(std::uint64_t seed) {
    std::vector<TrainConfig> grid;
    for (int k : {8, 16, 32}) {
        for (double lr : {0.005, 0.02}) {
            for (double reg : {0.01, 0.1}) {
                TrainConfig t;
                t.k = k;
                t.learning_rate = lr;
                t.reg_lambda = reg;
                t.epochs = 30;
                t.seed = seed;
                grid.push_back(t);
            }
        }
    }
    return grid;
}

namespace {

std::ofstream open_out(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::ifstream open_artifact(const fs::path& path, const std::string& produced_by) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingArtifactError("missing " + path.string() + "; run `gazefeed " + produced_by +
                                   "` first");
    }
    return in;
}

void write_manifest(const PipelineConfig& cfg, const std::string& command,
                    const std::vector<fs::path>& inputs) {
    json input_hashes = json::object();
    for (const auto& path : inputs) input_hashes[path.generic_string()] = sha256_file(path);
    json doc = {{"command", command},
                {"seed", cfg.seed},
                {"jobs", cfg.jobs},
                {"config", json::parse(cfg.to_json())},
                {"inputs", input_hashes}};
    auto out = open_out(cfg.out_dir / (command + "_manifest.json"));
    out << doc.dump(2) << "\n";
}

std::vector<fs::path> sorted_csv_files(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

struct UserFixations {
    std::string user_id;
    std::string screen_id;
    std::vector<Fixation> fixations;
};

// fixations.csv grouped back into per-(user, screen) runs, file order.
std::vector<UserFixations> load_fixations_csv(std::istream& in) {
    require_header(in, "user_id,screen_id,start_ms,duration_ms,centroid_x,centroid_y",
                   "fixations");
    std::vector<UserFixations> groups;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_fields(line);
        if (fields.size() != 6) throw FormatError("fixations: expected 6 fields");
        Fixation f;
        f.screen_id = fields[1];
        f.start_ms = parse_double(fields[2], "start_ms");
        f.duration_ms = parse_double(fields[3], "duration_ms");
        f.centroid_x = parse_double(fields[4], "centroid_x");
        f.centroid_y = parse_double(fields[5], "centroid_y");
        if (groups.empty() || groups.back().user_id != fields[0] ||
            groups.back().screen_id != fields[1]) {
            groups.push_back({fields[0], fields[1], {}});
        }
        groups.back().fixations.push_back(std::move(f));
    }
    return groups;
}

DwellMap load_dwells_csv(std::istream& in) {
    require_header(in, "user_id,screen_id,modality,movie_id,duration_ms", "dwells");
    DwellMap dwells;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_fields(line);
        if (fields.size() != 5) throw FormatError("dwells: expected 5 fields");
        DwellKey key{fields[0], fields[1]};
        auto [it, inserted] = dwells.try_emplace(key);
        if (inserted) {
            it->second.user_id = fields[0];
            it->second.screen_id = fields[1];
            it->second.modality = parse_modality(fields[2]);
        }
        it->second.duration_ms[parse_int(fields[3], "movie_id")] =
            parse_double(fields[4], "duration_ms");
    }
    for (const auto& [key, dwell] : dwells) {
        if (dwell.duration_ms.size() != 8) {
            throw FormatError("dwells: screen " + key.second + " of user " + key.first +
                              " has " + std::to_string(dwell.duration_ms.size()) +
                              " movies, expected 8");
        }
    }
    return dwells;
}

StatsMap load_stats_csv(std::istream& in) {
    require_header(in, "user_id,modality,mu_ms,sigma_ms,n_screens", "user stats");
    StatsMap stats;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_fields(line);
        if (fields.size() != 5) throw FormatError("user stats: expected 5 fields");
        UserDurationStats s;
        s.user_id = fields[0];
        s.modality = parse_modality(fields[1]);
        s.mu_ms = parse_double(fields[2], "mu_ms");
        s.sigma_ms = parse_double(fields[3], "sigma_ms");
        s.n_screens = static_cast<int>(parse_int(fields[4], "n_screens"));
        stats[{s.user_id, s.modality}] = s;
    }
    return stats;
}

std::vector<StudyEvents> load_events_artifact(const PipelineConfig& cfg) {
    auto in = open_artifact(cfg.events_or_default(), "synth");
    EventsLog log = load_events(in);
    for (const auto& err : log.errors) {
        std::cerr << "events: line " << err.line << ": " << err.message << "\n";
    }
    return std::move(log.events);
}

std::vector<Rating> load_ratings_artifact(const PipelineConfig& cfg) {
    auto in = open_artifact(cfg.ratings_or_default(), "synth");
    RatingsLog log = load_ratings(in);
    for (const auto& err : log.errors) {
        std::cerr << "ratings: line " << err.line << ": " << err.message << "\n";
    }
    return std::move(log.ratings);
}

std::set<MovieId> study_movie_set(const std::vector<StudyEvents>& events) {
    std::set<MovieId> movies;
    for (const auto& e : events) movies.insert(e.presented.begin(), e.presented.end());
    return movies;
}

InteractionSet background_artifact(const PipelineConfig& cfg,
                                   const std::vector<StudyEvents>& events) {
    return prepare_background(load_ratings_artifact(cfg), study_movie_set(events));
}

}  // namespace

void cmd_synth(const PipelineConfig& cfg) {
    SynthConfig synth_cfg = cfg.synth;
    synth_cfg.seed = cfg.seed;  // the master seed governs every command
    SynthStudy study = generate_study(synth_cfg);
    write_study(cfg.out_dir / "synth", study);
    write_manifest(cfg, "synth", {});
    std::cout << "synth: " << study.events.size() << " screens, "
              << study.gaze_by_user.size() << " users, " << study.background.size()
              << " background ratings -> " << (cfg.out_dir / "synth").generic_string() << "\n";
}

void cmd_fixations(const PipelineConfig& cfg) {
    fs::path gaze_dir = cfg.gaze_dir_or_default();
    if (!fs::is_directory(gaze_dir)) {
        throw MissingArtifactError("missing gaze directory " + gaze_dir.generic_string() +
                                   "; run `gazefeed synth` first");
    }
    auto files = sorted_csv_files(gaze_dir);
    if (files.empty()) {
        throw MissingArtifactError("no gaze logs (*.csv) in " + gaze_dir.generic_string());
    }

    // stream into a temp file; a parse failure must not leave a truncated artifact
    fs::path final_path = cfg.out_dir / "fixations.csv";
    fs::path tmp_path = cfg.out_dir / "fixations.csv.tmp";
    auto out = open_out(tmp_path);
    out << "user_id,screen_id,start_ms,duration_ms,centroid_x,centroid_y\n";
    std::size_t total = 0;
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read " + file.string());
        GazeLog log = parse_gaze_log(in);
        for (const auto& err : log.errors) {
            std::cerr << file.filename().string() << ": line " << err.line << ": " << err.message
                      << "\n";
        }
        std::string user_id = file.stem().string();

        // split into per-screen runs, preserving file order
        std::size_t begin = 0;
        for (std::size_t i = 1; i <= log.samples.size(); ++i) {
            if (i == log.samples.size() || log.samples[i].screen_id != log.samples[begin].screen_id) {
                std::vector<GazeSample> screen(log.samples.begin() + begin,
                                               log.samples.begin() + i);
                for (const auto& f : detect_fixations(screen, cfg.fixation)) {
                    out << user_id << ',' << f.screen_id << ',' << fmt("%.3f", f.start_ms) << ','
                        << fmt("%.3f", f.duration_ms) << ',' << fmt("%.3f", f.centroid_x) << ','
                        << fmt("%.3f", f.centroid_y) << '\n';
                    ++total;
                }
                begin = i;
            }
        }
    }
    out.close();
    fs::rename(tmp_path, final_path);
    write_manifest(cfg, "fixations", files);
    std::cout << "fixations: " << total << " fixations -> " << final_path.generic_string()
              << "\n";
}

void cmd_aoi_stats(const PipelineConfig& cfg) {
    auto layouts_in = open_artifact(cfg.layouts_or_default(), "synth");
    auto layouts = load_layouts(layouts_in);
    std::map<std::string, const ScreenLayout*> layout_of;
    for (const auto& l : layouts) layout_of[l.screen_id] = &l;

    auto events = load_events_artifact(cfg);

    fs::path fixations_path = cfg.out_dir / "fixations.csv";
    auto fixations_in = open_artifact(fixations_path, "fixations");
    auto fixation_groups = load_fixations_csv(fixations_in);
    std::map<DwellKey, const UserFixations*> fixations_of;
    for (const auto& g : fixation_groups) fixations_of[{g.user_id, g.screen_id}] = &g;

    static const std::vector<Fixation> kNoFixations;
    std::map<std::string, std::vector<AoiDwell>> dwells_by_user;
    auto dwell_out = open_out(cfg.out_dir / "dwells.csv");
    dwell_out << "user_id,screen_id,modality,movie_id,duration_ms\n";
    for (const auto& e : events) {
        auto layout_it = layout_of.find(e.screen_id);
        if (layout_it == layout_of.end()) {
            throw std::runtime_error("no layout for screen " + e.screen_id);
        }
        auto fix_it = fixations_of.find({e.user_id, e.screen_id});
        const auto& fixations = fix_it == fixations_of.end() ? kNoFixations
                                                             : fix_it->second->fixations;
        AoiDwell dwell = aggregate_dwell(e.user_id, fixations, *layout_it->second);
        for (const auto& [movie, ms] : dwell.duration_ms) {
            dwell_out << e.user_id << ',' << e.screen_id << ',' << to_string(e.modality) << ','
                      << movie << ',' << fmt("%.3f", ms) << '\n';
        }
        dwells_by_user[e.user_id].push_back(std::move(dwell));
    }
    dwell_out.close();

    auto stats_out = open_out(cfg.out_dir / "user_stats.csv");
    stats_out << "user_id,modality,mu_ms,sigma_ms,n_screens\n";
    for (const auto& [user_id, dwells] : dwells_by_user) {
        for (Modality modality : {Modality::image, Modality::text}) {
            bool any = std::any_of(dwells.begin(), dwells.end(),
                                   [&](const AoiDwell& d) { return d.modality == modality; });
            if (!any) continue;
            UserDurationStats s = compute_user_stats(dwells, modality);
            stats_out << s.user_id << ',' << to_string(modality) << ',' << fmt("%.6f", s.mu_ms)
                      << ',' << fmt("%.6f", s.sigma_ms) << ',' << s.n_screens << '\n';
        }
    }
    stats_out.close();

    write_manifest(cfg, "aoi-stats",
                   {cfg.layouts_or_default(), cfg.events_or_default(), fixations_path});
    std::cout << "aoi-stats: " << events.size() << " screens -> "
              << (cfg.out_dir / "dwells.csv").generic_string() << ", "
              << (cfg.out_dir / "user_stats.csv").generic_string() << "\n";
}

namespace {

struct StudyArtifacts {
    std::vector<StudyEvents> events;
    DwellMap dwells;
    StatsMap stats;
};

StudyArtifacts load_study_artifacts(const PipelineConfig& cfg) {
    StudyArtifacts a;
    a.events = load_events_artifact(cfg);
    auto dwells_in = open_artifact(cfg.out_dir / "dwells.csv", "aoi-stats");
    a.dwells = load_dwells_csv(dwells_in);
    auto stats_in = open_artifact(cfg.out_dir / "user_stats.csv", "aoi-stats");
    a.stats = load_stats_csv(stats_in);
    return a;
}

}  // namespace

void cmd_assemble(const PipelineConfig& cfg) {
    StudyArtifacts study = load_study_artifacts(cfg);
    InteractionSet background = background_artifact(cfg, study.events);

    for (const auto& method : cfg.methods) {
        InteractionSet set = assemble_training(method, study.events, study.dwells, study.stats,
                                               background, cfg.held_out);
        auto out = open_out(cfg.out_dir / "interactions" / (method.label() + ".csv"));
        out << "user_key,movie_id\n";
        for (const auto& [user, movie] : set.pairs) out << user << ',' << movie << '\n';
        std::cout << "assemble: " << method.label() << ": " << set.pairs.size() << " pairs ("
                  << set.n_users() << " users x " << set.n_items() << " items)\n";
    }
    write_manifest(cfg, "assemble",
                   {cfg.events_or_default(), cfg.out_dir / "dwells.csv",
                    cfg.out_dir / "user_stats.csv", cfg.ratings_or_default()});
}

void cmd_grid_search(const PipelineConfig& cfg) {
    auto events = load_events_artifact(cfg);
    InteractionSet background = background_artifact(cfg, events);

    std::vector<TrainConfig> grid = cfg.grid.empty() ? default_grid(cfg.seed) : cfg.grid;
    for (auto& cell : grid) cell.seed = cfg.seed;
    SplitSpec split = cfg.split;
    split.seed = cfg.seed;

    GridSearchResult result = grid_search(grid, background, split);

    json cells = json::array();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        json cell = train_to_json(grid[g]);
        cell["validation_ndcg100"] = result.validation_ndcg[g];
        cells.push_back(cell);
    }
    json doc = {{"best", train_to_json(result.best)},
                {"best_index", result.best_index},
                {"best_validation_ndcg100", result.best_validation_ndcg},
                {"best_test_ndcg100", result.best_test_ndcg},
                {"users_scored", result.users_scored},
                {"grid", cells}};
    auto out = open_out(cfg.out_dir / "grid_search.json");
    out << doc.dump(2) << "\n";

    write_manifest(cfg, "grid-search", {cfg.ratings_or_default(), cfg.events_or_default()});
    std::cout << "grid-search: best k=" << result.best.k << " lr=" << result.best.learning_rate
              << " reg=" << result.best.reg_lambda << " (validation NDCG@100 "
              << fmt("%.4f", result.best_validation_ndcg) << ", test "
              << fmt("%.4f", result.best_test_ndcg) << ")\n";
}

void cmd_experiment(const PipelineConfig& cfg) {
    StudyArtifacts study = load_study_artifacts(cfg);

    ExperimentInput input;
    input.methods = cfg.methods;
    input.events = std::move(study.events);
    input.dwells = std::move(study.dwells);
    input.stats = std::move(study.stats);
    input.background = background_artifact(cfg, input.events);
    input.train = cfg.train;
    if (cfg.train_config_from_grid) {
        auto in = open_artifact(cfg.out_dir / "grid_search.json", "grid-search");
        json doc = json::parse(in);
        input.train = train_from_json(doc.at("best"), cfg.train);
    }
    input.master_seed = cfg.seed;
    input.jobs = cfg.jobs;

    auto outcomes = run_experiment(input);

    {
        auto out = open_out(cfg.out_dir / "ranks.csv");
        write_ranks_csv(out, outcomes);
    }
    {
        auto out = open_out(cfg.out_dir / "metrics.csv");
        write_metrics_csv(out, outcomes);
    }
    {
        auto out = open_out(cfg.out_dir / "metrics.md");
        out << metrics_markdown(outcomes);
    }
    write_manifest(cfg, "experiment",
                   {cfg.events_or_default(), cfg.out_dir / "dwells.csv",
                    cfg.out_dir / "user_stats.csv", cfg.ratings_or_default()});
    for (const auto& o : outcomes) {
        std::cout << "experiment: " << o.method.label() << ": " << o.models << " models, "
                  << o.metrics.n_screens << " screens, mean rank "
                  << fmt("%.3f", o.metrics.rank_mean) << ", leakage violations "
                  << o.leakage_violations << "\n";
    }
}

void cmd_inclusion(const PipelineConfig& cfg) {
    StudyArtifacts study = load_study_artifacts(cfg);
    InclusionReport report = inclusion_analysis(study.events, study.dwells, study.stats);
    {
        auto out = open_out(cfg.out_dir / "inclusion.csv");
        write_inclusion_csv(out, report);
    }
    {
        auto out = open_out(cfg.out_dir / "inclusion.md");
        out << inclusion_markdown(report);
    }
    write_manifest(cfg, "inclusion",
                   {cfg.events_or_default(), cfg.out_dir / "dwells.csv",
                    cfg.out_dir / "user_stats.csv"});
    std::cout << "inclusion: " << report.rows.size() << " filter rows -> "
              << (cfg.out_dir / "inclusion.csv").generic_string() << "\n";
}

namespace {

InclusionCell cell_from_csv(const std::string& pct, const std::string& n) {
    if (pct.empty()) return {};
    return {parse_double(pct, "pct"), static_cast<int>(parse_int(n, "screens"))};
}

}  // namespace

void cmd_report(const PipelineConfig& cfg) {
    fs::path ranks_path = cfg.out_dir / "ranks.csv";
    fs::path metrics_path = cfg.out_dir / "metrics.csv";
    fs::path inclusion_path = cfg.out_dir / "inclusion.csv";

    // ranking table, recomputed from the raw per-screen ranks
    auto ranks_in = open_artifact(ranks_path, "experiment");
    std::vector<MethodOutcome> outcomes;
    {
        require_header(ranks_in, "method,user_id,screen_id,modality,rank", "ranks");
        std::map<std::string, std::size_t> slot;  // method label → outcomes position
        std::string line;
        while (std::getline(ranks_in, line)) {
            if (line.empty() || line == "\r") continue;
            auto fields = split_fields(line);
            if (fields.size() != 5) throw FormatError("ranks.csv: expected 5 fields");
            auto [it, fresh] = slot.try_emplace(fields[0], outcomes.size());
            if (fresh) {
                MethodOutcome o;
                o.method = FeedbackMethod::from_label(fields[0]);
                outcomes.push_back(std::move(o));
            }
            RankingResult r;
            r.user_id = fields[1];
            r.screen_id = fields[2];
            r.modality = parse_modality(fields[3]);
            r.rank = static_cast<int>(parse_int(fields[4], "rank"));
            outcomes[it->second].ranks.push_back(std::move(r));
        }
        for (auto& o : outcomes) o.metrics = compute_report(o.ranks);
    }

    // model/divergence/leakage counters come from the metrics table
    auto metrics_in = open_artifact(metrics_path, "experiment");
    {
        std::string line;
        if (!std::getline(metrics_in, line)) throw FormatError("metrics.csv: empty");
        std::map<std::string, std::array<int, 3>> counters;
        while (std::getline(metrics_in, line)) {
            if (line.empty() || line == "\r") continue;
            auto fields = split_fields(line);
            if (fields.size() != 16) throw FormatError("metrics.csv: expected 16 fields");
            counters[fields[0]] = {static_cast<int>(parse_int(fields[2], "models")),
                                   static_cast<int>(parse_int(fields[3], "diverged")),
                                   static_cast<int>(parse_int(fields[5], "leakage"))};
        }
        for (auto& o : outcomes) {
            auto it = counters.find(o.method.label());
            if (it == counters.end()) {
                throw FormatError("metrics.csv: no row for method " + o.method.label());
            }
            o.models = it->second[0];
            o.diverged_models = it->second[1];
            o.leakage_violations = it->second[2];
        }
    }

    // inclusion table
    auto inclusion_in = open_artifact(inclusion_path, "inclusion");
    InclusionReport inclusion;
    {
        std::string line;
        if (!std::getline(inclusion_in, line)) throw FormatError("inclusion.csv: empty");
        while (std::getline(inclusion_in, line)) {
            if (line.empty() || line == "\r") continue;
            auto fields = split_fields(line);
            if (fields.size() != 9) throw FormatError("inclusion.csv: expected 9 fields");
            InclusionRow row;
            row.filter_label = fields[0];
            row.selected = cell_from_csv(fields[1], fields[2]);
            row.detailed = cell_from_csv(fields[3], fields[4]);
            row.seen = cell_from_csv(fields[5], fields[6]);
            row.all_presented = cell_from_csv(fields[7], fields[8]);
            inclusion.rows.push_back(std::move(row));
        }
    }

    auto out = open_out(cfg.out_dir / "report.md");
    out << "# Gaze-informed recommendation report\n\n";
    out << "## Ranking of the selected movie on held-out screens\n\n";
    out << metrics_markdown(outcomes) << "\n";
    int total_models = 0, total_leakage = 0, total_diverged = 0;
    for (const auto& o : outcomes) {
        total_models += o.models;
        total_leakage += o.leakage_violations;
        total_diverged += o.diverged_models;
    }
    out << "Models per method: " << (outcomes.empty() ? 0 : outcomes.front().models)
        << "; total models: " << total_models << "; diverged: " << total_diverged
        << "; leakage violations: " << total_leakage << ".\n\n";
    out << "## AOI inclusion analysis\n\n";
    out << inclusion_markdown(inclusion);
    out.close();

    write_manifest(cfg, "report", {ranks_path, metrics_path, inclusion_path});
    std::cout << "report -> " << (cfg.out_dir / "report.md").generic_string() << "\n";
}

int run_command(const std::string& command, const PipelineConfig& cfg) {
    try {
        if (command == "synth") {
            cmd_synth(cfg);
        } else if (command == "fixations") {
            cmd_fixations(cfg);
        } else if (command == "aoi-stats") {
            cmd_aoi_stats(cfg);
        } else if (command == "assemble") {
            cmd_assemble(cfg);
        } else if (command == "grid-search") {
            cmd_grid_search(cfg);
        } else if (command == "experiment") {
            cmd_experiment(cfg);
        } else if (command == "inclusion") {
            cmd_inclusion(cfg);
        } else if (command == "report") {
            cmd_report(cfg);
        } else {
            std::cerr << "gazefeed: unknown command `" << command << "`\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "gazefeed " << command << ": " << ex.what() << "\n";
        return 1;
    }
}

}  // namespace gazefeed
