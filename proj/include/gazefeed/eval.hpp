// eval.hpp — held-out screen ranking, Recall@k / mean-rank metrics, NDCG, and
// the 2-models-per-user-per-method experiment driver.
//
// Recall@k means are percentages; their stds are sample standard deviations of
// the per-screen 0/1 indicator (percent ÷ 100 scale). Rank mean/std are on the
// 1..8 scale. Ties in scores break by ascending movie id.

#pragma once

#include "gazefeed/mf.hpp"

#include <cstdint>
#include <iosfwd>

namespace gazefeed {

struct RankingResult {
    std::string user_id;
    std::string screen_id;
    Modality modality = Modality::image;
    int rank = 0;  // 1..8, position of the selected movie
};

struct MethodMetrics {
    std::array<double, 4> recall_mean{};  // Recall@1..4, percent
    std::array<double, 4> recall_std{};   // sample std of the 0/1 indicator
    double rank_mean = 0.0;
    double rank_std = 0.0;
    int n_screens = 0;
};

// Scores the 8 presented movies and returns the 1-based rank of the selected
// one. Movies missing from item_index score without their item terms; a
// user_index < 0 scores without user terms (cold user).
RankingResult rank_selected(const MfModel& model, int user_index,
                            const std::map<MovieId, int>& item_index, const StudyEvents& screen);

MethodMetrics compute_report(const std::vector<RankingResult>& results);

// Binary-gain NDCG: DCG = Σ 1/log₂(rank+1) over relevant hits at positions
// ≤ k, normalized by the ideal DCG over min(|relevant|, k) positions.
// `ranked` may be truncated at k items.
double ndcg_at_k(const std::vector<std::int64_t>& ranked, const std::set<std::int64_t>& relevant,
                 int k);

struct ExperimentInput {
    std::vector<FeedbackMethod> methods;
    std::vector<StudyEvents> events;
    DwellMap dwells;
    StatsMap stats;
    InteractionSet background;
    TrainConfig train;
    std::uint64_t master_seed = 1;
    int jobs = 1;
};

struct MethodOutcome {
    FeedbackMethod method;
    std::vector<RankingResult> ranks;  // every held-out screen, task order
    MethodMetrics metrics;
    int models = 0;            // one per (user, modality) task; 2 × users when all have both
    int diverged_models = 0;   // tasks dropped by DivergenceError
    int excluded_screens = 0;  // screens of dropped tasks
    int leakage_violations = 0;
};

// For each method × study user × modality: assemble the training set with
// that (user, modality) held out, train one model (the random method uses a
// seeded uniform scorer instead), rank every held-out screen, and audit that
// no pair derivable only from a held-out screen leaked into training.
// Per-task seeds derive from master_seed; results are identical for any jobs.
std::vector<MethodOutcome> run_experiment(const ExperimentInput& input);

void write_ranks_csv(std::ostream& out, const std::vector<MethodOutcome>& outcomes);
void write_metrics_csv(std::ostream& out, const std::vector<MethodOutcome>& outcomes);
std::string metrics_markdown(const std::vector<MethodOutcome>& outcomes);

}  // namespace gazefeed
