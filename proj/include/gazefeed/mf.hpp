// mf.hpp — biased matrix factorization on binarized implicit feedback.
//
// Score: global_bias + user_bias[u] + item_bias[i] + dot(user_factors[u],
// item_factors[i]). Training is pointwise SGD on squared error with uniform
// negative sampling: each positive (target 1) is followed by neg_ratio drawn
// non-positive items for the same user (target 0). Per-example loss:
//   (target − score)² + reg_lambda · (‖p_u‖² + ‖q_i‖² + b_u² + b_i²)
// The global bias is updated unregularized. Everything is deterministic for a
// fixed seed.

#pragma once

#include "gazefeed/feedback.hpp"

#include <cstdint>
#include <filesystem>

namespace gazefeed {

struct MfModel {
    int n_users = 0;
    int n_items = 0;
    int k = 0;
    double global_bias = 0.0;
    std::vector<double> user_bias;     // n_users
    std::vector<double> item_bias;     // n_items
    std::vector<double> user_factors;  // n_users × k, row-major
    std::vector<double> item_factors;  // n_items × k, row-major

    double* user_row(int u) { return user_factors.data() + static_cast<std::size_t>(u) * k; }
    double* item_row(int i) { return item_factors.data() + static_cast<std::size_t>(i) * k; }
    const double* user_row(int u) const {
        return user_factors.data() + static_cast<std::size_t>(u) * k;
    }
    const double* item_row(int i) const {
        return item_factors.data() + static_cast<std::size_t>(i) * k;
    }
};

// Biases zero; factors i.i.d. N(0, 0.1²/k).
MfModel init_model(int n_users, int n_items, int k, std::uint64_t seed);

double predict(const MfModel& model, int u, int i);  // throws std::out_of_range on bad indices

struct TrainConfig {
    int k = 16;
    double learning_rate = 0.05;
    double reg_lambda = 0.01;
    int epochs = 12;
    int neg_ratio = 4;  // sampled negatives per positive
    std::uint64_t seed = 1;

    void validate() const;
};

struct SplitSpec {
    double train = 0.8;
    double validation = 0.1;
    double test = 0.1;
    std::uint64_t seed = 1;

    void validate() const;  // fractions sum to 1
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(int epoch_, const std::string& msg) : std::runtime_error(msg), epoch(epoch_) {}
    int epoch;
};

// Per-example loss and its exact gradient, shared by the SGD step and the
// finite-difference checks.
double example_loss(const MfModel& model, int u, int i, double target, double reg_lambda);

struct ExampleGrad {
    double d_global = 0.0;
    double d_user_bias = 0.0;
    double d_item_bias = 0.0;
    std::vector<double> d_user_factors;  // k
    std::vector<double> d_item_factors;  // k
};
ExampleGrad example_gradient(const MfModel& model, int u, int i, double target, double reg_lambda);

// One gradient-descent step on the example loss (factors updated from values
// cached before the step).
void sgd_step(MfModel& model, int u, int i, double target, double learning_rate,
              double reg_lambda);

// Positives given as (user index, item index); model dims must cover them.
// Throws DivergenceError naming the epoch when a parameter goes non-finite.
MfModel train_on_pairs(MfModel model, const std::vector<std::pair<int, int>>& positives,
                       const TrainConfig& config);

MfModel train(MfModel model, const InteractionSet& interactions, const TrainConfig& config);

struct SplitResult {
    std::vector<std::pair<int, int>> train_pairs;   // sorted (user, item) index pairs
    std::vector<std::vector<int>> train_items;      // per user index
    std::vector<std::vector<int>> validation_items;
    std::vector<std::vector<int>> test_items;
};

// User-wise interaction holdout: per user, floor(n·test) items to test,
// floor(n·validation) to validation, the rest to train.
SplitResult split_interactions(const InteractionSet& interactions, const SplitSpec& spec);

struct GridSearchResult {
    TrainConfig best;
    int best_index = 0;
    std::vector<double> validation_ndcg;  // per grid entry, grid order
    double best_validation_ndcg = 0.0;
    double best_test_ndcg = 0.0;  // reported, never used for selection
    int users_scored = 0;
};

// Scores each config by mean per-user NDCG@100 on the validation fold,
// ranking all items outside the user's train fold. Ties keep the earlier
// grid entry. Users without validation positives are skipped; if every user
// is skipped the search fails.
GridSearchResult grid_search(const std::vector<TrainConfig>& grid,
                             const InteractionSet& interactions, const SplitSpec& split);

// Checkpoints are bit-exact round trips (raw little-endian doubles).
void save_model(const std::filesystem::path& path, const MfModel& model, std::uint64_t seed);

struct LoadedModel {
    MfModel model;
    std::uint64_t seed = 0;
};
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace gazefeed
