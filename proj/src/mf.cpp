#include "gazefeed/mf.hpp"

#include "gazefeed/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_set>

namespace gazefeed {

void TrainConfig::validate() const {
    if (k < 1) throw std::invalid_argument("TrainConfig: k must be >= 1");
    if (learning_rate < 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be >= 0");
    if (reg_lambda < 0.0) throw std::invalid_argument("TrainConfig: reg_lambda must be >= 0");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (neg_ratio < 0) throw std::invalid_argument("TrainConfig: neg_ratio must be >= 0");
}

void SplitSpec::validate() const {
    if (train < 0 || validation < 0 || test < 0 ||
        std::abs(train + validation + test - 1.0) > 1e-9) {
        throw std::invalid_argument("SplitSpec: fractions must be non-negative and sum to 1");
    }
}

MfModel init_model(int n_users, int n_items, int k, std::uint64_t seed) {
    if (n_users < 1 || n_items < 1 || k < 1) {
        throw std::invalid_argument("init_model: dimensions must be >= 1");
    }
    MfModel m;
    m.n_users = n_users;
    m.n_items = n_items;
    m.k = k;
    m.user_bias.assign(n_users, 0.0);
    m.item_bias.assign(n_items, 0.0);
    m.user_factors.resize(static_cast<std::size_t>(n_users) * k);
    m.item_factors.resize(static_cast<std::size_t>(n_items) * k);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 0.1 / std::sqrt(static_cast<double>(k)));
    for (double& w : m.user_factors) w = dist(rng);
    for (double& w : m.item_factors) w = dist(rng);
    return m;
}

namespace {

void check_indices(const MfModel& model, int u, int i) {
    if (u < 0 || u >= model.n_users || i < 0 || i >= model.n_items) {
        throw std::out_of_range("mf: index (" + std::to_string(u) + "," + std::to_string(i) +
                                ") outside " + std::to_string(model.n_users) + "x" +
                                std::to_string(model.n_items));
    }
}

}  // namespace

double predict(const MfModel& model, int u, int i) {
    check_indices(model, u, i);
    const double* p = model.user_row(u);
    const double* q = model.item_row(i);
    double dot = 0.0;
    for (int f = 0; f < model.k; ++f) dot += p[f] * q[f];
    return model.global_bias + model.user_bias[u] + model.item_bias[i] + dot;
}

double example_loss(const MfModel& model, int u, int i, double target, double reg_lambda) {
    double err = target - predict(model, u, i);
    const double* p = model.user_row(u);
    const double* q = model.item_row(i);
    double norms = model.user_bias[u] * model.user_bias[u] + model.item_bias[i] * model.item_bias[i];
    for (int f = 0; f < model.k; ++f) norms += p[f] * p[f] + q[f] * q[f];
    return err * err + reg_lambda * norms;
}

ExampleGrad example_gradient(const MfModel& model, int u, int i, double target,
                             double reg_lambda) {
    double err = target - predict(model, u, i);
    const double* p = model.user_row(u);
    const double* q = model.item_row(i);

    ExampleGrad g;
    g.d_global = -2.0 * err;
    g.d_user_bias = -2.0 * err + 2.0 * reg_lambda * model.user_bias[u];
    g.d_item_bias = -2.0 * err + 2.0 * reg_lambda * model.item_bias[i];
    g.d_user_factors.resize(model.k);
    g.d_item_factors.resize(model.k);
    for (int f = 0; f < model.k; ++f) {
        g.d_user_factors[f] = -2.0 * err * q[f] + 2.0 * reg_lambda * p[f];
        g.d_item_factors[f] = -2.0 * err * p[f] + 2.0 * reg_lambda * q[f];
    }
    return g;
}

void sgd_step(MfModel& model, int u, int i, double target, double learning_rate,
              double reg_lambda) {
    double err = target - predict(model, u, i);
    double* p = model.user_row(u);
    double* q = model.item_row(i);

    model.global_bias += learning_rate * 2.0 * err;
    model.user_bias[u] += learning_rate * 2.0 * (err - reg_lambda * model.user_bias[u]);
    model.item_bias[i] += learning_rate * 2.0 * (err - reg_lambda * model.item_bias[i]);
    for (int f = 0; f < model.k; ++f) {
        double pf = p[f];
        double qf = q[f];
        p[f] += learning_rate * 2.0 * (err * qf - reg_lambda * pf);
        q[f] += learning_rate * 2.0 * (err * pf - reg_lambda * qf);
    }
}

namespace {

bool all_finite(const MfModel& m) {
    if (!std::isfinite(m.global_bias)) return false;
    auto ok = [](const std::vector<double>& v) {
        for (double x : v) {
            if (!std::isfinite(x)) return false;
        }
        return true;
    };
    return ok(m.user_bias) && ok(m.item_bias) && ok(m.user_factors) && ok(m.item_factors);
}

}  // namespace

MfModel train_on_pairs(MfModel model, const std::vector<std::pair<int, int>>& positives,
                       const TrainConfig& config) {
    config.validate();
    for (const auto& [u, i] : positives) check_indices(model, u, i);

    std::vector<std::unordered_set<int>> user_pos(model.n_users);
    for (const auto& [u, i] : positives) user_pos[u].insert(i);

    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<int> item_dist(0, model.n_items - 1);
    std::vector<std::size_t> order(positives.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            auto [u, i] = positives[idx];
            sgd_step(model, u, i, 1.0, config.learning_rate, config.reg_lambda);
            if (static_cast<int>(user_pos[u].size()) >= model.n_items) continue;
            for (int t = 0; t < config.neg_ratio; ++t) {
                int j = item_dist(rng);
                while (user_pos[u].count(j)) j = item_dist(rng);
                sgd_step(model, u, j, 0.0, config.learning_rate, config.reg_lambda);
            }
        }
        if (!all_finite(model)) {
            throw DivergenceError(epoch, "mf training diverged at epoch " + std::to_string(epoch));
        }
    }
    return model;
}

MfModel train(MfModel model, const InteractionSet& interactions, const TrainConfig& config) {
    std::vector<std::pair<int, int>> positives;
    positives.reserve(interactions.pairs.size());
    for (const auto& [user, movie] : interactions.pairs) {
        positives.emplace_back(interactions.user_index.at(user), interactions.item_index.at(movie));
    }
    return train_on_pairs(std::move(model), positives, config);
}

SplitResult split_interactions(const InteractionSet& interactions, const SplitSpec& spec) {
    spec.validate();
    int n_users = interactions.n_users();

    std::vector<std::vector<int>> items_of(n_users);
    for (const auto& [user, movie] : interactions.pairs) {
        items_of[interactions.user_index.at(user)].push_back(interactions.item_index.at(movie));
    }

    SplitResult out;
    out.train_items.resize(n_users);
    out.validation_items.resize(n_users);
    out.test_items.resize(n_users);

    std::mt19937_64 rng(spec.seed);
    for (int u = 0; u < n_users; ++u) {
        auto& items = items_of[u];
        std::sort(items.begin(), items.end());  // canonical before shuffling
        std::shuffle(items.begin(), items.end(), rng);
        std::size_t n = items.size();
        std::size_t n_test = static_cast<std::size_t>(std::floor(n * spec.test));
        std::size_t n_val = static_cast<std::size_t>(std::floor(n * spec.validation));
        for (std::size_t idx = 0; idx < n; ++idx) {
            if (idx < n_test) {
                out.test_items[u].push_back(items[idx]);
            } else if (idx < n_test + n_val) {
                out.validation_items[u].push_back(items[idx]);
            } else {
                out.train_items[u].push_back(items[idx]);
                out.train_pairs.emplace_back(u, items[idx]);
            }
        }
        std::sort(out.train_items[u].begin(), out.train_items[u].end());
        std::sort(out.validation_items[u].begin(), out.validation_items[u].end());
        std::sort(out.test_items[u].begin(), out.test_items[u].end());
    }
    std::sort(out.train_pairs.begin(), out.train_pairs.end());
    return out;
}

namespace {

// Mean per-user NDCG@k, ranking every item outside the user's train fold.
// Returns the mean and the number of users scored.
std::pair<double, int> mean_holdout_ndcg(const MfModel& model,
                                         const std::vector<std::vector<int>>& train_items,
                                         const std::vector<std::vector<int>>& relevant_items,
                                         int k) {
    double acc = 0.0;
    int scored = 0;
    std::vector<std::pair<double, int>> candidates;
    for (int u = 0; u < model.n_users; ++u) {
        if (relevant_items[u].empty()) continue;
        const auto& exclude = train_items[u];
        candidates.clear();
        for (int i = 0; i < model.n_items; ++i) {
            if (std::binary_search(exclude.begin(), exclude.end(), i)) continue;
            candidates.emplace_back(-predict(model, u, i), i);  // (−score, idx): asc sort = desc score
        }
        std::size_t top = std::min<std::size_t>(k, candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + top, candidates.end());

        std::vector<std::int64_t> ranked;
        ranked.reserve(top);
        for (std::size_t r = 0; r < top; ++r) ranked.push_back(candidates[r].second);
        std::set<std::int64_t> relevant(relevant_items[u].begin(), relevant_items[u].end());
        acc += ndcg_at_k(ranked, relevant, k);
        ++scored;
    }
    return {scored > 0 ? acc / scored : 0.0, scored};
}

}  // namespace

GridSearchResult grid_search(const std::vector<TrainConfig>& grid,
                             const InteractionSet& interactions, const SplitSpec& split) {
    if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
    SplitResult folds = split_interactions(interactions, split);

    GridSearchResult result;
    MfModel best_model;
    bool have_best = false;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const TrainConfig& cfg = grid[g];
        MfModel model =
            init_model(interactions.n_users(), interactions.n_items(), cfg.k, cfg.seed);
        model = train_on_pairs(std::move(model), folds.train_pairs, cfg);
        auto [score, scored] = mean_holdout_ndcg(model, folds.train_items, folds.validation_items, 100);
        if (scored == 0) {
            throw std::runtime_error("grid_search: no user has validation positives");
        }
        result.validation_ndcg.push_back(score);
        if (!have_best || score > result.best_validation_ndcg) {
            have_best = true;
            result.best = cfg;
            result.best_index = static_cast<int>(g);
            result.best_validation_ndcg = score;
            result.users_scored = scored;
            best_model = std::move(model);
        }
    }
    result.best_test_ndcg =
        mean_holdout_ndcg(best_model, folds.train_items, folds.test_items, 100).first;
    return result;
}

namespace {

constexpr char kMagic[8] = {'G', 'F', 'M', 'F', '0', '0', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>(v >> (8 * i));
    out.write(buf, 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf[i]) << (8 * i);
    return v;
}

void put_doubles(std::ostream& out, const std::vector<double>& v) {
    for (double x : v) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, 8);
        put_u64(out, bits);
    }
}

void get_doubles(std::istream& in, std::vector<double>& v) {
    for (double& x : v) {
        std::uint64_t bits = get_u64(in);
        std::memcpy(&x, &bits, 8);
    }
}

}  // namespace

void save_model(const std::filesystem::path& path, const MfModel& model, std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model checkpoint: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    put_u64(out, static_cast<std::uint64_t>(model.n_users));
    put_u64(out, static_cast<std::uint64_t>(model.n_items));
    put_u64(out, static_cast<std::uint64_t>(model.k));
    put_u64(out, seed);
    std::uint64_t bits;
    std::memcpy(&bits, &model.global_bias, 8);
    put_u64(out, bits);
    put_doubles(out, model.user_bias);
    put_doubles(out, model.item_bias);
    put_doubles(out, model.user_factors);
    put_doubles(out, model.item_factors);
    if (!out) throw std::runtime_error("short write on model checkpoint: " + path.string());
}

LoadedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read model checkpoint: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
        throw FormatError("not a model checkpoint: " + path.string());
    }
    LoadedModel loaded;
    MfModel& m = loaded.model;
    m.n_users = static_cast<int>(get_u64(in));
    m.n_items = static_cast<int>(get_u64(in));
    m.k = static_cast<int>(get_u64(in));
    loaded.seed = get_u64(in);
    std::uint64_t bits = get_u64(in);
    std::memcpy(&m.global_bias, &bits, 8);
    if (m.n_users < 1 || m.n_items < 1 || m.k < 1) {
        throw FormatError("model checkpoint has bad dimensions: " + path.string());
    }
    m.user_bias.resize(m.n_users);
    m.item_bias.resize(m.n_items);
    m.user_factors.resize(static_cast<std::size_t>(m.n_users) * m.k);
    m.item_factors.resize(static_cast<std::size_t>(m.n_items) * m.k);
    get_doubles(in, m.user_bias);
    get_doubles(in, m.item_bias);
    get_doubles(in, m.user_factors);
    get_doubles(in, m.item_factors);
    if (!in) throw FormatError("model checkpoint truncated: " + path.string());
    return loaded;
}

}  // namespace gazefeed
