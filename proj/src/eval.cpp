#include "gazefeed/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace gazefeed {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

int rank_by_scores(const std::array<MovieId, 8>& presented, const std::array<double, 8>& scores,
                   MovieId selected) {
    std::array<int, 8> order{};
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return presented[a] < presented[b];
    });
    for (int r = 0; r < 8; ++r) {
        if (presented[order[r]] == selected) return r + 1;
    }
    throw std::invalid_argument("rank_selected: selected movie not among the 8 presented");
}

}  // namespace

RankingResult rank_selected(const MfModel& model, int user_index,
                            const std::map<MovieId, int>& item_index, const StudyEvents& screen) {
    if (std::find(screen.presented.begin(), screen.presented.end(), screen.selected) ==
        screen.presented.end()) {
        throw std::invalid_argument("rank_selected: selected movie not among the 8 presented");
    }
    if (user_index >= model.n_users) {
        throw std::out_of_range("rank_selected: user index " + std::to_string(user_index) +
                                " outside " + std::to_string(model.n_users));
    }
    std::array<double, 8> scores{};
    for (int s = 0; s < 8; ++s) {
        double score = model.global_bias;
        if (user_index >= 0) score += model.user_bias[user_index];
        auto it = item_index.find(screen.presented[s]);
        if (it != item_index.end()) {
            if (it->second < 0 || it->second >= model.n_items) {
                throw std::out_of_range("rank_selected: item index map does not match the model");
            }
            score += model.item_bias[it->second];
            if (user_index >= 0) {
                const double* p = model.user_row(user_index);
                const double* q = model.item_row(it->second);
                for (int f = 0; f < model.k; ++f) score += p[f] * q[f];
            }
        }
        scores[s] = score;
    }
    RankingResult result;
    result.user_id = screen.user_id;
    result.screen_id = screen.screen_id;
    result.modality = screen.modality;
    result.rank = rank_by_scores(screen.presented, scores, screen.selected);
    return result;
}

namespace {

std::pair<double, double> mean_sample_std(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    double mean = sum / static_cast<double>(xs.size());
    double std_dev = 0.0;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return {mean, std_dev};
}

}  // namespace

MethodMetrics compute_report(const std::vector<RankingResult>& results) {
    if (results.empty()) throw std::invalid_argument("compute_report: no ranking results");
    MethodMetrics m;
    m.n_screens = static_cast<int>(results.size());

    std::vector<double> ranks;
    ranks.reserve(results.size());
    for (const auto& r : results) {
        if (r.rank < 1 || r.rank > 8) {
            throw std::invalid_argument("compute_report: rank outside 1..8");
        }
        ranks.push_back(static_cast<double>(r.rank));
    }
    auto [rank_mean, rank_std] = mean_sample_std(ranks);
    m.rank_mean = rank_mean;
    m.rank_std = rank_std;

    for (int k = 1; k <= 4; ++k) {
        std::vector<double> indicator;
        indicator.reserve(results.size());
        for (const auto& r : results) indicator.push_back(r.rank <= k ? 1.0 : 0.0);
        auto [mean, std_dev] = mean_sample_std(indicator);
        m.recall_mean[k - 1] = 100.0 * mean;
        m.recall_std[k - 1] = std_dev;
    }
    return m;
}

double ndcg_at_k(const std::vector<std::int64_t>& ranked, const std::set<std::int64_t>& relevant,
                 int k) {
    if (relevant.empty()) throw std::invalid_argument("ndcg_at_k: empty relevant set");
    if (k < 1) throw std::invalid_argument("ndcg_at_k: k must be >= 1");
    std::set<std::int64_t> seen;
    for (std::int64_t item : ranked) {
        if (!seen.insert(item).second) {
            throw std::invalid_argument("ndcg_at_k: ranked list contains duplicates");
        }
    }
    double dcg = 0.0;
    int limit = std::min<int>(k, static_cast<int>(ranked.size()));
    for (int pos = 1; pos <= limit; ++pos) {
        if (relevant.count(ranked[pos - 1])) dcg += 1.0 / std::log2(pos + 1.0);
    }
    double ideal = 0.0;
    int ideal_hits = std::min<int>(k, static_cast<int>(relevant.size()));
    for (int pos = 1; pos <= ideal_hits; ++pos) ideal += 1.0 / std::log2(pos + 1.0);
    return dcg / ideal;
}

namespace {

struct Task {
    std::size_t method_idx = 0;
    std::string user_id;
    Modality modality = Modality::image;
    std::vector<const StudyEvents*> screens;  // held-out screens, events order
    std::uint64_t seed = 0;
};

struct TaskResult {
    std::vector<RankingResult> ranks;
    bool diverged = false;
    int excluded_screens = 0;
    int leakage_violations = 0;
};

// Movies a screen feeds into training under a method (selected/detailed/AOI
// union); empty for the random baseline.
std::set<MovieId> screen_contribution(const FeedbackMethod& method, const StudyEvents& e,
                                      const DwellMap& dwells, const StatsMap& stats) {
    std::set<MovieId> movies;
    if (method.kind == MethodKind::random) return movies;
    movies.insert(e.selected);
    if (method.kind == MethodKind::selected) return movies;
    movies.insert(e.detailed.begin(), e.detailed.end());
    if (method.kind == MethodKind::selected_detailed) return movies;
    auto thresholded = apply_threshold(dwells.at({e.user_id, e.screen_id}),
                                       stats.at({e.user_id, e.modality}), method.threshold);
    movies.insert(thresholded.begin(), thresholded.end());
    return movies;
}

// Pairs derivable only from held-out screens must be absent from training.
int audit_leakage(const FeedbackMethod& method, const Task& task,
                  const std::vector<StudyEvents>& events, const DwellMap& dwells,
                  const StatsMap& stats, const InteractionSet& training) {
    std::set<MovieId> held_out_derived;
    std::set<MovieId> allowed;
    for (const auto& e : events) {
        if (e.user_id != task.user_id) continue;
        auto movies = screen_contribution(method, e, dwells, stats);
        if (e.modality == task.modality) {
            held_out_derived.insert(movies.begin(), movies.end());
        } else {
            allowed.insert(movies.begin(), movies.end());
        }
    }
    int violations = 0;
    std::string key = study_user_key(task.user_id);
    for (MovieId m : held_out_derived) {
        if (!allowed.count(m) && training.contains(key, m)) ++violations;
    }
    return violations;
}

TaskResult run_task(const ExperimentInput& input, const Task& task) {
    const FeedbackMethod& method = input.methods[task.method_idx];
    TaskResult result;

    if (method.kind == MethodKind::random) {
        std::mt19937_64 rng(task.seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (const StudyEvents* e : task.screens) {
            std::array<double, 8> scores{};
            for (double& s : scores) s = unit(rng);
            RankingResult r;
            r.user_id = e->user_id;
            r.screen_id = e->screen_id;
            r.modality = e->modality;
            r.rank = rank_by_scores(e->presented, scores, e->selected);
            result.ranks.push_back(std::move(r));
        }
        return result;
    }

    HoldOut hold{task.user_id, task.modality};
    InteractionSet training = assemble_training(method, input.events, input.dwells, input.stats,
                                                input.background, hold);
    TrainConfig cfg = input.train;
    cfg.seed = task.seed;
    try {
        MfModel model =
            init_model(training.n_users(), training.n_items(), cfg.k, task.seed);
        model = train(std::move(model), training, cfg);

        auto user_it = training.user_index.find(study_user_key(task.user_id));
        int user_index = user_it == training.user_index.end() ? -1 : user_it->second;
        for (const StudyEvents* e : task.screens) {
            result.ranks.push_back(rank_selected(model, user_index, training.item_index, *e));
        }
    } catch (const DivergenceError&) {
        result.diverged = true;
        result.excluded_screens = static_cast<int>(task.screens.size());
        result.ranks.clear();
    }
    result.leakage_violations =
        audit_leakage(method, task, input.events, input.dwells, input.stats, training);
    return result;
}

}  // namespace

std::vector<MethodOutcome> run_experiment(const ExperimentInput& input) {
    if (input.methods.empty()) throw std::invalid_argument("run_experiment: no methods");
    input.train.validate();

    // (user, modality) → held-out screens, users in sorted order.
    std::map<std::string, std::array<std::vector<const StudyEvents*>, 2>> screens_of;
    for (const auto& e : input.events) {
        screens_of[e.user_id][e.modality == Modality::image ? 0 : 1].push_back(&e);
    }

    std::vector<Task> tasks;
    for (std::size_t m = 0; m < input.methods.size(); ++m) {
        std::size_t user_rank = 0;
        for (const auto& [user_id, by_modality] : screens_of) {
            for (int mod = 0; mod < 2; ++mod) {
                if (by_modality[mod].empty()) continue;
                Task task;
                task.method_idx = m;
                task.user_id = user_id;
                task.modality = mod == 0 ? Modality::image : Modality::text;
                task.screens = by_modality[mod];
                std::uint64_t s = splitmix64(input.master_seed ^ (m + 1));
                s = splitmix64(s ^ (user_rank + 1));
                task.seed = splitmix64(s ^ (mod + 1));
                tasks.push_back(std::move(task));
            }
            ++user_rank;
        }
    }

    std::vector<TaskResult> results(tasks.size());
    int jobs = std::max(1, input.jobs);
    if (jobs == 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t) results[t] = run_task(input, tasks[t]);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (;;) {
                std::size_t t = next.fetch_add(1);
                if (t >= tasks.size()) return;
                try {
                    results[t] = run_task(input, tasks[t]);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        std::size_t n_threads = std::min(static_cast<std::size_t>(jobs), tasks.size());
        pool.reserve(n_threads);
        for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    std::vector<MethodOutcome> outcomes(input.methods.size());
    for (std::size_t m = 0; m < input.methods.size(); ++m) {
        outcomes[m].method = input.methods[m];
    }
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        MethodOutcome& out = outcomes[tasks[t].method_idx];
        const TaskResult& r = results[t];
        ++out.models;
        out.diverged_models += r.diverged ? 1 : 0;
        out.excluded_screens += r.excluded_screens;
        out.leakage_violations += r.leakage_violations;
        out.ranks.insert(out.ranks.end(), r.ranks.begin(), r.ranks.end());
    }
    for (auto& out : outcomes) {
        if (!out.ranks.empty()) out.metrics = compute_report(out.ranks);
    }
    return outcomes;
}

void write_ranks_csv(std::ostream& out, const std::vector<MethodOutcome>& outcomes) {
    out << "method,user_id,screen_id,modality,rank\n";
    for (const auto& outcome : outcomes) {
        for (const auto& r : outcome.ranks) {
            out << outcome.method.label() << ',' << r.user_id << ',' << r.screen_id << ','
                << to_string(r.modality) << ',' << r.rank << '\n';
        }
    }
}

void write_metrics_csv(std::ostream& out, const std::vector<MethodOutcome>& outcomes) {
    out << "method,n_screens,models,diverged_models,excluded_screens,leakage_violations";
    for (int k = 1; k <= 4; ++k) out << ",recall" << k << "_mean,recall" << k << "_std";
    out << ",rank_mean,rank_std\n";
    char buf[64];
    for (const auto& o : outcomes) {
        out << o.method.label() << ',' << o.metrics.n_screens << ',' << o.models << ','
            << o.diverged_models << ',' << o.excluded_screens << ',' << o.leakage_violations;
        for (int k = 0; k < 4; ++k) {
            std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", o.metrics.recall_mean[k],
                          o.metrics.recall_std[k]);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", o.metrics.rank_mean, o.metrics.rank_std);
        out << buf << '\n';
    }
}

std::string metrics_markdown(const std::vector<MethodOutcome>& outcomes) {
    std::ostringstream out;
    out << "| Method | Recall@1 (Std) | Recall@2 (Std) | Recall@3 (Std) | Recall@4 (Std) | Mean "
           "Rank (Std) |\n";
    out << "|---|---|---|---|---|---|\n";
    char buf[64];
    for (const auto& o : outcomes) {
        out << "| " << o.method.table_label() << " |";
        for (int k = 0; k < 4; ++k) {
            std::snprintf(buf, sizeof(buf), " %.2f (%.2f) |", o.metrics.recall_mean[k],
                          o.metrics.recall_std[k]);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), " %.3f (%.2f) |", o.metrics.rank_mean, o.metrics.rank_std);
        out << buf << "\n";
    }
    return out.str();
}

}  // namespace gazefeed
