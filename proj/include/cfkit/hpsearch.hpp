#pragma once

#include <future>
#include <thread>

#include "cfkit/eval.hpp"

// Random hyperparameter search: uniform draws over closed per-field intervals,
// each candidate scored by mean AUC over the validation sequences (TRE-3 by
// default). The model itself is never touched.

namespace cfkit {

struct ParamRanges {
    double scale_step_lo = 1.01, scale_step_hi = 1.10;
    double scale_penalty_lo = 0.95, scale_penalty_hi = 1.00;
    double scale_lr_lo = 0.40, scale_lr_hi = 0.90;
    double win_weight_lo = 0.15, win_weight_hi = 0.35;
    double template_lr_lo = 0.0, template_lr_hi = 0.02;

    void validate() const {
        const auto ok = [](double lo, double hi) { return lo <= hi; };
        if (!ok(scale_step_lo, scale_step_hi) || !ok(scale_penalty_lo, scale_penalty_hi) ||
            !ok(scale_lr_lo, scale_lr_hi) || !ok(win_weight_lo, win_weight_hi) ||
            !ok(template_lr_lo, template_lr_hi))
            throw InvalidRange("ParamRanges: lo > hi");
    }
};

/// Independent uniform draw per field, in a fixed field order.
inline TrackerConfig sample_config(const ParamRanges& ranges, Rng& rng) {
    ranges.validate();
    TrackerConfig cfg;
    cfg.scale_step = rng.uniform(ranges.scale_step_lo, ranges.scale_step_hi);
    cfg.scale_penalty = rng.uniform(ranges.scale_penalty_lo, ranges.scale_penalty_hi);
    cfg.scale_lr = rng.uniform(ranges.scale_lr_lo, ranges.scale_lr_hi);
    cfg.win_weight = rng.uniform(ranges.win_weight_lo, ranges.win_weight_hi);
    cfg.template_lr = rng.uniform(ranges.template_lr_lo, ranges.template_lr_hi);
    return cfg;
}

/// Mean AUC of the config across the sequences.
inline double evaluate_config(const NetModel& model,
                              const std::vector<SequenceData>& sequences,
                              const TrackerConfig& cfg, int tre_starts) {
    double total = 0.0;
    for (const SequenceData& seq : sequences)
        total += run_eval(seq, model, cfg, tre_starts).auc;
    return total / double(sequences.size());
}

struct ScoredSample {
    int index = 0;
    TrackerConfig config;
    double mean_auc = 0.0;
};

struct SearchResult {
    TrackerConfig best;
    double best_score = 0.0;
    int best_index = 0;
    std::vector<ScoredSample> table;  // in sample order
};

/// Draw n_samples configs from the ranges, score each, return the best (ties
/// broken by lower sample index). Candidate evaluations run concurrently; the
/// table is assembled in sample order regardless of completion order.
inline SearchResult random_search(const NetModel& model,
                                  const std::vector<SequenceData>& sequences, int n_samples,
                                  uint64_t seed, const ParamRanges& ranges = ParamRanges{},
                                  int tre_starts = 3) {
    if (n_samples < 1) throw InvalidRange("random_search: n_samples must be >= 1");
    if (sequences.empty()) throw EmptyInput("random_search: no sequences");

    Rng rng(seed);
    std::vector<TrackerConfig> configs;
    configs.reserve(static_cast<size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) configs.push_back(sample_config(ranges, rng));

    std::vector<double> scores(static_cast<size_t>(n_samples), 0.0);
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    for (int chunk = 0; chunk < n_samples; chunk += static_cast<int>(hw)) {
        const int stop = std::min(n_samples, chunk + static_cast<int>(hw));
        std::vector<std::future<double>> futures;
        for (int i = chunk; i < stop; ++i)
            futures.push_back(std::async(std::launch::async, [&, i]() {
                return evaluate_config(model, sequences, configs[static_cast<size_t>(i)],
                                       tre_starts);
            }));
        for (int i = chunk; i < stop; ++i)
            scores[static_cast<size_t>(i)] = futures[static_cast<size_t>(i - chunk)].get();
    }

    SearchResult result;
    result.best_score = -1.0;
    for (int i = 0; i < n_samples; ++i) {
        result.table.push_back(
            ScoredSample{i, configs[static_cast<size_t>(i)], scores[static_cast<size_t>(i)]});
        if (scores[static_cast<size_t>(i)] > result.best_score) {
            result.best_score = scores[static_cast<size_t>(i)];
            result.best = configs[static_cast<size_t>(i)];
            result.best_index = i;
        }
    }
    return result;
}

}  // namespace cfkit
