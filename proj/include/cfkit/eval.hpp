#pragma once

#include <functional>
#include <limits>

#include "cfkit/sequence.hpp"
#include "cfkit/tracker.hpp"

// Evaluation protocol: intersection-over-union per frame, success curves over
// 100 thresholds with their AUC, precision at 20 pixels, and OPE/TRE runs with
// lost-target termination (first zero-overlap frame zeroes the rest of a run).

namespace cfkit {

inline double iou(const Rect& a, const Rect& b) {
    a.require_positive();
    b.require_positive();
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    return inter / (a.area() + b.area() - inter);
}

/// Thresholds t_i = i/99 for i = 0..99; curve[i] is the fraction of overlaps
/// >= t_i, and the AUC is the curve mean.
inline std::pair<std::vector<double>, double> success_curve(const std::vector<double>& overlaps) {
    if (overlaps.empty()) throw EmptyInput("success_curve: no overlaps");
    std::vector<double> curve(100, 0.0);
    for (int i = 0; i < 100; ++i) {
        const double tau = i / 99.0;
        long count = 0;
        for (double o : overlaps)
            if (o >= tau) ++count;
        curve[static_cast<size_t>(i)] = double(count) / double(overlaps.size());
    }
    double auc = 0.0;
    for (double v : curve) auc += v;
    return {std::move(curve), auc / 100.0};
}

/// Fraction of frames with center error <= 20 pixels (boundary inclusive).
inline double precision20(const std::vector<double>& center_errors) {
    if (center_errors.empty()) throw EmptyInput("precision20: no center errors");
    long count = 0;
    for (double e : center_errors)
        if (e <= 20.0) ++count;
    return double(count) / double(center_errors.size());
}

/// 1-based TRE start frames: 1 + floor(j*L/n), j = 0..n-1. TRE(1) is OPE.
inline std::vector<int> tre_start_frames(int length, int num_starts) {
    if (num_starts < 1) throw InvalidRange("tre_start_frames: num_starts must be >= 1");
    std::vector<int> starts;
    starts.reserve(static_cast<size_t>(num_starts));
    for (int j = 0; j < num_starts; ++j)
        starts.push_back(1 + static_cast<int>((static_cast<long>(j) * length) / num_starts));
    return starts;
}

struct RunResult {
    int start_frame = 1;                 // 1-based
    std::vector<double> overlaps;        // frames start_frame+1 .. L
    std::vector<double> center_errors;
};

struct EvalReport {
    std::vector<RunResult> runs;
    std::vector<double> success;  // 100 values
    double auc = 0.0;
    double precision20 = 0.0;

    std::vector<double> pooled_overlaps() const {
        std::vector<double> all;
        for (const RunResult& r : runs) all.insert(all.end(), r.overlaps.begin(), r.overlaps.end());
        return all;
    }
};

/// Produces predicted rects for frames start_frame+1 .. L (1-based start); may
/// return fewer when the target was lost and the run terminated early.
using TrackRunner = std::function<std::vector<Rect>(int start_frame)>;

inline EvalReport run_eval(const std::vector<Rect>& ground_truth, const TrackRunner& runner,
                           int num_starts) {
    const int L = static_cast<int>(ground_truth.size());
    if (L < 2) throw EmptyInput("run_eval: sequence too short");

    EvalReport report;
    for (int start : tre_start_frames(L, num_starts)) {
        RunResult run;
        run.start_frame = start;
        const std::vector<Rect> rects = start < L ? runner(start) : std::vector<Rect>{};

        bool lost = false;
        for (int frame = start + 1; frame <= L; ++frame) {
            const size_t k = static_cast<size_t>(frame - start - 1);
            double overlap = 0.0;
            double err = std::numeric_limits<double>::infinity();
            if (!lost && k < rects.size()) {
                const Rect& gt = ground_truth[static_cast<size_t>(frame - 1)];
                overlap = iou(rects[k], gt);
                err = std::hypot(rects[k].cx() - gt.cx(), rects[k].cy() - gt.cy());
            }
            if (overlap == 0.0) {  // lost: zero out the rest of the run
                lost = true;
                overlap = 0.0;
                err = std::numeric_limits<double>::infinity();
            }
            run.overlaps.push_back(overlap);
            run.center_errors.push_back(err);
        }
        report.runs.push_back(std::move(run));
    }

    std::vector<double> overlaps = report.pooled_overlaps();
    std::vector<double> errors;
    for (const RunResult& r : report.runs)
        errors.insert(errors.end(), r.center_errors.begin(), r.center_errors.end());
    if (overlaps.empty()) throw EmptyInput("run_eval: no evaluated frames");

    auto [curve, auc] = success_curve(overlaps);
    report.success = std::move(curve);
    report.auc = auc;
    report.precision20 = precision20(errors);
    return report;
}

/// Runner that drives the online tracker from the ground-truth rect of the
/// start frame, stopping early once the prediction stops overlapping.
inline TrackRunner make_tracker_runner(const SequenceData& seq, const NetModel& model,
                                       const TrackerConfig& cfg) {
    return [&seq, model, cfg](int start_frame) {
        std::vector<Rect> rects;
        TrackerState st = tracker_init(seq.frames[static_cast<size_t>(start_frame - 1)],
                                       seq.ground_truth[static_cast<size_t>(start_frame - 1)],
                                       model, cfg);
        for (int frame = start_frame + 1; frame <= seq.length(); ++frame) {
            const Rect pred = tracker_step(st, seq.frames[static_cast<size_t>(frame - 1)]);
            rects.push_back(pred);
            if (iou(pred, seq.ground_truth[static_cast<size_t>(frame - 1)]) == 0.0) break;
        }
        return rects;
    };
}

inline EvalReport run_eval(const SequenceData& seq, const NetModel& model,
                           const TrackerConfig& cfg, int num_starts) {
    return run_eval(seq.ground_truth, make_tracker_runner(seq, model, cfg), num_starts);
}

/// Stored trajectory: one run of a results file. The first row of a run holds
/// the init rect of its start frame; scoring covers the following frames.
struct StoredRun {
    int start_frame = 1;
    std::vector<Rect> rects;  // frames start_frame+1 ..
};

inline EvalReport run_eval_stored(const std::vector<Rect>& ground_truth,
                                  const std::vector<StoredRun>& runs, int num_starts) {
    const int L = static_cast<int>(ground_truth.size());
    const std::vector<int> expected = tre_start_frames(L, num_starts);
    if (runs.size() != expected.size())
        throw InvalidRange("run_eval_stored: results hold " + std::to_string(runs.size()) +
                           " runs, mode expects " + std::to_string(expected.size()));
    for (size_t i = 0; i < runs.size(); ++i)
        if (runs[i].start_frame != expected[i])
            throw InvalidRange("run_eval_stored: run " + std::to_string(i) +
                               " starts at frame " + std::to_string(runs[i].start_frame) +
                               ", expected " + std::to_string(expected[i]));

    return run_eval(
        ground_truth,
        [&runs](int start) {
            for (const StoredRun& r : runs)
                if (r.start_frame == start) return r.rects;
            return std::vector<Rect>{};
        },
        num_starts);
}

}  // namespace cfkit
