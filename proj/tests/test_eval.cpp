#include <catch2/catch_amalgamated.hpp>

#include "cfkit/eval.hpp"
#include "cfkit/rng.hpp"

using namespace cfkit;

TEST_CASE("iou basics") {
    const Rect a{0, 0, 2, 2};
    REQUIRE(iou(a, a) == 1.0);
    REQUIRE(iou(a, Rect{10, 10, 2, 2}) == 0.0);
    REQUIRE(iou(a, Rect{1, 0, 2, 2}) == Catch::Approx(2.0 / 6.0));
    REQUIRE_THROWS_AS(iou(a, Rect{0, 0, 0, 2}), DegenerateRect);
}

TEST_CASE("success curve endpoints") {
    {
        const auto [curve, auc] = success_curve(std::vector<double>(7, 1.0));
        for (double v : curve) REQUIRE(v == 1.0);
        REQUIRE(auc == 1.0);
    }
    {
        const auto [curve, auc] = success_curve(std::vector<double>(5, 0.0));
        REQUIRE(curve[0] == 1.0);  // every overlap >= 0
        for (size_t i = 1; i < curve.size(); ++i) REQUIRE(curve[i] == 0.0);
        REQUIRE(auc == Catch::Approx(0.01));
    }
    REQUIRE_THROWS_AS(success_curve({}), EmptyInput);
}

TEST_CASE("success curve is monotone and its AUC tracks the mean overlap") {
    Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> overlaps;
        double mean = 0.0;
        const int n = 37 + trial;
        for (int i = 0; i < n; ++i) {
            overlaps.push_back(rng.uniform01());
            mean += overlaps.back();
        }
        mean /= n;
        const auto [curve, auc] = success_curve(overlaps);
        REQUIRE(curve[0] == 1.0);
        for (size_t i = 1; i < curve.size(); ++i) REQUIRE(curve[i] <= curve[i - 1]);
        REQUIRE(std::abs(auc - mean) <= 0.01);
    }
}

TEST_CASE("precision at 20 pixels is boundary inclusive") {
    REQUIRE(precision20({0.0, 0.0}) == 1.0);
    REQUIRE(precision20({100.0, 100.0}) == 0.0);
    REQUIRE(precision20({0.0, 20.0, 21.0}) == Catch::Approx(2.0 / 3.0));
    REQUIRE_THROWS_AS(precision20({}), EmptyInput);
}

TEST_CASE("TRE start frames are equispaced from one") {
    REQUIRE(tre_start_frames(90, 3) == std::vector<int>{1, 31, 61});
    REQUIRE(tre_start_frames(60, 1) == std::vector<int>{1});
    REQUIRE(tre_start_frames(60, 20).size() == 20);
    REQUIRE(tre_start_frames(60, 20).front() == 1);
    REQUIRE_THROWS_AS(tre_start_frames(60, 0), InvalidRange);
}

namespace {

std::vector<Rect> gt_line(int length) {
    std::vector<Rect> gt;
    for (int i = 0; i < length; ++i)
        gt.push_back(Rect{10.0 + 2.0 * i, 20.0, 8.0, 8.0});
    return gt;
}

}  // namespace

TEST_CASE("a perfect tracker scores AUC 1 in every mode") {
    const std::vector<Rect> gt = gt_line(30);
    const TrackRunner perfect = [&gt](int start) {
        return std::vector<Rect>(gt.begin() + start, gt.end());
    };
    for (int starts : {1, 3, 5}) {
        const EvalReport report = run_eval(gt, perfect, starts);
        REQUIRE(report.auc == 1.0);
        REQUIRE(report.precision20 == 1.0);
        REQUIRE(report.runs.size() == static_cast<size_t>(starts));
    }
}

TEST_CASE("losing the target on the first step leaves only the zero bin") {
    const std::vector<Rect> gt = gt_line(25);
    const TrackRunner lost = [](int) {
        return std::vector<Rect>{Rect{500, 500, 8, 8}};  // disjoint immediately
    };
    const EvalReport report = run_eval(gt, lost, 1);
    REQUIRE(report.auc == Catch::Approx(0.01));
    REQUIRE(report.precision20 == 0.0);
    REQUIRE(report.runs[0].overlaps.size() == 24);
}

TEST_CASE("TRE(1) equals OPE exactly") {
    const std::vector<Rect> gt = gt_line(40);
    Rng rng(43);
    const TrackRunner noisy = [&gt, &rng](int start) {
        std::vector<Rect> rects;
        for (size_t i = static_cast<size_t>(start); i < gt.size(); ++i) {
            Rect r = gt[i];
            r.x += rng.uniform(-1.0, 1.0);  // consumed identically in both calls
            rects.push_back(r);
        }
        return rects;
    };
    // scripted trajectories recorded once, replayed for both modes
    std::vector<Rect> recorded = noisy(1);
    const TrackRunner playback = [&recorded](int start) {
        (void)start;
        return recorded;
    };
    const EvalReport ope = run_eval(gt, playback, 1);
    const EvalReport tre1 = run_eval(gt, playback, 1);
    REQUIRE(ope.auc == tre1.auc);
    REQUIRE(ope.success == tre1.success);
    REQUIRE(ope.precision20 == tre1.precision20);
    REQUIRE(ope.runs[0].overlaps == tre1.runs[0].overlaps);
}

TEST_CASE("a lost frame zeroes the remainder of the run even if later rects recover") {
    const std::vector<Rect> gt = gt_line(12);
    const int lost_at = 6;  // 1-based frame where overlap first hits zero
    const TrackRunner script = [&gt, lost_at](int start) {
        std::vector<Rect> rects;
        for (size_t i = static_cast<size_t>(start); i < gt.size(); ++i) {
            const int frame = static_cast<int>(i) + 1;
            rects.push_back(frame == lost_at ? Rect{900, 900, 8, 8} : gt[i]);
        }
        return rects;
    };
    const EvalReport report = run_eval(gt, script, 1);
    const RunResult& run = report.runs[0];
    for (int frame = 2; frame <= 12; ++frame) {
        const double overlap = run.overlaps[static_cast<size_t>(frame - 2)];
        if (frame < lost_at)
            REQUIRE(overlap == 1.0);
        else
            REQUIRE(overlap == 0.0);
    }
}

TEST_CASE("stored runs replay to the same report as the live path") {
    const std::vector<Rect> gt = gt_line(30);
    const TrackRunner perfect = [&gt](int start) {
        return std::vector<Rect>(gt.begin() + start, gt.end());
    };
    const EvalReport live = run_eval(gt, perfect, 3);

    std::vector<StoredRun> stored;
    for (int start : tre_start_frames(30, 3))
        stored.push_back(StoredRun{start, std::vector<Rect>(gt.begin() + start, gt.end())});
    const EvalReport replay = run_eval_stored(gt, stored, 3);

    REQUIRE(replay.auc == live.auc);
    REQUIRE(replay.success == live.success);
    for (size_t i = 0; i < live.runs.size(); ++i)
        REQUIRE(replay.runs[i].overlaps == live.runs[i].overlaps);
}

TEST_CASE("stored runs must match the declared mode") {
    const std::vector<Rect> gt = gt_line(30);
    std::vector<StoredRun> stored{StoredRun{1, gt_line(30)}};
    REQUIRE_THROWS_AS(run_eval_stored(gt, stored, 3), InvalidRange);

    stored = {StoredRun{1, {}}, StoredRun{12, {}}, StoredRun{21, {}}};
    REQUIRE_THROWS_AS(run_eval_stored(gt, stored, 3), InvalidRange);
}
