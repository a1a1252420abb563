#include <catch2/catch_amalgamated.hpp>

#include "cfkit/synth.hpp"
#include "cfkit/tracker.hpp"
#include "test_util.hpp"

using namespace cfkit;

TEST_CASE("tracker config validation") {
    TrackerConfig cfg;
    REQUIRE_NOTHROW(cfg.validate());
    cfg.scale_step = 1.0;
    REQUIRE_THROWS_AS(cfg.validate(), InvalidRange);
    cfg = TrackerConfig{};
    cfg.scale_penalty = 0.0;
    REQUIRE_THROWS_AS(cfg.validate(), InvalidRange);
    cfg = TrackerConfig{};
    cfg.num_scales = 2;
    REQUIRE_THROWS_AS(cfg.validate(), InvalidRange);
}

TEST_CASE("select_peak is invariant to a constant added to all maps") {
    Rng rng(31);
    const int side = 10;
    std::vector<Grid> maps;
    for (int s = 0; s < 3; ++s) {
        Grid m(side, side);
        for (int r = 0; r < side; ++r)
            for (int c = 0; c < side; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
        maps.push_back(std::move(m));
    }
    const Grid window = detail::score_window(side, 5);

    const PeakChoice base = select_peak(maps, window, 0.25, 0.978, 1);
    for (double shift : {-3.0, 0.5, 42.0}) {
        std::vector<Grid> shifted = maps;
        for (Grid& m : shifted) m += shift;
        const PeakChoice got = select_peak(shifted, window, 0.25, 0.978, 1);
        REQUIRE(got.scale_index == base.scale_index);
        REQUIRE(got.row == base.row);
        REQUIRE(got.col == base.col);
    }
}

TEST_CASE("equal raw peaks across scales resolve to the current scale") {
    Rng rng(32);
    const int side = 8;
    Grid m(side, side);
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) m(r, c) = rng.uniform(0.0, 1.0);
    const std::vector<Grid> maps{m, m, m};  // identical responses
    const PeakChoice got = select_peak(maps, detail::score_window(side, 4), 0.2, 0.97, 1);
    REQUIRE(got.scale_index == 1);
}

TEST_CASE("constant maps leave the argmax at the window peak") {
    const int side = 9;
    const std::vector<Grid> maps{Grid::Constant(side, side, 0.4),
                                 Grid::Constant(side, side, 0.4),
                                 Grid::Constant(side, side, 0.4)};
    const PeakChoice got = select_peak(maps, detail::score_window(side, 3), 0.3, 0.97, 1);
    REQUIRE(got.scale_index == 1);
    REQUIRE(got.row == 3);
    REQUIRE(got.col == 3);
}

TEST_CASE("stepping an uninitialized state throws") {
    TrackerState st(testutil::identity_model(), TrackerConfig{});
    Image frame(32, 32);
    REQUIRE_THROWS_AS(tracker_step(st, frame), UninitializedState);
}

TEST_CASE("init produces a template of the configured cropped side") {
    SynthOptions opt;
    opt.frames = 2;
    opt.seed = 33;
    const SequenceData seq = make_synthetic_sequence(opt);
    const NetModel model = testutil::identity_model(16, 0.01, 2);
    const TrackerState st = tracker_init(seq.frames[0], seq.ground_truth[0], model,
                                         TrackerConfig{});
    REQUIRE(st.tmpl.side() == 12);  // 16 - 2*2
    REQUIRE(st.tmpl.k() == 1);
    REQUIRE(st.scale == 1.0);

    Rect degenerate{0, 0, 0, 4};
    REQUIRE_THROWS_AS(tracker_init(seq.frames[0], degenerate, model, TrackerConfig{}),
                      DegenerateRect);
}

TEST_CASE("init near the border relies on edge replication and still matches shape") {
    SynthOptions opt;
    opt.frames = 2;
    opt.seed = 34;
    const SequenceData seq = make_synthetic_sequence(opt);
    const NetModel model = testutil::identity_model();
    Rect corner{-2.0, -2.0, 9.0, 9.0};  // partially outside
    const TrackerState st =
        tracker_init(seq.frames[0], corner, model, TrackerConfig{});
    REQUIRE(st.tmpl.side() == 12);
    for (int p = 0; p < st.tmpl.k(); ++p) REQUIRE(st.tmpl[p].finite());
}

TEST_CASE("zero template learning rate keeps the template bitwise constant") {
    SynthOptions opt;
    opt.frames = 6;
    opt.seed = 35;
    const SequenceData seq = make_synthetic_sequence(opt);
    const NetModel model = testutil::identity_model();
    TrackerConfig cfg;
    cfg.template_lr = 0.0;
    TrackerState st = tracker_init(seq.frames[0], seq.ground_truth[0], model, cfg);
    const MultiChannelMap initial = st.tmpl;
    for (int f = 1; f < seq.length(); ++f) tracker_step(st, seq.frames[f]);
    for (int p = 0; p < initial.k(); ++p)
        REQUIRE((st.tmpl[p].data - initial[p].data).abs().maxCoeff() == 0.0);
}

TEST_CASE("static frames keep the prediction stationary") {
    SynthOptions opt;
    opt.frames = 5;
    opt.step_px = 0.0;
    opt.seed = 36;
    const SequenceData seq = make_synthetic_sequence(opt);
    const NetModel model = testutil::identity_model();
    TrackerConfig cfg;  // win_weight 0.2625 > 0
    TrackerState st = tracker_init(seq.frames[0], seq.ground_truth[0], model, cfg);
    for (int f = 1; f < seq.length(); ++f) {
        const Rect pred = tracker_step(st, seq.frames[f]);
        REQUIRE(pred.cx() == Catch::Approx(seq.ground_truth[0].cx()).margin(1e-9));
        REQUIRE(pred.cy() == Catch::Approx(seq.ground_truth[0].cy()).margin(1e-9));
    }
}

TEST_CASE("tracking a 2 px/frame drift stays within one pixel per frame") {
    SynthOptions opt;
    opt.frames = 40;
    opt.seed = 37;
    const SequenceData seq = make_synthetic_sequence(opt);
    const NetModel model = testutil::identity_model();
    TrackerState st = tracker_init(seq.frames[0], seq.ground_truth[0], model, TrackerConfig{});
    for (int f = 1; f < seq.length(); ++f) {
        const Rect pred = tracker_step(st, seq.frames[f]);
        const Rect& gt = seq.ground_truth[static_cast<size_t>(f)];
        REQUIRE(std::abs(pred.cx() - gt.cx()) <= 1.0);
        REQUIRE(std::abs(pred.cy() - gt.cy()) <= 1.0);
    }
}

TEST_CASE("rect aspect ratio is exactly preserved through scale updates") {
    SynthOptions opt;
    opt.frames = 10;
    opt.seed = 38;
    const SequenceData seq = make_synthetic_sequence(opt);
    const NetModel model = testutil::identity_model();
    Rect init = seq.ground_truth[0];
    init.h = init.w * 1.5;  // non-square box
    TrackerState st = tracker_init(seq.frames[0], init, model, TrackerConfig{});
    for (int f = 1; f < seq.length(); ++f) {
        const Rect pred = tracker_step(st, seq.frames[f]);
        REQUIRE(pred.w / pred.h == Catch::Approx(init.w / init.h).epsilon(1e-12));
    }
}

TEST_CASE("trajectories are deterministic") {
    SynthOptions opt;
    opt.frames = 12;
    opt.seed = 39;
    const SequenceData seq = make_synthetic_sequence(opt);
    const NetModel model = testutil::identity_model();

    std::vector<Rect> a, b;
    for (std::vector<Rect>* out : {&a, &b}) {
        TrackerState st =
            tracker_init(seq.frames[0], seq.ground_truth[0], model, TrackerConfig{});
        for (int f = 1; f < seq.length(); ++f) out->push_back(tracker_step(st, seq.frames[f]));
    }
    for (size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].x == b[i].x);
        REQUIRE(a[i].y == b[i].y);
        REQUIRE(a[i].w == b[i].w);
        REQUIRE(a[i].h == b[i].h);
    }
}
