#pragma once

#include "cfkit/image.hpp"
#include "cfkit/net.hpp"
#include "cfkit/rng.hpp"
#include "cfkit/sequence.hpp"

// Procedural tracking world: one textured patch drifting over a textured
// background by an axis-aligned random walk, with an optional second patch of
// identical texture orbiting nearby. Deterministic in the seed.

namespace cfkit {

struct SynthOptions {
    int frames = 60;
    int frame_w = 96;
    int frame_h = 96;
    int object_side = 9;
    double step_px = 2.0;    // per-frame drift magnitude
    bool distractors = false;
    int hold_min = 6;        // frames a velocity direction persists
    int hold_max = 14;
    uint64_t seed = 0;
};

namespace detail {

inline Grid noise_texture(int rows, int cols, double lo, double hi, Rng& rng) {
    Grid g(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) g(r, c) = rng.uniform(lo, hi);
    return g;
}

inline void stamp(Image& frame, const Grid& texture, int x0, int y0) {
    for (int r = 0; r < texture.rows(); ++r) {
        const int fr = y0 + r;
        if (fr < 0 || fr >= frame.height) continue;
        for (int c = 0; c < texture.cols(); ++c) {
            const int fc = x0 + c;
            if (fc < 0 || fc >= frame.width) continue;
            frame.at(fr, fc) = texture(r, c);
        }
    }
}

}  // namespace detail

inline SequenceData make_synthetic_sequence(const SynthOptions& opt) {
    Rng rng(opt.seed);
    const int osz = opt.object_side;
    const int margin = std::max(16, osz);
    const int lo_x = margin, hi_x = opt.frame_w - margin - osz;
    const int lo_y = margin, hi_y = opt.frame_h - margin - osz;
    if (hi_x <= lo_x || hi_y <= lo_y)
        throw InvalidRange("make_synthetic_sequence: frame too small for the object");

    const Grid background =
        detail::noise_texture(opt.frame_h, opt.frame_w, 0.05, 0.45, rng);
    const Grid texture = detail::noise_texture(osz, osz, 0.55, 1.0, rng);

    int x = lo_x + rng.uniform_int(hi_x - lo_x + 1);
    int y = lo_y + rng.uniform_int(hi_y - lo_y + 1);

    const int step = static_cast<int>(std::lround(opt.step_px));
    const auto draw_velocity = [&]() -> std::pair<int, int> {
        if (step == 0) return {0, 0};
        switch (rng.uniform_int(4)) {
            case 0: return {step, 0};
            case 1: return {-step, 0};
            case 2: return {0, step};
            default: return {0, -step};
        }
    };
    auto [vx, vy] = draw_velocity();
    int hold = opt.hold_min + rng.uniform_int(opt.hold_max - opt.hold_min + 1);

    // distractor orbit: polar offset from the target, random-walked
    double orbit_angle = rng.uniform(0.0, 2.0 * M_PI);
    double orbit_radius = rng.uniform(16.0, 26.0);

    SequenceData seq;
    seq.frames.reserve(static_cast<size_t>(opt.frames));
    seq.ground_truth.reserve(static_cast<size_t>(opt.frames));

    for (int f = 0; f < opt.frames; ++f) {
        Image frame(opt.frame_w, opt.frame_h);
        for (int r = 0; r < opt.frame_h; ++r)
            for (int c = 0; c < opt.frame_w; ++c) frame.at(r, c) = background(r, c);

        if (opt.distractors) {
            orbit_angle += rng.uniform(-0.35, 0.35);
            orbit_radius = std::clamp(orbit_radius + rng.uniform(-1.5, 1.5), 16.0, 26.0);
            const int dx = x + static_cast<int>(std::lround(orbit_radius * std::cos(orbit_angle)));
            const int dy = y + static_cast<int>(std::lround(orbit_radius * std::sin(orbit_angle)));
            detail::stamp(frame, texture, dx, dy);  // identical texture
        }
        detail::stamp(frame, texture, x, y);

        seq.frames.push_back(std::move(frame));
        seq.ground_truth.push_back(Rect{double(x), double(y), double(osz), double(osz)});

        if (--hold <= 0) {
            std::tie(vx, vy) = draw_velocity();
            hold = opt.hold_min + rng.uniform_int(opt.hold_max - opt.hold_min + 1);
        }
        if (x + vx < lo_x || x + vx > hi_x) vx = -vx;
        if (y + vy < lo_y || y + vy > hi_y) vy = -vy;
        x += vx;
        y += vy;
    }
    return seq;
}

/// Context-padded exemplar side for a rect: sqrt((w+2p)(h+2p)) with p=(w+h)/4.
inline double exemplar_side_px(const Rect& r) {
    const double p = (r.w + r.h) / 4.0;
    return std::sqrt((r.w + 2.0 * p) * (r.h + 2.0 * p));
}

/// Build training pairs from consecutive frames of an annotated sequence:
/// exemplar centred on the object in frame t, search centred at the same spot
/// in frame t+1, labels at the inter-frame displacement.
inline std::vector<TrainPair> make_pairs_from_sequence(const SequenceData& seq,
                                                       const NetGeometry& geom) {
    if (seq.length() < 2) throw EmptyInput("make_pairs_from_sequence: need >= 2 frames");
    geom.check_alignment();
    const int M = geom.search_feature_side();
    const int radius = geom.label_radius();

    std::vector<TrainPair> pairs;
    pairs.reserve(static_cast<size_t>(seq.length() - 1));
    for (int t = 0; t + 1 < seq.length(); ++t) {
        const Rect& a = seq.ground_truth[static_cast<size_t>(t)];
        const Rect& b = seq.ground_truth[static_cast<size_t>(t + 1)];
        const double E = exemplar_side_px(a);
        const double S = 2.0 * E;

        TrainPair pair{
            extract_patch(seq.frames[static_cast<size_t>(t)], a.cx(), a.cy(), E,
                          geom.exemplar_px()),
            extract_patch(seq.frames[static_cast<size_t>(t + 1)], a.cx(), a.cy(), S,
                          geom.search_px()),
            LabelMap{}};

        // zero displacement sits at the wrapped origin of the response
        const double to_feat = (double(geom.search_px()) / S) / geom.stride;
        const int dr = static_cast<int>(std::lround((b.cy() - a.cy()) * to_feat));
        const int dc = static_cast<int>(std::lround((b.cx() - a.cx()) * to_feat));
        pair.labels = make_label_map(M, (dr % M + M) % M, (dc % M + M) % M, radius);
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

/// `count` training pairs from a seeded random-walk sequence.
inline std::vector<TrainPair> make_synthetic_dataset(int count, int feature_side,
                                                     uint64_t seed, bool distractors = false) {
    if (count < 1) throw InvalidRange("make_synthetic_dataset: count must be >= 1");
    SynthOptions opt;
    opt.frames = count + 1;
    opt.distractors = distractors;
    opt.seed = seed;
    NetGeometry geom;
    geom.feature_side = feature_side;
    return make_pairs_from_sequence(make_synthetic_sequence(opt), geom);
}

}  // namespace cfkit
