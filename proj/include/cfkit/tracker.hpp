#pragma once

#include "cfkit/image.hpp"
#include "cfkit/net.hpp"

// Online tracking loop: search-window extraction at a small scale pyramid,
// score-map normalization with an additive cosine penalty, off-scale damping,
// argmax position/scale update, and a moving-average template.

namespace cfkit {

struct TrackerConfig {
    double scale_step = 1.0575;
    double scale_penalty = 0.9780;
    double scale_lr = 0.520;
    double win_weight = 0.2625;
    double template_lr = 0.0050;
    double search_area_factor = 4.0;  // search side = factor/2 × exemplar side
    int num_scales = 3;

    void validate() const {
        if (!(scale_step > 1.0)) throw InvalidRange("scale_step must be > 1");
        if (!(scale_penalty > 0.0 && scale_penalty <= 1.0))
            throw InvalidRange("scale_penalty must be in (0, 1]");
        if (scale_lr < 0.0 || scale_lr > 1.0) throw InvalidRange("scale_lr must be in [0, 1]");
        if (win_weight < 0.0 || win_weight > 1.0)
            throw InvalidRange("win_weight must be in [0, 1]");
        if (template_lr < 0.0 || template_lr > 1.0)
            throw InvalidRange("template_lr must be in [0, 1]");
        if (num_scales < 1 || num_scales % 2 == 0)
            throw InvalidRange("num_scales must be odd and >= 1");
        if (!(search_area_factor > 0.0)) throw InvalidRange("search_area_factor must be > 0");
    }
};

struct TrackerState {
    bool initialized = false;
    double cx = 0, cy = 0;
    double scale = 1.0;
    double base_w = 0, base_h = 0;
    double exemplar_base_px = 0;  // context-padded exemplar side at scale 1
    double search_base_px = 0;
    MultiChannelMap tmpl;  // cropped CF template, moving average
    NetModel model;
    TrackerConfig cfg;

    TrackerState(NetModel m, TrackerConfig c) : model(std::move(m)), cfg(c) {}
};

namespace detail {

inline MultiChannelMap features_of_patch(const NetModel& model, const Plane& patch) {
    auto [feats, cache] = conv_forward(MultiChannelMap(std::vector<Plane>{patch}), model.feat);
    return feats;
}

inline MultiChannelMap template_from_patch(const NetModel& model, const Plane& patch) {
    const MultiChannelMap xw = apply_window(features_of_patch(model, patch), model.cf.window);
    MultiChannelMap w;
    if (model.constant_alpha) {
        auto [wi, cache] = const_alpha_forward(xw, ConstantAlpha{model.alpha});
        w = std::move(wi);
    } else {
        auto [wi, cache] = cf_forward(xw, model.cf);
        w = std::move(wi);
    }
    return crop_template(w, model.cf.crop_margin);
}

/// Periodic raised-cosine penalty window, peak 1 exactly at (center, center),
/// normalized to sum 1.
inline Grid score_window(int side, int center) {
    Grid w(side, side);
    Eigen::ArrayXd u(side);
    for (int t = 0; t < side; ++t)
        u[t] = 0.5 * (1.0 + std::cos(2.0 * M_PI * (t - center) / side));
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) w(r, c) = u[r] * u[c];
    w /= w.sum();
    return w;
}

}  // namespace detail

struct PeakChoice {
    int scale_index = 0;
    int row = 0;
    int col = 0;
};

/// Normalize each map (min-subtract, sum-to-one), blend with the additive
/// window, damp off-center scales, and take the global argmax. Min-subtraction
/// makes the choice invariant to a constant added to all maps.
inline PeakChoice select_peak(const std::vector<Grid>& maps, const Grid& window,
                              double win_weight, double scale_penalty, int center_scale) {
    PeakChoice best;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < static_cast<int>(maps.size()); ++s) {
        Grid m = maps[static_cast<size_t>(s)] - maps[static_cast<size_t>(s)].minCoeff();
        const double total = m.sum();
        if (total > 0.0) m /= total;
        m = (1.0 - win_weight) * m + win_weight * window;
        if (s != center_scale) m *= scale_penalty;
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c)
                if (m(r, c) > best_value) {
                    best_value = m(r, c);
                    best = PeakChoice{s, r, c};
                }
    }
    return best;
}

inline TrackerState tracker_init(const Image& frame, const Rect& rect, const NetModel& model,
                                 const TrackerConfig& cfg) {
    rect.require_positive();
    cfg.validate();
    TrackerState st(model, cfg);
    st.cx = rect.cx();
    st.cy = rect.cy();
    st.base_w = rect.w;
    st.base_h = rect.h;
    st.scale = 1.0;
    const double p = (rect.w + rect.h) / 4.0;
    st.exemplar_base_px = std::sqrt((rect.w + 2.0 * p) * (rect.h + 2.0 * p));
    st.search_base_px = st.exemplar_base_px * cfg.search_area_factor / 2.0;

    const Plane patch =
        extract_patch(frame, st.cx, st.cy, st.exemplar_base_px, model.geom.exemplar_px());
    st.tmpl = detail::template_from_patch(st.model, patch);
    st.initialized = true;
    return st;
}

inline Rect tracker_step(TrackerState& st, const Image& frame) {
    if (!st.initialized) throw UninitializedState("tracker_step before tracker_init");
    const NetGeometry& geom = st.model.geom;
    const int M = geom.search_feature_side();
    const int ns = st.cfg.num_scales;
    const int center_scale = ns / 2;

    std::vector<Grid> maps;
    std::vector<double> patch_sides;
    maps.reserve(static_cast<size_t>(ns));
    for (int i = 0; i < ns; ++i) {
        const double factor = std::pow(st.cfg.scale_step, i - center_scale);
        const double side = st.search_base_px * st.scale * factor;
        patch_sides.push_back(side);
        const Plane patch = extract_patch(frame, st.cx, st.cy, side, geom.search_px());
        const MultiChannelMap zfeat = detail::features_of_patch(st.model, patch);
        auto [resp, cache] = score(st.tmpl, zfeat, st.model.cal);
        maps.push_back(std::move(resp.data));
    }

    const Grid window = detail::score_window(M, zero);
    const PeakChoice peak =
        select_peak(maps, window, st.cfg.win_weight, st.cfg.scale_penalty, center_scale);

    // wrapped displacement in feature cells, then pixels in the frame
    int dr = ((peak.row - zero) % M + M) % M;
    int dc = ((peak.col - zero) % M + M) % M;
    if (dr > M / 2) dr -= M;
    if (dc > M / 2) dc -= M;
    const double px_per_cell =
        patch_sides[static_cast<size_t>(peak.scale_index)] / geom.search_px() * geom.stride;
    st.cx += dc * px_per_cell;
    st.cy += dr * px_per_cell;

    const double chosen =
        st.scale * std::pow(st.cfg.scale_step, peak.scale_index - center_scale);
    st.scale = (1.0 - st.cfg.scale_lr) * st.scale + st.cfg.scale_lr * chosen;

    if (st.cfg.template_lr > 0.0) {
        const Plane patch = extract_patch(frame, st.cx, st.cy,
                                          st.exemplar_base_px * st.scale,
                                          geom.exemplar_px());
        const MultiChannelMap fresh = detail::template_from_patch(st.model, patch);
        for (int p = 0; p < st.tmpl.k(); ++p)
            st.tmpl[p].data = (1.0 - st.cfg.template_lr) * st.tmpl[p].data +
                              st.cfg.template_lr * fresh[p].data;
    }

    const double w = st.base_w * st.scale;
    const double h = st.base_h * st.scale;
    return Rect{st.cx - w / 2.0, st.cy - h / 2.0, w, h};
}

}  // namespace cfkit
