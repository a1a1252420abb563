#pragma once

#include <optional>

#include "cfkit/cf.hpp"
#include "cfkit/rng.hpp"

// Minimal end-to-end differentiable pipeline:
//   conv+ReLU -> cosine window -> CF solve -> crop -> scored cross-correlation
//   -> element-wise logistic loss,
// with a constant-dual variant and an optional learned response target.

namespace cfkit {

// ---- feature layer -------------------------------------------------------

struct FeatureNetParams {
    int in_channels = 1;
    int out_channels = 1;
    int kernel_size = 3;  // odd
    int stride = 1;
    std::vector<Grid> kernels;  // out*in entries of kernel_size^2, index [o*in + i]
    Eigen::VectorXd biases;     // out

    const Grid& kernel(int o, int i) const {
        return kernels[static_cast<size_t>(o) * in_channels + i];
    }
    Grid& kernel(int o, int i) { return kernels[static_cast<size_t>(o) * in_channels + i]; }

    int feature_side(int image_side) const {
        return (image_side - kernel_size) / stride + 1;
    }
};

/// Uniform init in ±sqrt(6 / (fan_in + fan_out)); biases start at zero.
inline FeatureNetParams init_feature_net(int in_ch, int out_ch, int kernel, int stride,
                                         Rng& rng) {
    if (kernel % 2 == 0) throw ShapeMismatch("init_feature_net: kernel size must be odd");
    FeatureNetParams p;
    p.in_channels = in_ch;
    p.out_channels = out_ch;
    p.kernel_size = kernel;
    p.stride = stride;
    const double fan_in = double(in_ch) * kernel * kernel;
    const double fan_out = double(out_ch) * kernel * kernel;
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    p.kernels.resize(static_cast<size_t>(in_ch) * out_ch);
    for (Grid& k : p.kernels) {
        k = Grid(kernel, kernel);
        for (int r = 0; r < kernel; ++r)
            for (int c = 0; c < kernel; ++c) k(r, c) = rng.uniform(-bound, bound);
    }
    p.biases = Eigen::VectorXd::Zero(out_ch);
    return p;
}

struct ConvCache {
    MultiChannelMap input;
    MultiChannelMap pre;  // pre-activations, for the ReLU mask
};

/// Valid-region cross-correlation plus bias, then ReLU.
inline std::pair<MultiChannelMap, ConvCache> conv_forward(const MultiChannelMap& img,
                                                          const FeatureNetParams& p) {
    if (img.k() != p.in_channels) throw ShapeMismatch("conv_forward: channel count");
    if (img.side() < p.kernel_size) throw ShapeMismatch("conv_forward: image smaller than kernel");
    const int out_side = p.feature_side(img.side());
    const int r = p.kernel_size, s = p.stride;

    MultiChannelMap pre(p.out_channels, out_side);
    for (int o = 0; o < p.out_channels; ++o) {
        Grid& dst = pre[o].data;
        dst.setConstant(p.biases[o]);
        for (int ic = 0; ic < p.in_channels; ++ic) {
            const Grid& src = img[ic].data;
            const Grid& ker = p.kernel(o, ic);
            for (int i = 0; i < out_side; ++i)
                for (int j = 0; j < out_side; ++j) {
                    double acc = 0.0;
                    for (int a = 0; a < r; ++a)
                        for (int b = 0; b < r; ++b)
                            acc += ker(a, b) * src(i * s + a, j * s + b);
                    dst(i, j) += acc;
                }
        }
    }

    MultiChannelMap out = pre;
    for (int o = 0; o < p.out_channels; ++o) out[o].data = out[o].data.max(0.0);
    return {std::move(out), ConvCache{img, std::move(pre)}};
}

struct FeatureNetGrads {
    std::vector<Grid> kernels;
    Eigen::VectorXd biases;

    static FeatureNetGrads zeros(const FeatureNetParams& p) {
        FeatureNetGrads g;
        g.kernels.assign(p.kernels.size(), Grid::Zero(p.kernel_size, p.kernel_size));
        g.biases = Eigen::VectorXd::Zero(p.out_channels);
        return g;
    }
    void add(const FeatureNetGrads& o) {
        for (size_t i = 0; i < kernels.size(); ++i) kernels[i] += o.kernels[i];
        biases += o.biases;
    }
    void scale(double a) {
        for (Grid& k : kernels) k *= a;
        biases *= a;
    }
};

/// ReLU' at exactly zero is taken as zero.
inline std::pair<MultiChannelMap, FeatureNetGrads> conv_backward(const ConvCache& cache,
                                                                 const FeatureNetParams& p,
                                                                 const MultiChannelMap& grad_out) {
    const int out_side = grad_out.side();
    if (grad_out.k() != p.out_channels || cache.pre.side() != out_side)
        throw StaleCache("conv_backward: cache/grad mismatch");
    const int r = p.kernel_size, s = p.stride;

    FeatureNetGrads grads = FeatureNetGrads::zeros(p);
    MultiChannelMap grad_in(p.in_channels, cache.input.side());

    for (int o = 0; o < p.out_channels; ++o) {
        const Grid masked =
            (cache.pre[o].data > 0.0).select(grad_out[o].data, Grid::Zero(out_side, out_side));
        grads.biases[o] = masked.sum();
        for (int ic = 0; ic < p.in_channels; ++ic) {
            const Grid& src = cache.input[ic].data;
            Grid& gker = grads.kernels[static_cast<size_t>(o) * p.in_channels + ic];
            const Grid& ker = p.kernel(o, ic);
            Grid& gin = grad_in[ic].data;
            for (int i = 0; i < out_side; ++i)
                for (int j = 0; j < out_side; ++j) {
                    const double gm = masked(i, j);
                    if (gm == 0.0) continue;
                    for (int a = 0; a < r; ++a)
                        for (int b = 0; b < r; ++b) {
                            gker(a, b) += gm * src(i * s + a, j * s + b);
                            gin(i * s + a, j * s + b) += gm * ker(a, b);
                        }
                }
        }
    }
    return {std::move(grad_in), std::move(grads)};
}

// ---- loss ------------------------------------------------------------------

struct LabelMap {
    Grid labels;   // values in {-1, +1}
    Grid weights;  // nonnegative, sums to 1

    int side() const { return static_cast<int>(labels.rows()); }
};

/// Positive disc of the given radius (wrapped distance) at (center_r, center_c);
/// each class receives total weight 1/2, split uniformly within the class.
inline LabelMap make_label_map(int side, int center_r, int center_c, int radius) {
    LabelMap lm;
    lm.labels = Grid::Constant(side, side, -1.0);
    lm.weights = Grid::Zero(side, side);
    long n_pos = 0;
    for (int r = 0; r < side; ++r) {
        const int dr = std::min(((r - center_r) % side + side) % side,
                                ((center_r - r) % side + side) % side);
        for (int c = 0; c < side; ++c) {
            const int dc = std::min(((c - center_c) % side + side) % side,
                                    ((center_c - c) % side + side) % side);
            if (dr * dr + dc * dc <= radius * radius) {
                lm.labels(r, c) = 1.0;
                ++n_pos;
            }
        }
    }
    const long n_neg = static_cast<long>(side) * side - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw InvalidRange("make_label_map: need both positive and negative labels");
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c)
            lm.weights(r, c) = lm.labels(r, c) > 0 ? 0.5 / n_pos : 0.5 / n_neg;
    return lm;
}

/// Weighted element-wise logistic loss and its response gradient.
inline std::pair<double, Plane> logistic_loss(const Plane& response, const LabelMap& lm) {
    if (response.side() != lm.side()) throw ShapeMismatch("logistic_loss: sides differ");
    const int m = response.side();
    double loss = 0.0;
    Plane grad(m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
            const double t = lm.labels(r, c) * response.data(r, c);
            // log(1 + exp(-t)), stable for |t| up to ~1e3 and beyond
            const double softplus = t >= 0.0 ? std::log1p(std::exp(-t))
                                             : -t + std::log1p(std::exp(t));
            loss += lm.weights(r, c) * softplus;
            grad.data(r, c) = -lm.weights(r, c) * lm.labels(r, c) / (1.0 + std::exp(t));
        }
    return {loss, std::move(grad)};
}

// ---- model -----------------------------------------------------------------

/// Patch geometry shared by training and tracking: a search window twice the
/// exemplar window, in pixels and in samples, so both are sampled at the same
/// resolution.
struct NetGeometry {
    int feature_side = 16;  // exemplar feature side m
    int kernel_size = 3;
    int stride = 1;

    int exemplar_px() const { return (feature_side - 1) * stride + kernel_size; }
    int search_px() const { return 2 * exemplar_px(); }
    int search_feature_side() const { return (search_px() - kernel_size) / stride + 1; }
    // Zero displacement maps to the wrapped origin of the response; that needs
    // the exemplar and search feature grids to share cell alignment.
    void check_alignment() const {
        if ((search_feature_side() - feature_side) % 2 != 0)
            throw ShapeMismatch("NetGeometry: misaligned search grid");
    }
    int label_radius() const { return std::max(1, feature_side / 8); }
};

struct TrainPair {
    Plane exemplar;  // object-centered crop, exemplar_px
    Plane search;    // larger context, search_px
    LabelMap labels; // side = search feature side
};

struct NetModel {
    NetGeometry geom;
    FeatureNetParams feat;
    ScoreCalibration cal;
    CFConfig cf;
    bool learn_y = false;
    bool constant_alpha = false;
    Plane alpha;  // present iff constant_alpha

    NetModel(NetGeometry g, FeatureNetParams f, CFConfig c)
        : geom(g), feat(std::move(f)), cal{1e-3, 0.0}, cf(std::move(c)) {
        if (cf.m != geom.feature_side)
            throw ShapeMismatch("NetModel: CF side differs from feature side");
        geom.check_alignment();
    }
};

/// Fresh depth-1 model with seeded init.
inline NetModel make_model(const NetGeometry& geom, int channels, double lambda,
                           int crop_margin, Rng& rng) {
    FeatureNetParams feat =
        init_feature_net(1, channels, geom.kernel_size, geom.stride, rng);
    CFConfig cf = make_cf_config(geom.feature_side, lambda, crop_margin);
    return NetModel(geom, std::move(feat), std::move(cf));
}

// ---- full pipeline ----------------------------------------------------------

struct PipelineCaches {
    ConvCache xconv;
    ConvCache zconv;
    CFCache cf;
    ConstAlphaCache const_alpha;
    ScoreCache score;
    Plane grad_response;
    double loss = 0.0;
};

inline std::pair<double, PipelineCaches> forward_loss(const TrainPair& pair,
                                                      const NetModel& model) {
    PipelineCaches caches;

    auto [xfeat, xconv] = conv_forward(
        MultiChannelMap(std::vector<Plane>{pair.exemplar}), model.feat);
    caches.xconv = std::move(xconv);
    const MultiChannelMap xw = apply_window(xfeat, model.cf.window);

    MultiChannelMap w;
    if (model.constant_alpha) {
        auto [wi, ci] = const_alpha_forward(xw, ConstantAlpha{model.alpha});
        w = std::move(wi);
        caches.const_alpha = std::move(ci);
    } else {
        auto [wi, ci] = cf_forward(xw, model.cf);
        w = std::move(wi);
        caches.cf = std::move(ci);
    }
    const MultiChannelMap wc = crop_template(w, model.cf.crop_margin);

    auto [zfeat, zconv] = conv_forward(
        MultiChannelMap(std::vector<Plane>{pair.search}), model.feat);
    caches.zconv = std::move(zconv);

    auto [response, scache] = score(wc, zfeat, model.cal);
    caches.score = std::move(scache);

    auto [loss, grad_resp] = logistic_loss(response, pair.labels);
    caches.grad_response = std::move(grad_resp);
    caches.loss = loss;
    return {loss, std::move(caches)};
}

struct NetGrads {
    FeatureNetGrads feat;
    double s = 0.0;
    double b = 0.0;
    Plane y;      // populated iff learn_y
    Plane alpha;  // populated iff constant_alpha

    void add(const NetGrads& o) {
        feat.add(o.feat);
        s += o.s;
        b += o.b;
        if (y.side() && o.y.side()) y.data += o.y.data;
        if (alpha.side() && o.alpha.side()) alpha.data += o.alpha.data;
    }
    void scale(double a) {
        feat.scale(a);
        s *= a;
        b *= a;
        if (y.side()) y.data *= a;
        if (alpha.side()) alpha.data *= a;
    }
};

inline NetGrads backward_loss(const PipelineCaches& caches, const NetModel& model) {
    NetGrads grads;
    grads.feat = FeatureNetGrads::zeros(model.feat);

    const ScoreGradients sg = score_backward(caches.score, model.cal, caches.grad_response);
    grads.s = sg.grad_s;
    grads.b = sg.grad_b;

    auto [grad_zin, zfg] = conv_backward(caches.zconv, model.feat, sg.grad_z);
    grads.feat.add(zfg);

    const MultiChannelMap grad_w = crop_template_backward(
        sg.grad_w, model.geom.feature_side, model.cf.crop_margin);

    MultiChannelMap grad_xw;
    if (model.constant_alpha) {
        ConstAlphaGradients cg = const_alpha_backward(caches.const_alpha, grad_w);
        grad_xw = std::move(cg.grad_x);
        grads.alpha = std::move(cg.grad_alpha);
    } else {
        CFGradients cg = cf_backward(caches.cf, model.cf, grad_w);
        grad_xw = std::move(cg.grad_x);
        if (model.learn_y) grads.y = std::move(cg.grad_y);
    }

    const MultiChannelMap grad_xfeat = apply_window_backward(grad_xw, model.cf.window);
    auto [grad_xin, xfg] = conv_backward(caches.xconv, model.feat, grad_xfeat);
    grads.feat.add(xfg);
    return grads;
}

// ---- training ----------------------------------------------------------------

struct TrainOptions {
    int epochs = 100;
    int batch_size = 8;
    double lr = 1e-2;
    double lr_decay = 0.99;  // geometric, per epoch
    uint64_t seed = 0;
};

inline void apply_update(NetModel& model, const NetGrads& g, double lr) {
    for (size_t i = 0; i < model.feat.kernels.size(); ++i)
        model.feat.kernels[i] -= lr * g.feat.kernels[i];
    model.feat.biases -= lr * g.feat.biases;
    model.cal.s -= lr * g.s;
    model.cal.b -= lr * g.b;
    if (model.learn_y && g.y.side()) model.cf.response.data -= lr * g.y.data;
    if (model.constant_alpha && g.alpha.side()) model.alpha.data -= lr * g.alpha.data;
}

/// Warm start for the constant-dual variant: take the ridge solution's dual
/// signal on one exemplar as the initial parameter.
inline void warm_start_alpha(NetModel& model, const TrainPair& pair) {
    auto [xfeat, xconv] = conv_forward(
        MultiChannelMap(std::vector<Plane>{pair.exemplar}), model.feat);
    const MultiChannelMap xw = apply_window(xfeat, model.cf.window);
    const auto [w, cache] = cf_forward(xw, model.cf);
    model.alpha = idft2(cache.alphahat);
}

/// Plain SGD over shuffled mini-batches. Returns the per-epoch mean loss,
/// accumulated in dataset index order so the trace is deterministic.
inline std::vector<double> sgd_train(NetModel& model, const std::vector<TrainPair>& dataset,
                                     const TrainOptions& opts) {
    if (dataset.empty()) throw EmptyInput("sgd_train: empty dataset");
    if (model.constant_alpha && model.alpha.side() == 0)
        warm_start_alpha(model, dataset.front());

    Rng rng(opts.seed);
    const size_t n = dataset.size();
    std::vector<int> order(n);
    std::vector<double> example_loss(n, 0.0);
    std::vector<double> trace;
    trace.reserve(static_cast<size_t>(opts.epochs));
    double lr = opts.lr;

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
        rng.shuffle(order);

        for (size_t start = 0; start < n; start += static_cast<size_t>(opts.batch_size)) {
            const size_t stop = std::min(n, start + static_cast<size_t>(opts.batch_size));
            NetGrads batch;
            batch.feat = FeatureNetGrads::zeros(model.feat);
            if (model.learn_y) batch.y = Plane(model.cf.m);
            if (model.constant_alpha) batch.alpha = Plane(model.cf.m);

            for (size_t i = start; i < stop; ++i) {
                const TrainPair& pair = dataset[static_cast<size_t>(order[i])];
                auto [loss, caches] = forward_loss(pair, model);
                if (!std::isfinite(loss)) throw DivergedLoss("sgd_train: non-finite loss");
                example_loss[static_cast<size_t>(order[i])] = loss;
                batch.add(backward_loss(caches, model));
            }
            batch.scale(1.0 / double(stop - start));
            apply_update(model, batch, lr);
        }

        double epoch_loss = 0.0;
        for (double l : example_loss) epoch_loss += l;
        trace.push_back(epoch_loss / double(n));
        lr *= opts.lr_decay;
    }
    return trace;
}

}  // namespace cfkit
