#pragma once

#include <vector>

#include "cfkit/spectral.hpp"

// Correlation Filter layer. The template w for a (windowed) multi-channel
// feature map x is the ridge-regression solution computed element-wise in the
// Fourier domain:
//
//   khat     = (1/n) sum_p conj(xhat_p) . xhat_p + lambda
//   alphahat = (1/n) yhat / khat
//   what_p   = conj(alphahat) . xhat_p
//
// with n = m^2. The backward pass is the adjoint of the differential of this
// system, also element-wise in the Fourier domain:
//
//   ghat_alpha = sum_p xhat_p . conj(ghat_w_p)
//   ghat_y     = (1/n) ghat_alpha / conj(khat)
//   ghat_k     = - conj(alphahat) . ghat_alpha / conj(khat)
//   ghat_x_p   = alphahat . ghat_w_p + (2/n) xhat_p . Re{ghat_k}

namespace cfkit {

constexpr double kMinLambda = 1e-8;

struct CFConfig {
    double lambda;
    int m;
    long n;              // effective example count, always m^2
    Plane response;      // desired response y
    Plane window;        // cosine window applied to features before the solve
    int crop_margin;     // samples removed from each template border

    CFConfig(int side, double lambda_, Plane response_, Plane window_, int margin)
        : lambda(lambda_),
          m(side),
          n(static_cast<long>(side) * side),
          response(std::move(response_)),
          window(std::move(window_)),
          crop_margin(margin) {
        if (lambda < kMinLambda)
            throw NonPositiveLambda("CFConfig: lambda must be >= 1e-8");
        if (response.side() != m || window.side() != m)
            throw ShapeMismatch("CFConfig: response/window side must equal m");
        if (margin < 0 || 2 * margin >= m)
            throw MarginTooLarge("CFConfig: crop margin must satisfy 0 <= margin < m/2");
    }
};

/// Defaults: Gaussian response with sigma = m/16, Hann feature window.
inline CFConfig make_cf_config(int m, double lambda, int crop_margin, double sigma = 0.0) {
    if (sigma <= 0.0) sigma = m / 16.0;
    return CFConfig(m, lambda, gaussian_response(m, sigma), hann_window(m), crop_margin);
}

/// Spectra saved by the forward solve for reuse in the backward pass.
struct CFCache {
    int m = 0;
    long n = 0;
    std::vector<Spectrum> xhat;  // per channel
    Spectrum khat;
    Spectrum alphahat;
};

struct CFGradients {
    MultiChannelMap grad_x;
    Plane grad_y;
};

struct ScoreCalibration {
    double s = 1.0;
    double b = 0.0;
};

inline std::pair<MultiChannelMap, CFCache> cf_forward(const MultiChannelMap& x,
                                                      const CFConfig& cfg) {
    if (x.side() != cfg.m) throw ShapeMismatch("cf_forward: input side != cfg.m");
    const int k = x.k();
    const double inv_n = 1.0 / static_cast<double>(cfg.n);

    CFCache cache;
    cache.m = cfg.m;
    cache.n = cfg.n;
    cache.xhat.reserve(static_cast<size_t>(k));

    CGrid khat = CGrid::Constant(cfg.m, cfg.m, Complex(cfg.lambda, 0.0));
    for (int p = 0; p < k; ++p) {
        cache.xhat.push_back(dft2(x[p]));
        const CGrid& xh = cache.xhat.back().data;
        khat += inv_n * (xh.conjugate() * xh);
    }

    const Spectrum yhat = dft2(cfg.response);
    const CGrid alphahat = inv_n * yhat.data / khat;

    std::vector<Plane> w;
    w.reserve(static_cast<size_t>(k));
    for (int p = 0; p < k; ++p)
        w.push_back(idft2(Spectrum(CGrid(alphahat.conjugate() * cache.xhat[p].data))));

    cache.khat = Spectrum(std::move(khat));
    cache.alphahat = Spectrum(std::move(alphahat));
    return {MultiChannelMap(std::move(w)), std::move(cache)};
}

inline CFGradients cf_backward(const CFCache& cache, const CFConfig& cfg,
                               const MultiChannelMap& grad_w) {
    if (cache.m == 0) throw StaleCache("cf_backward: cache not populated");
    if (cache.m != grad_w.side() || cache.m != cfg.m)
        throw StaleCache("cf_backward: cache side differs from gradient side");
    if (grad_w.k() != static_cast<int>(cache.xhat.size()))
        throw ShapeMismatch("cf_backward: channel count differs from forward");

    const int k = grad_w.k();
    const double inv_n = 1.0 / static_cast<double>(cache.n);

    std::vector<Spectrum> gwhat;
    gwhat.reserve(static_cast<size_t>(k));
    CGrid galpha = CGrid::Zero(cache.m, cache.m);
    for (int p = 0; p < k; ++p) {
        gwhat.push_back(dft2(grad_w[p]));
        galpha += cache.xhat[static_cast<size_t>(p)].data * gwhat.back().data.conjugate();
    }

    const CGrid khat_conj = cache.khat.data.conjugate();
    const CGrid gy = inv_n * galpha / khat_conj;
    const CGrid gk = -(cache.alphahat.data.conjugate() * galpha) / khat_conj;
    const Grid gk_re = gk.real();

    std::vector<Plane> gx;
    gx.reserve(static_cast<size_t>(k));
    for (int p = 0; p < k; ++p) {
        const CGrid gxp = cache.alphahat.data * gwhat[static_cast<size_t>(p)].data +
                          (2.0 * inv_n) * (cache.xhat[static_cast<size_t>(p)].data *
                                           gk_re.cast<Complex>());
        gx.push_back(idft2(Spectrum(gxp)));
    }

    return {MultiChannelMap(std::move(gx)), idft2(Spectrum(gy))};
}

/// Element-wise taper of every channel; the adjoint is the same multiplication.
inline MultiChannelMap apply_window(const MultiChannelMap& x, const Plane& window) {
    if (x.side() != window.side()) throw ShapeMismatch("apply_window: sides differ");
    std::vector<Plane> out;
    out.reserve(static_cast<size_t>(x.k()));
    for (int p = 0; p < x.k(); ++p) out.push_back(Plane(Grid(x[p].data * window.data)));
    return MultiChannelMap(std::move(out));
}

inline MultiChannelMap apply_window_backward(const MultiChannelMap& grad, const Plane& window) {
    return apply_window(grad, window);
}

/// Keep the central (m - 2*margin)^2 core of each channel. The ridge solution
/// for a center-anchored exemplar concentrates its mass at the patch center,
/// so a plain central crop keeps the template core and discards the wrap-around
/// boundary ring.
inline MultiChannelMap crop_template(const MultiChannelMap& w, int margin) {
    const int m = w.side();
    if (margin < 0 || 2 * margin >= m)
        throw MarginTooLarge("crop_template: margin must satisfy 0 <= margin < m/2");
    const int mc = m - 2 * margin;
    std::vector<Plane> out;
    out.reserve(static_cast<size_t>(w.k()));
    for (int p = 0; p < w.k(); ++p)
        out.push_back(Plane(Grid(w[p].data.block(margin, margin, mc, mc))));
    return MultiChannelMap(std::move(out));
}

/// Adjoint of crop_template: zero-pad the gradient back to m×m.
inline MultiChannelMap crop_template_backward(const MultiChannelMap& grad_cropped, int m,
                                              int margin) {
    const int mc = m - 2 * margin;
    if (grad_cropped.side() != mc)
        throw ShapeMismatch("crop_template_backward: gradient side mismatch");
    std::vector<Plane> out;
    out.reserve(static_cast<size_t>(grad_cropped.k()));
    for (int p = 0; p < grad_cropped.k(); ++p) {
        Plane gp(m);
        gp.data.block(margin, margin, mc, mc) = grad_cropped[p].data;
        out.push_back(std::move(gp));
    }
    return MultiChannelMap(std::move(out));
}

/// Zero-pad a template to a larger side, placed centrally (offset
/// floor((M-mc)/2) per axis). With this placement a template built from a
/// center-anchored exemplar yields a response whose zero-displacement peak
/// sits at the wrapped origin, independent of the crop margin. Identity when
/// the sides already match.
inline Plane pad_template(const Plane& w, int big_side) {
    const int mc = w.side();
    if (big_side < mc) throw ShapeMismatch("pad_template: target side smaller than template");
    if (big_side == mc) return w;
    Plane out(big_side);
    const int off = (big_side - mc) / 2;
    out.data.block(off, off, mc, mc) = w.data;
    return out;
}

/// Adjoint of pad_template: gather the centered block.
inline Plane pad_template_backward(const Plane& grad_big, int small_side) {
    const int M = grad_big.side();
    if (small_side > M) throw ShapeMismatch("pad_template_backward: side mismatch");
    const int off = (M - small_side) / 2;
    return Plane(Grid(grad_big.data.block(off, off, small_side, small_side)));
}

/// Intermediates of score() kept for its adjoint.
struct ScoreCache {
    int w_side = 0;
    std::vector<Spectrum> wpad_hat;  // padded template spectra, per channel
    std::vector<Spectrum> zhat;      // search feature spectra, per channel
    Plane raw;                       // sum_p (w_p ⋆ z_p), before scale and bias
};

/// response[u] = s * sum_p (w_p ⋆ z_p)[u] + b, computed circularly via spectra.
/// When z is larger than w, the template is zero-padded first.
inline std::pair<Plane, ScoreCache> score(const MultiChannelMap& w, const MultiChannelMap& z,
                                          const ScoreCalibration& cal) {
    if (w.k() != z.k()) throw ShapeMismatch("score: channel counts differ");
    if (z.side() < w.side()) throw ShapeMismatch("score: search side smaller than template");
    const int M = z.side();

    ScoreCache cache;
    cache.w_side = w.side();
    CGrid acc = CGrid::Zero(M, M);
    for (int p = 0; p < w.k(); ++p) {
        cache.wpad_hat.push_back(dft2(pad_template(w[p], M)));
        cache.zhat.push_back(dft2(z[p]));
        acc += cache.wpad_hat.back().data.conjugate() * cache.zhat.back().data;
    }
    cache.raw = idft2(Spectrum(std::move(acc)));

    Plane response(M);
    response.data = cal.s * cache.raw.data + cal.b;
    return {std::move(response), std::move(cache)};
}

struct ScoreGradients {
    MultiChannelMap grad_w;
    MultiChannelMap grad_z;
    double grad_s = 0.0;
    double grad_b = 0.0;
};

inline ScoreGradients score_backward(const ScoreCache& cache, const ScoreCalibration& cal,
                                     const Plane& grad_response) {
    if (cache.raw.side() != grad_response.side())
        throw StaleCache("score_backward: gradient side differs from cached response");
    const Spectrum ghat = dft2(grad_response);
    const int k = static_cast<int>(cache.zhat.size());

    std::vector<Plane> gw, gz;
    gw.reserve(static_cast<size_t>(k));
    gz.reserve(static_cast<size_t>(k));
    for (int p = 0; p < k; ++p) {
        const CGrid gwp = cal.s * (cache.zhat[static_cast<size_t>(p)].data *
                                   ghat.data.conjugate());
        const CGrid gzp = cal.s * (cache.wpad_hat[static_cast<size_t>(p)].data * ghat.data);
        gw.push_back(pad_template_backward(idft2(Spectrum(gwp)), cache.w_side));
        gz.push_back(idft2(Spectrum(gzp)));
    }

    ScoreGradients out{MultiChannelMap(std::move(gw)), MultiChannelMap(std::move(gz)), 0.0, 0.0};
    out.grad_s = (grad_response.data * cache.raw.data).sum();
    out.grad_b = grad_response.data.sum();
    return out;
}

// Constant dual-variable variant: w_p = alpha ⋆ x_p with alpha a fixed
// parameter instead of the per-exemplar ridge solution.

struct ConstantAlpha {
    Plane alpha;
};

struct ConstAlphaCache {
    std::vector<Spectrum> xhat;
    Spectrum alphahat;
};

inline std::pair<MultiChannelMap, ConstAlphaCache> const_alpha_forward(const MultiChannelMap& x,
                                                                       const ConstantAlpha& ca) {
    if (x.side() != ca.alpha.side())
        throw ShapeMismatch("const_alpha_forward: alpha side differs from features");
    ConstAlphaCache cache;
    cache.alphahat = dft2(ca.alpha);
    std::vector<Plane> w;
    w.reserve(static_cast<size_t>(x.k()));
    for (int p = 0; p < x.k(); ++p) {
        cache.xhat.push_back(dft2(x[p]));
        w.push_back(idft2(Spectrum(CGrid(cache.alphahat.data.conjugate() *
                                         cache.xhat.back().data))));
    }
    return {MultiChannelMap(std::move(w)), std::move(cache)};
}

struct ConstAlphaGradients {
    MultiChannelMap grad_x;
    Plane grad_alpha;
};

inline ConstAlphaGradients const_alpha_backward(const ConstAlphaCache& cache,
                                                const MultiChannelMap& grad_w) {
    if (grad_w.k() != static_cast<int>(cache.xhat.size()))
        throw StaleCache("const_alpha_backward: channel count differs from forward");
    const int m = grad_w.side();
    CGrid galpha = CGrid::Zero(m, m);
    std::vector<Plane> gx;
    gx.reserve(static_cast<size_t>(grad_w.k()));
    for (int p = 0; p < grad_w.k(); ++p) {
        const Spectrum gwhat = dft2(grad_w[p]);
        galpha += cache.xhat[static_cast<size_t>(p)].data * gwhat.data.conjugate();
        gx.push_back(idft2(Spectrum(CGrid(cache.alphahat.data * gwhat.data))));
    }
    return {MultiChannelMap(std::move(gx)), idft2(Spectrum(std::move(galpha)))};
}

}  // namespace cfkit
