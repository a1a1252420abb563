#pragma once

#include <unsupported/Eigen/FFT>

#include <cmath>

#include "cfkit/types.hpp"

// Real 2-D circular signal algebra. DFT convention: unnormalized forward,
// 1/m^2 on the inverse, so <a,b> = (1/m^2) <ahat,bhat> with conjugation on
// the first argument.

namespace cfkit {

namespace detail {

// Complex 2-D transform by rows then columns. Eigen's FFT is unnormalized
// forward and 1/n-scaled inverse per axis, which composes to the 1/m^2
// convention used here.
inline CGrid fft2(const CGrid& in, bool inverse) {
    const int m = static_cast<int>(in.rows());
    Eigen::FFT<double> fft;
    CGrid tmp(m, m), out(m, m);
    Eigen::VectorXcd line(m), res(m);
    for (int r = 0; r < m; ++r) {
        line = in.row(r).matrix().transpose();
        if (inverse)
            fft.inv(res, line);
        else
            fft.fwd(res, line);
        tmp.row(r) = res.transpose().array();
    }
    for (int c = 0; c < m; ++c) {
        line = tmp.col(c).matrix();
        if (inverse)
            fft.inv(res, line);
        else
            fft.fwd(res, line);
        out.col(c) = res.array();
    }
    return out;
}

}  // namespace detail

inline Spectrum dft2(const Plane& p) {
    if (!p.finite()) throw NonFiniteEvaluation("dft2 input has non-finite entries");
    return Spectrum(detail::fft2(p.data.cast<Complex>(), /*inverse=*/false));
}

/// Inverse transform back to a real Plane. The spectrum must be (numerically)
/// conjugate-symmetric; a residual imaginary part above 1e-9 * max|s| is an error.
inline Plane idft2(const Spectrum& s) {
    const CGrid inv = detail::fft2(s.data, /*inverse=*/true);
    const double scale = s.data.abs().maxCoeff();
    const double residue = inv.imag().abs().maxCoeff();
    if (residue > 1e-9 * scale)
        throw NonSymmetricSpectrum("idft2: imaginary residue " + std::to_string(residue) +
                                   " exceeds 1e-9 * " + std::to_string(scale));
    return Plane(inv.real());
}

inline void require_same_side(const Plane& a, const Plane& b, const char* op) {
    if (a.side() != b.side()) throw ShapeMismatch(std::string(op) + ": sides differ");
}

/// Circular cross-correlation (a ⋆ b)[u] = sum_t a[t] b[(u+t) mod m].
inline Plane circ_xcorr(const Plane& a, const Plane& b) {
    require_same_side(a, b, "circ_xcorr");
    const Spectrum ah = dft2(a), bh = dft2(b);
    return idft2(Spectrum(CGrid(ah.data.conjugate() * bh.data)));
}

/// Circular convolution (a * b)[u] = sum_t a[t] b[(u-t) mod m].
inline Plane circ_conv(const Plane& a, const Plane& b) {
    require_same_side(a, b, "circ_conv");
    const Spectrum ah = dft2(a), bh = dft2(b);
    return idft2(Spectrum(CGrid(ah.data * bh.data)));
}

/// Dirac delta: 1 at (0,0), 0 elsewhere.
inline Plane impulse(int m) {
    Plane p(m);
    p.data(0, 0) = 1.0;
    return p;
}

/// Circularly wrapped Gaussian, peak value 1 at the origin. Distances are
/// taken modulo m so the response is periodic.
inline Plane gaussian_response(int m, double sigma) {
    if (!(sigma > 0.0)) throw InvalidSigma("gaussian_response: sigma must be positive");
    Plane p(m);
    for (int r = 0; r < m; ++r) {
        const double dr = std::min(r, m - r);
        for (int c = 0; c < m; ++c) {
            const double dc = std::min(c, m - c);
            p.data(r, c) = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
        }
    }
    return p;
}

/// Separable symmetric Hann window, w1d[t] = 0.5 (1 - cos(2 pi t / (m-1))).
inline Plane hann_window(int m) {
    Plane::check_side(m);
    Eigen::ArrayXd w1(m);
    for (int t = 0; t < m; ++t)
        w1[t] = 0.5 * (1.0 - std::cos(2.0 * M_PI * t / (m - 1)));
    Plane p(m);
    p.data = (w1.matrix() * w1.matrix().transpose()).array();
    return p;
}

}  // namespace cfkit
