#pragma once

#include <functional>

#include "cfkit/cf.hpp"
#include "cfkit/rng.hpp"

// Dense, slow, obviously-correct references for the Fourier-domain solver:
// explicit circulant matrices, a direct symmetric solve of the ridge system,
// and central-difference gradients. Everything here is O(m^4) or worse and
// guarded against large sides.

namespace cfkit {
namespace oracle {

// Fixed row-major flattening of the 2-D domain.
inline long flat_index(int r, int c, int m) { return static_cast<long>(r) * m + c; }

/// Dense matrix X with X[u, t] = x[(u + t) mod m] under row-major flattening.
/// Realizes cross-correlation: X * vec(z) = vec(z ⋆ x).
inline Eigen::MatrixXd circulant_matrix(const Plane& x) {
    const int m = x.side();
    if (m > 32) throw TooLarge("circulant_matrix: m must be <= 32");
    const long n = static_cast<long>(m) * m;
    Eigen::MatrixXd X(n, n);
    for (int ur = 0; ur < m; ++ur)
        for (int uc = 0; uc < m; ++uc)
            for (int tr = 0; tr < m; ++tr)
                for (int tc = 0; tc < m; ++tc)
                    X(flat_index(ur, uc, m), flat_index(tr, tc, m)) =
                        x.data((ur + tr) % m, (uc + tc) % m);
    return X;
}

inline Eigen::VectorXd flatten(const Plane& p) {
    const int m = p.side();
    Eigen::VectorXd v(static_cast<long>(m) * m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) v[flat_index(r, c, m)] = p.data(r, c);
    return v;
}

inline Plane unflatten(const Eigen::VectorXd& v, int m) {
    Plane p(m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) p.data(r, c) = v[flat_index(r, c, m)];
    return p;
}

/// Ridge-regression template via the dense dual system: build
/// K = (1/n) sum_p X_p^T X_p + lambda I, solve K alpha = y/n, return
/// w_p = X_p alpha.
inline MultiChannelMap direct_cf(const MultiChannelMap& x, const Plane& y, double lambda) {
    const int m = x.side();
    if (m > 16) throw TooLarge("direct_cf: m must be <= 16");
    if (y.side() != m) throw ShapeMismatch("direct_cf: y side differs from x");
    const long n = static_cast<long>(m) * m;

    std::vector<Eigen::MatrixXd> X_blocks;
    X_blocks.reserve(static_cast<size_t>(x.k()));
    Eigen::MatrixXd K = lambda * Eigen::MatrixXd::Identity(n, n);
    for (int p = 0; p < x.k(); ++p) {
        X_blocks.push_back(circulant_matrix(x[p]));
        K += (X_blocks.back().transpose() * X_blocks.back()) / static_cast<double>(n);
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
    if (ldlt.info() != Eigen::Success)
        throw SingularSystem("direct_cf: dense kernel system failed to factorize");
    const Eigen::VectorXd alpha = ldlt.solve(flatten(y) / static_cast<double>(n));

    std::vector<Plane> w;
    w.reserve(static_cast<size_t>(x.k()));
    for (int p = 0; p < x.k(); ++p)
        w.push_back(unflatten(X_blocks[static_cast<size_t>(p)] * alpha, m));
    return MultiChannelMap(std::move(w));
}

/// Central differences (f(v + h e_i) - f(v - h e_i)) / (2h) per coordinate.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& v, double h) {
    Eigen::VectorXd g(v.size());
    Eigen::VectorXd probe = v;
    for (long i = 0; i < v.size(); ++i) {
        probe[i] = v[i] + h;
        const double fp = f(probe);
        probe[i] = v[i] - h;
        const double fm = f(probe);
        probe[i] = v[i];
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NonFiniteEvaluation("numeric_gradient: non-finite evaluation");
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

struct GradcheckReport {
    double max_rel_err_x = 0.0;
    double max_rel_err_y = 0.0;
};

/// Numeric check of the backward maps for the loss l = <g, w(x, y)> with a
/// fixed random g. Per-coordinate step 1e-4 * (1 + |v_i|); relative errors use
/// denominator 1 + |analytic|.
inline GradcheckReport gradcheck_cf(int m, int k, double lambda, uint64_t seed) {
    if (m > 8) throw TooLarge("gradcheck_cf: m must be <= 8");
    Rng rng(seed);

    MultiChannelMap x(k, m);
    for (int p = 0; p < k; ++p)
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) x[p].data(r, c) = rng.uniform(-1.0, 1.0);
    Plane y(m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) y.data(r, c) = rng.uniform(-1.0, 1.0);
    MultiChannelMap g(k, m);
    for (int p = 0; p < k; ++p)
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) g[p].data(r, c) = rng.uniform(-1.0, 1.0);

    const auto loss = [&](const MultiChannelMap& xi, const Plane& yi) {
        CFConfig cfg(m, lambda, yi, hann_window(m), 0);
        const auto [w, cache] = cf_forward(xi, cfg);
        double l = 0.0;
        for (int p = 0; p < k; ++p) l += (g[p].data * w[p].data).sum();
        return l;
    };

    CFConfig cfg(m, lambda, y, hann_window(m), 0);
    const auto [w, cache] = cf_forward(x, cfg);
    const CFGradients analytic = cf_backward(cache, cfg, g);

    GradcheckReport report;
    MultiChannelMap xp = x;
    for (int p = 0; p < k; ++p) {
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                const double v = x[p].data(r, c);
                const double h = 1e-4 * (1.0 + std::abs(v));
                xp[p].data(r, c) = v + h;
                const double fp = loss(xp, y);
                xp[p].data(r, c) = v - h;
                const double fm = loss(xp, y);
                xp[p].data(r, c) = v;
                const double num = (fp - fm) / (2.0 * h);
                const double ana = analytic.grad_x[p].data(r, c);
                report.max_rel_err_x =
                    std::max(report.max_rel_err_x, std::abs(num - ana) / (1.0 + std::abs(ana)));
            }
        }
    }
    Plane yp = y;
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const double v = y.data(r, c);
            const double h = 1e-4 * (1.0 + std::abs(v));
            yp.data(r, c) = v + h;
            const double fp = loss(x, yp);
            yp.data(r, c) = v - h;
            const double fm = loss(x, yp);
            yp.data(r, c) = v;
            const double num = (fp - fm) / (2.0 * h);
            const double ana = analytic.grad_y.data(r, c);
            report.max_rel_err_y =
                std::max(report.max_rel_err_y, std::abs(num - ana) / (1.0 + std::abs(ana)));
        }
    }
    return report;
}

}  // namespace oracle
}  // namespace cfkit
