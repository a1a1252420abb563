#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "cfkit/errors.hpp"

namespace cfkit {

using Grid = Eigen::ArrayXXd;            // real m×m samples, (row, col) indexing
using CGrid = Eigen::ArrayXXcd;          // complex m×m samples
using Complex = std::complex<double>;

/// Square real-valued 2-D signal on the wrapped domain {0..m-1}^2.
struct Plane {
    Grid data;

    Plane() = default;
    explicit Plane(int m) {
        check_side(m);
        data = Grid::Zero(m, m);
    }
    explicit Plane(Grid g) : data(std::move(g)) {
        check_side(static_cast<int>(data.rows()));
        if (data.rows() != data.cols())
            throw ShapeMismatch("Plane must be square");
    }

    int side() const { return static_cast<int>(data.rows()); }
    bool finite() const { return data.isFinite().all(); }

    static void check_side(int m) {
        if (m < 2) throw ShapeMismatch("Plane side must be >= 2");
    }
};

/// DFT of a Plane: complex m×m bins.
struct Spectrum {
    CGrid data;

    Spectrum() = default;
    explicit Spectrum(int m) {
        Plane::check_side(m);
        data = CGrid::Zero(m, m);
    }
    explicit Spectrum(CGrid g) : data(std::move(g)) {
        Plane::check_side(static_cast<int>(data.rows()));
        if (data.rows() != data.cols())
            throw ShapeMismatch("Spectrum must be square");
    }

    int side() const { return static_cast<int>(data.rows()); }
};

/// Stack of k Planes sharing one side length.
struct MultiChannelMap {
    std::vector<Plane> channels;

    MultiChannelMap() = default;
    explicit MultiChannelMap(std::vector<Plane> chans) : channels(std::move(chans)) {
        if (channels.empty()) throw ShapeMismatch("MultiChannelMap needs at least one channel");
        const int m = channels.front().side();
        for (const Plane& p : channels)
            if (p.side() != m) throw ShapeMismatch("MultiChannelMap channels disagree on side");
    }
    MultiChannelMap(int k, int m) {
        if (k < 1) throw ShapeMismatch("MultiChannelMap needs at least one channel");
        channels.assign(static_cast<size_t>(k), Plane(m));
    }

    int k() const { return static_cast<int>(channels.size()); }
    int side() const { return channels.front().side(); }
    Plane& operator[](int p) { return channels[static_cast<size_t>(p)]; }
    const Plane& operator[](int p) const { return channels[static_cast<size_t>(p)]; }
};

/// Axis-aligned box, real-valued pixel units, top-left anchored.
struct Rect {
    double x = 0, y = 0, w = 0, h = 0;

    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    double area() const { return w * h; }

    void require_positive() const {
        if (!(w > 0.0) || !(h > 0.0)) throw DegenerateRect("rect has non-positive size");
    }
};

}  // namespace cfkit
