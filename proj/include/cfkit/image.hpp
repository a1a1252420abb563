#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#ifdef CFKIT_HAS_PNG
#include <png.h>
#endif

#include "cfkit/types.hpp"

namespace cfkit {

/// Greyscale frame, values in [0,1], row-major, possibly non-square.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;  // height * width

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(static_cast<size_t>(w) * h, 0.0) {}

    double& at(int row, int col) { return pixels[static_cast<size_t>(row) * width + col]; }
    double at(int row, int col) const { return pixels[static_cast<size_t>(row) * width + col]; }

    // clamped lookup: out-of-range coordinates replicate the nearest edge pixel
    double at_clamped(int row, int col) const {
        row = std::clamp(row, 0, height - 1);
        col = std::clamp(col, 0, width - 1);
        return at(row, col);
    }
};

/// Bilinear sample at continuous pixel-center coordinates, edge-replicated.
inline double sample_bilinear(const Image& img, double row, double col) {
    const int r0 = static_cast<int>(std::floor(row));
    const int c0 = static_cast<int>(std::floor(col));
    const double fr = row - r0;
    const double fc = col - c0;
    const double v00 = img.at_clamped(r0, c0);
    const double v01 = img.at_clamped(r0, c0 + 1);
    const double v10 = img.at_clamped(r0 + 1, c0);
    const double v11 = img.at_clamped(r0 + 1, c0 + 1);
    return (1 - fr) * ((1 - fc) * v00 + fc * v01) + fr * ((1 - fc) * v10 + fc * v11);
}

/// Resample a square window of side `side_pixels` centred at (cx, cy) onto an
/// out_side × out_side grid. Out-of-frame samples take nearest-edge values.
inline Plane extract_patch(const Image& frame, double cx, double cy, double side_pixels,
                           int out_side) {
    if (!(side_pixels > 0.0)) throw DegenerateRect("extract_patch: non-positive window side");
    Plane out(out_side);
    const double scale = side_pixels / out_side;
    const double left = cx - side_pixels / 2.0;
    const double top = cy - side_pixels / 2.0;
    for (int r = 0; r < out_side; ++r) {
        const double sr = top + (r + 0.5) * scale - 0.5;
        for (int c = 0; c < out_side; ++c) {
            const double sc = left + (c + 0.5) * scale - 0.5;
            out.data(r, c) = sample_bilinear(frame, sr, sc);
        }
    }
    return out;
}

inline Image plane_to_image(const Plane& p) {
    Image img(p.side(), p.side());
    for (int r = 0; r < p.side(); ++r)
        for (int c = 0; c < p.side(); ++c) img.at(r, c) = p.data(r, c);
    return img;
}

// ---- PGM (binary P5, 8-bit) ----

inline Image read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UnsupportedFormat("cannot open " + path);

    const auto next_token = [&in, &path]() {
        std::string tok;
        char ch;
        while (in.get(ch)) {
            if (ch == '#') {
                while (in.get(ch) && ch != '\n') {
                }
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(ch))) {
                if (!tok.empty()) return tok;
                continue;
            }
            tok.push_back(ch);
        }
        if (tok.empty()) throw UnsupportedFormat("truncated PGM header in " + path);
        return tok;
    };

    if (next_token() != "P5") throw UnsupportedFormat(path + " is not binary PGM (P5)");
    const int w = std::stoi(next_token());
    const int h = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw UnsupportedFormat("unsupported PGM geometry in " + path);

    std::vector<uint8_t> raw(static_cast<size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw UnsupportedFormat("truncated PGM payload in " + path);

    Image img(w, h);
    for (size_t i = 0; i < raw.size(); ++i) img.pixels[i] = raw[i] / double(maxval);
    return img;
}

inline void write_pgm(const Image& img, const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << "P5\n" << img.width << " " << img.height << "\n255\n";
        std::vector<uint8_t> raw(img.pixels.size());
        for (size_t i = 0; i < raw.size(); ++i) {
            const double v = std::clamp(img.pixels[i], 0.0, 1.0);
            raw[i] = static_cast<uint8_t>(std::lround(v * 255.0));
        }
        out.write(reinterpret_cast<const char*>(raw.data()),
                  static_cast<std::streamsize>(raw.size()));
    }
    fs::rename(tmp, target);
}

// ---- PNG (optional decoder; greyscale via Rec. 601 luminance) ----

#ifdef CFKIT_HAS_PNG
inline Image read_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw UnsupportedFormat("cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        std::fclose(fp);
        throw UnsupportedFormat("failed to decode PNG " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int channels = png_get_channels(png, info);

    std::vector<uint8_t> rowbuf(static_cast<size_t>(w) * channels);
    Image img(w, h);
    for (int r = 0; r < h; ++r) {
        png_read_row(png, rowbuf.data(), nullptr);
        for (int c = 0; c < w; ++c) {
            double v;
            if (channels >= 3) {
                v = (0.299 * rowbuf[c * channels] + 0.587 * rowbuf[c * channels + 1] +
                     0.114 * rowbuf[c * channels + 2]) /
                    255.0;
            } else {
                v = rowbuf[c * channels] / 255.0;
            }
            img.at(r, c) = v;
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}
#endif

inline Image read_frame(const std::string& path) {
    const auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == "pgm") return read_pgm(path);
#ifdef CFKIT_HAS_PNG
    if (ext == "png") return read_png(path);
#endif
    throw UnsupportedFormat("no decoder for ." + ext + " (" + path + ")");
}

}  // namespace cfkit
