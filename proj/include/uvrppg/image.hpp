#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "uvrppg/core.hpp"

namespace uvrppg {

// Dense H x W x C float image, row-major, channel-interleaved.
// Intensities keep the scale of their source (8-bit inputs load as 0..255).
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    Image() = default;
    Image(int h, int w, int c, float fill = 0.0f)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {}

    float& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    float at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
    size_t size() const { return data.size(); }
};

// Per-pixel boolean companion for an Image (kept / not kept).
struct Mask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> keep;

    Mask() = default;
    Mask(int h, int w, bool value = false)
        : height(h), width(w), keep(static_cast<size_t>(h) * w, value ? 1 : 0) {}

    uint8_t& at(int y, int x) { return keep[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return keep[static_cast<size_t>(y) * width + x]; }
    size_t count() const {
        size_t n = 0;
        for (uint8_t k : keep) n += k;
        return n;
    }
};

// Bilinear sample at continuous pixel coordinates, integer coordinates sit on
// pixel centers. Coordinates outside the image clamp to the edge.
inline void sample_bilinear_clamped(const Image& img, double x, double y, float* out) {
    const int x0f = static_cast<int>(std::floor(x));
    const int y0f = static_cast<int>(std::floor(y));
    const double fx = x - x0f;
    const double fy = y - y0f;
    const auto cl = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
    const int x0 = cl(x0f, img.width - 1);
    const int x1 = cl(x0f + 1, img.width - 1);
    const int y0 = cl(y0f, img.height - 1);
    const int y1 = cl(y0f + 1, img.height - 1);
    const double w00 = (1.0 - fx) * (1.0 - fy);
    const double w10 = fx * (1.0 - fy);
    const double w01 = (1.0 - fx) * fy;
    const double w11 = fx * fy;
    for (int c = 0; c < img.channels; ++c) {
        out[c] = static_cast<float>(w00 * img.at(y0, x0, c) + w10 * img.at(y0, x1, c) +
                                    w01 * img.at(y1, x0, c) + w11 * img.at(y1, x1, c));
    }
}

}  // namespace uvrppg
