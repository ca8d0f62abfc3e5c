// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/image.hpp"

#include "nvo/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nvo {

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels <= 0) {
        throw ContractError("image dimensions must be non-negative with at least one channel");
    }
    pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image Image::channel(int c) const {
    Image out(width_, height_, 1);
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            out.at(x, y, 0) = at(x, y, c);
        }
    }
    return out;
}

Image premultiply(const Image& rgba) {
    if (rgba.channels() != 4) {
        throw ContractError("premultiply expects an RGBA image");
    }
    Image out = rgba;
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            auto px = out.pixel(x, y);
            for (int c = 0; c < 3; ++c) {
                px[c] *= px[3];
            }
        }
    }
    return out;
}

double psnr(const Image& a, const Image& b, int channels) {
    if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels()) {
        throw ContractError("psnr needs equally shaped images");
    }
    const int used = channels <= 0 ? a.channels() : std::min(channels, a.channels());
    double sum = 0.0;
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            for (int c = 0; c < used; ++c) {
                const double d = static_cast<double>(a.at(x, y, c)) - b.at(x, y, c);
                sum += d * d;
            }
        }
    }
    const double mse = sum / (static_cast<double>(a.pixel_count()) * used);
    if (mse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return -10.0 * std::log10(mse);
}

}  // namespace nvo
