// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nvo {

/// Row-major interleaved float image.
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, float fill = 0.0f);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const { return pixels_.empty(); }

    float& at(int x, int y, int c) { return pixels_[index(x, y, c)]; }
    float at(int x, int y, int c) const { return pixels_[index(x, y, c)]; }
    std::span<float> pixel(int x, int y) { return {pixels_.data() + index(x, y, 0), static_cast<std::size_t>(channels_)}; }
    std::span<const float> pixel(int x, int y) const {
        return {pixels_.data() + index(x, y, 0), static_cast<std::size_t>(channels_)};
    }

    std::span<float> data() { return pixels_; }
    std::span<const float> data() const { return pixels_; }

    /// Single channel copy.
    Image channel(int c) const;

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> pixels_;
};

/// RGBA with straight alpha -> RGBA with color multiplied by alpha.
Image premultiply(const Image& rgba);

/// PSNR in dB between equally-shaped images over the first `channels`
/// channels (all when <= 0), assuming a peak value of 1.
double psnr(const Image& a, const Image& b, int channels = 0);

}  // namespace nvo
