// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/image_io.hpp"

#include "nvo/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

namespace nvo {

namespace {

std::uint8_t quantize(float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

std::vector<std::uint8_t> to_rgba8(const Image& rgba) {
    if (rgba.channels() != 4) {
        throw ContractError(fmt::format("PNG export expects 4 channels, got {}", rgba.channels()));
    }
    std::vector<std::uint8_t> pixels(rgba.data().size());
    std::transform(rgba.data().begin(), rgba.data().end(), pixels.begin(), quantize);
    return pixels;
}

png_image make_png_image(int width, int height) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = PNG_FORMAT_RGBA;
    return image;
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCategory::kIo, fmt::format("cannot open '{}'", path.string()));
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCategory::kIo, fmt::format("cannot open '{}' for writing", path.string()));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCategory::kIo, fmt::format("failed writing '{}'", path.string()));
    }
}

Image read_png(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw FormatError(FormatErrorKind::kCorrupt, fmt::format("'{}': {}", path.string(), image.message));
    }
    image.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
        const std::string message = image.message;
        png_image_free(&image);
        throw FormatError(FormatErrorKind::kCorrupt, fmt::format("'{}': {}", path.string(), message));
    }
    Image out(static_cast<int>(image.width), static_cast<int>(image.height), 4);
    std::transform(pixels.begin(), pixels.end(), out.data().begin(),
                   [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
    return out;
}

std::vector<std::uint8_t> encode_png(const Image& rgba) {
    const std::vector<std::uint8_t> pixels = to_rgba8(rgba);
    png_image image = make_png_image(rgba.width(), rgba.height());
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
        throw Error(ErrorCategory::kIo, fmt::format("PNG encoding failed: {}", image.message));
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
        throw Error(ErrorCategory::kIo, fmt::format("PNG encoding failed: {}", image.message));
    }
    out.resize(size);
    return out;
}

void write_png(const std::filesystem::path& path, const Image& rgba) { write_file(path, encode_png(rgba)); }

Image unpremultiply(const Image& rgba) {
    if (rgba.channels() != 4) {
        throw ContractError("unpremultiply expects RGBA");
    }
    Image out = rgba;
    for (int y = 0; y < rgba.height(); ++y) {
        for (int x = 0; x < rgba.width(); ++x) {
            const float a = rgba.at(x, y, 3);
            for (int c = 0; c < 3; ++c) {
                out.at(x, y, c) = a > 0.0f ? rgba.at(x, y, c) / a : 0.0f;
            }
        }
    }
    return out;
}

std::vector<std::uint8_t> encode_frame_png(const FrameBuffers& frame) {
    return encode_png(unpremultiply(frame.premultiplied_rgba()));
}

std::vector<std::uint8_t> encode_depth(const FrameBuffers& frame) {
    std::vector<std::uint8_t> out(16 + frame.depth.size() * sizeof(float));
    const std::uint32_t header[4] = {0, static_cast<std::uint32_t>(frame.width),
                                     static_cast<std::uint32_t>(frame.height), 0};
    std::memcpy(out.data(), header, sizeof(header));
    std::memcpy(out.data(), "DPT1", 4);
    std::memcpy(out.data() + 16, frame.depth.data(), frame.depth.size() * sizeof(float));
    return out;
}

void write_depth(const std::filesystem::path& path, const FrameBuffers& frame) {
    write_file(path, encode_depth(frame));
}

Image decode_depth(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 16) {
        throw FormatError(FormatErrorKind::kTruncated, "depth raster shorter than its header");
    }
    if (std::memcmp(bytes.data(), "DPT1", 4) != 0) {
        throw FormatError(FormatErrorKind::kBadMagic, "not a depth raster (magic mismatch)");
    }
    std::uint32_t dims[2];
    std::memcpy(dims, bytes.data() + 4, sizeof(dims));
    const std::uint64_t expected = 16 + static_cast<std::uint64_t>(dims[0]) * dims[1] * sizeof(float);
    if (bytes.size() < expected) {
        throw FormatError(FormatErrorKind::kTruncated,
                          fmt::format("depth raster {}x{} needs {} bytes, file has {}", dims[0], dims[1], expected,
                                      bytes.size()));
    }
    if (bytes.size() > expected) {
        throw FormatError(FormatErrorKind::kTrailingData, "unexpected bytes after the depth raster");
    }
    Image out(static_cast<int>(dims[0]), static_cast<int>(dims[1]), 1);
    std::memcpy(out.data().data(), bytes.data() + 16, out.data().size() * sizeof(float));
    return out;
}

Image read_depth(const std::filesystem::path& path) { return decode_depth(read_file(path)); }

}  // namespace nvo
