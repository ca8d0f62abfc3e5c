// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nvo/image.hpp"
#include "nvo/renderer.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace nvo {

/// Reads any PNG as straight-alpha RGBA floats in [0, 1].
Image read_png(const std::filesystem::path& path);

/// Writes 8-bit RGBA (straight alpha). Values are clamped to [0, 1] and
/// rounded to the nearest level.
void write_png(const std::filesystem::path& path, const Image& rgba);
std::vector<std::uint8_t> encode_png(const Image& rgba);

/// Converts a premultiplied RGBA image to straight alpha; pixels with zero
/// alpha get zero color.
Image unpremultiply(const Image& rgba);

/// PNG export of frame buffers: first three feature channels divided by
/// alpha, alpha as the fourth channel.
std::vector<std::uint8_t> encode_frame_png(const FrameBuffers& frame);

/// Depth raster: "DPT1" | width u32 | height u32 | reserved u32 (0) |
/// width * height f32, row-major, little-endian. Infinity marks no hit.
std::vector<std::uint8_t> encode_depth(const FrameBuffers& frame);
void write_depth(const std::filesystem::path& path, const FrameBuffers& frame);
/// Returns a single-channel image. Throws FormatError on bad magic, size
/// mismatch or trailing data.
Image decode_depth(std::span<const std::uint8_t> bytes);
Image read_depth(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace nvo
