// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nvo/flut.hpp"
#include "nvo/skeleton.hpp"
#include "nvo/skinning.hpp"
#include "nvo/voxel_set.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace nvo {

/// Everything needed to pose and render a character: canonical voxels,
/// their features and the rig binding them to a skeleton.
struct Asset {
    VoxelSet voxels;
    Flut flut;
    Skeleton skeleton = Skeleton::single_joint();
    SkinWeights weights;

    /// Throws ContractError when FLUT length, weight count or joint indices
    /// disagree with the voxel set.
    void validate() const;
};

inline constexpr std::uint32_t kAssetVersion = 1;

/// Serializes to the .nvo layout (little-endian):
///   "NVO1" | version u32 | resolution u32 | voxel count u64 | SH degree u8 |
///   channels u8 | bounds 6 x f32 | rig block offset u64
///   leaf table: (morton u64, flut index u32) sorted by morton
///   FLUT block: f32, entry-major, coefficients then density
///   rig block: joint count u16, per joint (name length u16, name bytes,
///   parent i32, rotation w x y z f64, translation f64 x 3), voxel count u64,
///   per voxel (count u8, then (joint u16, weight f32) pairs)
/// Bounds are stored as f32; an asset whose bounds are not f32-exact does
/// not round-trip bit-exactly. Throws ContractError on an empty asset.
std::vector<std::uint8_t> save_asset(const Asset& asset);

/// Throws FormatError (kTruncated, kBadMagic, kUnsupportedVersion,
/// kCountMismatch, kTrailingData or kCorrupt).
Asset load_asset(std::span<const std::uint8_t> bytes);

void save_asset_file(const Asset& asset, const std::filesystem::path& path);
Asset load_asset_file(const std::filesystem::path& path);

/// FNV-1a 64 of the encoded bytes, hex encoded. Stable asset identifier.
std::string asset_id(std::span<const std::uint8_t> bytes);

}  // namespace nvo
