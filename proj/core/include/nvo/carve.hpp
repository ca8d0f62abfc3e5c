// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nvo/camera.hpp"
#include "nvo/image.hpp"
#include "nvo/voxel_set.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace nvo {

/// One silhouette observation: a camera and its alpha matte (channel 0 of
/// a single-channel image, or channel 3 of an RGBA image).
struct CarveView {
    Camera camera;
    Image alpha;
};

struct CarveOptions {
    int dilation_radius_px = 5;
    double alpha_threshold = 0.005;
    /// Keep cells that project into no image at all. Off by default: such
    /// cells carry no evidence and would inflate the volume. With this on,
    /// adding a view can never add cells.
    bool keep_unobserved = false;
};

struct CarveReport {
    std::size_t candidate_cells = 0;
    std::size_t surviving_cells = 0;
    /// Cells each view let through (inside its dilated mask or outside its frame).
    std::vector<std::size_t> per_view_survivors;
};

/// Binary mask (alpha >= threshold) dilated by a disc of `radius_px`:
/// a pixel is set iff some thresholded pixel lies within Euclidean
/// distance radius_px of it.
std::vector<std::uint8_t> dilated_mask(const Image& alpha, double threshold, int radius_px);

/// Conservative visual hull. A cell survives iff its center projects inside
/// at least one image (unless keep_unobserved) and, for every view whose
/// image it projects into, the dilated mask is set at that pixel. Throws CarvedEmptyError when nothing
/// survives.
VoxelSet carve_volume(std::span<const CarveView> views, const VoxelGrid& grid,
                      const CarveOptions& options = {}, CarveReport* report = nullptr);

}  // namespace nvo
