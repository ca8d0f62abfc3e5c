// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Orbit camera parameters and the single render-to-PNG path shared by the
// command line tool and the render service.

#include "nvo/asset.hpp"
#include "nvo/camera.hpp"
#include "nvo/renderer.hpp"

#include <cstdint>
#include <vector>

namespace nvo::service {

struct OrbitView {
    double azimuth = 0.0;
    double elevation = 0.3;
    double radius = 3.0;
    Vec3 target = Vec3::Zero();
    double vertical_fov = 0.785398163397448;
    int width = 512;
    int height = 512;
};

/// Orbit around the grid center at 1.5 grid widths.
OrbitView default_view(const Asset& asset);

/// Orbit camera. A scale s > 1 shows the character s times larger, which is
/// the same as dividing the camera translation by s.
Camera make_camera(const OrbitView& view, double scale = 1.0);
Camera scaled_camera(Camera camera, double scale);

/// Renders one frame and encodes it as straight-alpha RGBA PNG.
std::vector<std::uint8_t> render_png(const Asset& asset, const Pose& pose, const Camera& camera,
                                     const RenderOptions& options, StageTimings* timings = nullptr);

}  // namespace nvo::service
