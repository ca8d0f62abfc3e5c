// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/service/view.hpp"

#include "nvo/error.hpp"
#include "nvo/image_io.hpp"

#include <cmath>

namespace nvo::service {

OrbitView default_view(const Asset& asset) {
    OrbitView v;
    v.target = asset.voxels.grid.bounds.center();
    v.radius = 1.5 * asset.voxels.grid.bounds.extent().x();
    return v;
}

Camera make_camera(const OrbitView& view, double scale) {
    return scaled_camera(
        orbit_camera(view.azimuth, view.elevation, view.radius, view.target, view.vertical_fov, view.width, view.height),
        scale);
}

Camera scaled_camera(Camera camera, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw ContractError("scale must be positive");
    }
    camera.world_to_camera =
        RigidTransform(camera.world_to_camera.rotation(), camera.world_to_camera.translation() / scale);
    return camera;
}

std::vector<std::uint8_t> render_png(const Asset& asset, const Pose& pose, const Camera& camera,
                                     const RenderOptions& options, StageTimings* timings) {
    return encode_frame_png(render_frame(asset, pose, camera, options, timings));
}

}  // namespace nvo::service
