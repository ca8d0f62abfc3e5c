// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Transport-free session state machine for the render service.
//
// Client to server (JSON text):
//   {"type": "set_pose", "rotations": [[x,y,z], ...], "root_rotation", "root_translation"}
//   {"type": "set_camera", "orbit": {"azimuth", "elevation", "radius", "target"},
//    "fov", "width", "height"}            every field optional, or
//   {"type": "set_camera", "raw": camera} with raw extrinsics/intrinsics
//   {"type": "set_options", "lambda_th", "scale"}
//   {"type": "request_frame", "seq"}
// Server to client:
//   {"type": "hello", "asset_id", "voxel_count", "joints": [{"name", "parent"}], "defaults"}
//   {"type": "frame_meta", "seq", "render_ms", "width", "height"} then one binary PNG
//   {"type": "superseded", "seq"}
//   {"type": "error", "seq" (when known), "category", "message"}

#include "nvo/asset.hpp"
#include "nvo/error.hpp"
#include "nvo/service/view.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nvo::service {

struct Outgoing {
    bool binary = false;
    std::string text;
    std::vector<std::uint8_t> bytes;
};

/// Everything a render needs, copied out of the session when it starts.
struct RenderJob {
    std::int64_t seq = 0;
    Pose pose;
    Camera camera;
    RenderOptions options;
};

struct RenderOutcome {
    std::vector<std::uint8_t> png;
    double render_ms = 0.0;
    int width = 0;
    int height = 0;
    /// Set when the render threw.
    std::optional<ErrorCategory> error;
    std::string message;
};

/// Renders a job. Never throws: failures come back as an error outcome.
RenderOutcome execute(const Asset& asset, const RenderJob& job);

struct Step {
    std::vector<Outgoing> replies;
    std::optional<RenderJob> start;
};

class SessionCore {
public:
    SessionCore(std::shared_ptr<const Asset> asset, std::string asset_id);

    std::string hello() const;

    /// Applies one text message. At most one job is in flight; a request
    /// arriving while rendering replaces the pending one, whose seq is
    /// answered with "superseded".
    Step on_message(std::string_view text);
    /// Binary client messages are not part of the protocol.
    Step on_binary();
    /// Reports the in-flight job's result and starts the pending request,
    /// if any, from the state current at that moment.
    Step on_render_done(const RenderOutcome& outcome);

    bool rendering() const { return in_flight_.has_value(); }
    const Pose& pose() const { return pose_; }
    Camera camera() const;
    const RenderOptions& options() const { return options_; }

private:
    RenderJob snapshot(std::int64_t seq) const;

    std::shared_ptr<const Asset> asset_;
    std::string asset_id_;
    Pose pose_;
    OrbitView view_;
    std::optional<Camera> raw_camera_;
    double scale_ = 1.0;
    RenderOptions options_;
    std::optional<std::int64_t> last_seq_;
    std::optional<std::int64_t> in_flight_;
    std::optional<std::int64_t> pending_;
};

std::string error_message(std::optional<std::int64_t> seq, ErrorCategory category, std::string_view message);

}  // namespace nvo::service
