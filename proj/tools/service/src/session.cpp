// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/service/session.hpp"

#include "nvo/scene_io.hpp"

#include <chrono>
#include <cmath>
#include <utility>

#include <fmt/format.h>
#include <json.hpp>

namespace nvo::service {

namespace {

using json = nlohmann::json;

constexpr int kMaxImageSide = 4096;

Outgoing text_reply(const json& j) { return {false, j.dump(), {}}; }

[[noreturn]] void protocol(const std::string& message) { throw Error(ErrorCategory::kProtocol, message); }

double finite_number(const json& j, const char* field) {
    if (!j.is_number()) {
        protocol(fmt::format("'{}' must be a number", field));
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        protocol(fmt::format("'{}' must be finite", field));
    }
    return v;
}

Vec3 vec3(const json& j, const char* field) {
    if (!j.is_array() || j.size() != 3) {
        protocol(fmt::format("'{}' must be an array of three numbers", field));
    }
    return {finite_number(j[0], field), finite_number(j[1], field), finite_number(j[2], field)};
}

int image_side(const json& j, const char* field) {
    if (!j.is_number_integer()) {
        protocol(fmt::format("'{}' must be an integer", field));
    }
    const auto v = j.get<std::int64_t>();
    if (v < 1 || v > kMaxImageSide) {
        protocol(fmt::format("'{}' must lie in [1, {}]", field, kMaxImageSide));
    }
    return static_cast<int>(v);
}

}  // namespace

std::string error_message(std::optional<std::int64_t> seq, ErrorCategory category, std::string_view message) {
    json j{{"type", "error"}, {"category", std::string(category_name(category))}, {"message", std::string(message)}};
    if (seq) {
        j["seq"] = *seq;
    }
    return j.dump();
}

RenderOutcome execute(const Asset& asset, const RenderJob& job) {
    RenderOutcome out;
    out.width = job.camera.width;
    out.height = job.camera.height;
    const auto begin = std::chrono::steady_clock::now();
    try {
        out.png = render_png(asset, job.pose, job.camera, job.options);
    } catch (const Error& e) {
        out.error = e.category();
        out.message = e.what();
    } catch (const std::exception& e) {
        out.error = ErrorCategory::kContract;
        out.message = e.what();
    }
    out.render_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - begin).count();
    return out;
}

SessionCore::SessionCore(std::shared_ptr<const Asset> asset, std::string asset_id)
    : asset_(std::move(asset)), asset_id_(std::move(asset_id)) {
    pose_ = Pose::canonical(asset_->skeleton.size());
    view_ = default_view(*asset_);
}

std::string SessionCore::hello() const {
    json joints = json::array();
    for (const Joint& joint : asset_->skeleton.joints()) {
        joints.push_back({{"name", joint.name}, {"parent", joint.parent}});
    }
    const Vec3& t = view_.target;
    json defaults{{"orbit",
                   {{"azimuth", view_.azimuth},
                    {"elevation", view_.elevation},
                    {"radius", view_.radius},
                    {"target", {t.x(), t.y(), t.z()}}}},
                  {"fov", view_.vertical_fov},
                  {"width", view_.width},
                  {"height", view_.height},
                  {"lambda_th", options_.early_stop},
                  {"scale", scale_}};
    return json{{"type", "hello"},
                {"asset_id", asset_id_},
                {"voxel_count", asset_->voxels.size()},
                {"joints", joints},
                {"defaults", defaults}}
        .dump();
}

Camera SessionCore::camera() const {
    return raw_camera_ ? scaled_camera(*raw_camera_, scale_) : make_camera(view_, scale_);
}

RenderJob SessionCore::snapshot(std::int64_t seq) const { return {seq, pose_, camera(), options_}; }

Step SessionCore::on_binary() {
    Step step;
    step.replies.push_back(
        {false, error_message(std::nullopt, ErrorCategory::kProtocol, "binary messages are not accepted"), {}});
    return step;
}

Step SessionCore::on_message(std::string_view text) {
    Step step;
    std::optional<std::int64_t> seq;
    try {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            protocol(fmt::format("malformed JSON: {}", e.what()));
        }
        if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
            protocol("message must be an object with a string 'type'");
        }
        const std::string type = j["type"].get<std::string>();
        if (type == "set_pose") {
            Pose pose;
            try {
                pose = pose_from_json(j.dump());
            } catch (const Error& e) {
                protocol(e.what());
            }
            if (pose.joint_rotations.size() != asset_->skeleton.size()) {
                protocol(fmt::format("pose has {} joint rotations, the asset has {} joints",
                                     pose.joint_rotations.size(), asset_->skeleton.size()));
            }
            pose_ = std::move(pose);
        } else if (type == "set_camera") {
            if (j.contains("raw")) {
                Camera raw;
                try {
                    raw = camera_from_json(j["raw"].dump());
                } catch (const Error& e) {
                    protocol(e.what());
                }
                if (raw.width > kMaxImageSide || raw.height > kMaxImageSide) {
                    protocol(fmt::format("raw camera exceeds {} pixels per side", kMaxImageSide));
                }
                raw_camera_ = raw;
            } else {
                OrbitView view = view_;
                if (j.contains("orbit")) {
                    const json& o = j["orbit"];
                    if (!o.is_object()) {
                        protocol("'orbit' must be an object");
                    }
                    if (o.contains("azimuth")) view.azimuth = finite_number(o["azimuth"], "azimuth");
                    if (o.contains("elevation")) view.elevation = finite_number(o["elevation"], "elevation");
                    if (o.contains("radius")) view.radius = finite_number(o["radius"], "radius");
                    if (o.contains("target")) view.target = vec3(o["target"], "target");
                }
                if (j.contains("fov")) view.vertical_fov = finite_number(j["fov"], "fov");
                if (j.contains("width")) view.width = image_side(j["width"], "width");
                if (j.contains("height")) view.height = image_side(j["height"], "height");
                if (!(view.radius > 0.0)) {
                    protocol("orbit radius must be positive");
                }
                if (!(view.vertical_fov > 0.0 && view.vertical_fov < 3.14159)) {
                    protocol("fov must lie in (0, pi) radians");
                }
                if (std::abs(std::cos(view.elevation)) < 1e-9) {
                    protocol("elevation must not point straight up or down");
                }
                view_ = view;
                raw_camera_.reset();
            }
        } else if (type == "set_options") {
            RenderOptions options = options_;
            double scale = scale_;
            if (j.contains("lambda_th")) {
                options.early_stop = finite_number(j["lambda_th"], "lambda_th");
                if (!(options.early_stop > 0.0 && options.early_stop < 1.0)) {
                    protocol("lambda_th must lie in (0, 1)");
                }
            }
            if (j.contains("scale")) {
                scale = finite_number(j["scale"], "scale");
                if (!(scale > 0.0)) {
                    protocol("scale must be positive");
                }
            }
            options_ = options;
            scale_ = scale;
        } else if (type == "request_frame") {
            if (!j.contains("seq") || !j["seq"].is_number_integer()) {
                protocol("request_frame needs an integer 'seq'");
            }
            const auto requested = j["seq"].get<std::int64_t>();
            seq = requested;
            if (last_seq_ && requested <= *last_seq_) {
                protocol(fmt::format("seq {} does not increase past {}", requested, *last_seq_));
            }
            last_seq_ = requested;
            if (!in_flight_) {
                in_flight_ = requested;
                step.start = snapshot(requested);
            } else {
                if (pending_) {
                    step.replies.push_back(text_reply({{"type", "superseded"}, {"seq", *pending_}}));
                }
                pending_ = requested;
            }
        } else {
            protocol(fmt::format("unknown message type '{}'", type));
        }
    } catch (const Error& e) {
        step.replies.push_back({false, error_message(seq, e.category(), e.what()), {}});
    }
    return step;
}

Step SessionCore::on_render_done(const RenderOutcome& outcome) {
    Step step;
    if (!in_flight_) {
        throw ContractError("render completion without a render in flight");
    }
    const std::int64_t seq = *in_flight_;
    in_flight_.reset();
    if (outcome.error) {
        step.replies.push_back({false, error_message(seq, *outcome.error, outcome.message), {}});
    } else {
        step.replies.push_back(text_reply({{"type", "frame_meta"},
                                           {"seq", seq},
                                           {"render_ms", outcome.render_ms},
                                           {"width", outcome.width},
                                           {"height", outcome.height}}));
        step.replies.push_back({true, {}, outcome.png});
    }
    if (pending_) {
        in_flight_ = pending_;
        step.start = snapshot(*pending_);
        pending_.reset();
    }
    return step;
}

}  // namespace nvo::service
