// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/scene_io.hpp"

#include "nvo/error.hpp"
#include "nvo/image_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace nvo {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
    if (!j.is_array() || j.size() != 3) {
        throw FormatError(FormatErrorKind::kCorrupt, "expected an array of 3 numbers");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json transform_json(const RigidTransform& t) {
    const Quat& q = t.rotation();
    return {{"rotation", json::array({q.w(), q.x(), q.y(), q.z()})}, {"translation", vec_json(t.translation())}};
}

RigidTransform transform_from(const json& j) {
    const json& r = j.at("rotation");
    if (!r.is_array() || r.size() != 4) {
        throw FormatError(FormatErrorKind::kCorrupt, "rotation must be [w, x, y, z]");
    }
    try {
        return RigidTransform(Quat(r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()),
                              vec_from(j.at("translation")));
    } catch (const ContractError& e) {
        throw FormatError(FormatErrorKind::kCorrupt, e.what());
    }
}

json parse(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(FormatErrorKind::kSyntax, fmt::format("{}: {}", what, e.what()));
    }
}

/// Runs a schema conversion, mapping library and contract errors to kCorrupt.
template <typename Fn>
auto convert(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const FormatError&) {
        throw;
    } catch (const json::exception& e) {
        throw FormatError(FormatErrorKind::kCorrupt, fmt::format("{}: {}", what, e.what()));
    } catch (const ContractError& e) {
        throw FormatError(FormatErrorKind::kCorrupt, fmt::format("{}: {}", what, e.what()));
    }
}

json camera_json(const Camera& c) {
    return {{"width", c.width}, {"height", c.height}, {"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy},
            {"world_to_camera", transform_json(c.world_to_camera)}};
}

Camera camera_from(const json& j) {
    Camera c;
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.world_to_camera = transform_from(j.at("world_to_camera"));
    c.validate();
    return c;
}

json pose_json(const Pose& p) {
    json rotations = json::array();
    for (const Vec3& r : p.joint_rotations) {
        rotations.push_back(vec_json(r));
    }
    return {{"rotations", rotations},
            {"root_rotation", vec_json(p.root_rotation)},
            {"root_translation", vec_json(p.root_translation)}};
}

Pose pose_from(const json& j) {
    Pose p;
    for (const json& r : j.at("rotations")) {
        p.joint_rotations.push_back(vec_from(r));
    }
    if (j.contains("root_rotation")) {
        p.root_rotation = vec_from(j.at("root_rotation"));
    }
    if (j.contains("root_translation")) {
        p.root_translation = vec_from(j.at("root_translation"));
    }
    p.validate(p.joint_rotations.size());
    return p;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& relative) {
    const std::filesystem::path p(relative);
    return p.is_absolute() ? p : base / p;
}

void require_file(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) {
        throw Error(ErrorCategory::kIo, fmt::format("referenced file '{}' does not exist", path.string()));
    }
}

std::vector<Vec3> read_obj_vertices(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::vector<Vec3> vertices;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.rfind("v ", 0) != 0) {
            continue;
        }
        std::istringstream fields(line.substr(2));
        Vec3 v;
        if (!(fields >> v.x() >> v.y() >> v.z())) {
            throw FormatError(FormatErrorKind::kSyntax,
                              fmt::format("'{}' line {}: malformed vertex", path.string(), number));
        }
        vertices.push_back(v);
    }
    return vertices;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCategory::kIo, fmt::format("cannot open '{}'", path.string()));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCategory::kIo, fmt::format("cannot open '{}' for writing", path.string()));
    }
    out << text;
    if (!out) {
        throw Error(ErrorCategory::kIo, fmt::format("failed writing '{}'", path.string()));
    }
}

std::string camera_to_json(const Camera& camera) { return camera_json(camera).dump(2); }

Camera camera_from_json(const std::string& text) {
    const json j = parse(text, "camera");
    return convert("camera", [&] { return camera_from(j); });
}

std::string skeleton_to_json(const Skeleton& skeleton) {
    json joints = json::array();
    for (const Joint& joint : skeleton.joints()) {
        json entry = transform_json(joint.bind_local);
        entry["name"] = joint.name;
        entry["parent"] = joint.parent;
        joints.push_back(entry);
    }
    return json{{"joints", joints}}.dump(2);
}

Skeleton skeleton_from_json(const std::string& text) {
    const json j = parse(text, "skeleton");
    return convert("skeleton", [&] {
        std::vector<Joint> joints;
        for (const json& entry : j.at("joints")) {
            joints.push_back({entry.at("name").get<std::string>(), entry.at("parent").get<int>(), transform_from(entry)});
        }
        return Skeleton(std::move(joints));
    });
}

std::string pose_to_json(const Pose& pose) { return pose_json(pose).dump(2); }

Pose pose_from_json(const std::string& text) {
    const json j = parse(text, "pose");
    return convert("pose", [&] { return pose_from(j); });
}

std::string clip_to_json(const PoseClip& clip) {
    json frames = json::array();
    for (const Pose& p : clip.frames) {
        frames.push_back(pose_json(p));
    }
    return json{{"fps", clip.fps}, {"frames", frames}}.dump(2);
}

PoseClip clip_from_json(const std::string& text) {
    const json j = parse(text, "clip");
    return convert("clip", [&] {
        PoseClip clip;
        clip.fps = j.value("fps", 30.0);
        if (!(clip.fps > 0.0)) {
            throw FormatError(FormatErrorKind::kCorrupt, "clip fps must be positive");
        }
        for (const json& f : j.at("frames")) {
            clip.frames.push_back(pose_from(f));
        }
        if (clip.frames.empty()) {
            throw FormatError(FormatErrorKind::kCorrupt, "clip has no frames");
        }
        for (const Pose& p : clip.frames) {
            if (p.joint_rotations.size() != clip.frames.front().joint_rotations.size()) {
                throw FormatError(FormatErrorKind::kCorrupt, "clip frames disagree on the joint count");
            }
        }
        return clip;
    });
}

Skeleton load_skeleton(const std::filesystem::path& path) { return skeleton_from_json(read_text(path)); }
void save_skeleton(const std::filesystem::path& path, const Skeleton& skeleton) {
    write_text(path, skeleton_to_json(skeleton));
}
Pose load_pose(const std::filesystem::path& path) { return pose_from_json(read_text(path)); }
void save_pose(const std::filesystem::path& path, const Pose& pose) { write_text(path, pose_to_json(pose)); }
Camera load_camera(const std::filesystem::path& path) { return camera_from_json(read_text(path)); }
PoseClip load_clip(const std::filesystem::path& path) { return clip_from_json(read_text(path)); }
void save_clip(const std::filesystem::path& path, const PoseClip& clip) { write_text(path, clip_to_json(clip)); }

SkinnedMesh load_skinned_mesh(const std::filesystem::path& path) {
    const json j = parse(read_text(path), "skinned mesh");
    return convert("skinned mesh", [&] {
        SkinnedMesh mesh;
        if (j.contains("obj")) {
            mesh.vertices = read_obj_vertices(resolve(path.parent_path(), j.at("obj").get<std::string>()));
        } else {
            for (const json& v : j.at("vertices")) {
                mesh.vertices.push_back(vec_from(v));
            }
        }
        for (const json& list : j.at("weights")) {
            auto& out = mesh.weights.emplace_back();
            for (const json& pair : list) {
                const int joint = pair.at(0).get<int>();
                if (joint < 0 || joint > 0xffff) {
                    throw FormatError(FormatErrorKind::kCorrupt, fmt::format("joint index {} out of range", joint));
                }
                out.push_back({static_cast<std::uint16_t>(joint), pair.at(1).get<float>()});
            }
        }
        if (mesh.weights.size() != mesh.vertices.size()) {
            throw FormatError(FormatErrorKind::kCountMismatch,
                              fmt::format("{} weight lists for {} vertices", mesh.weights.size(), mesh.vertices.size()));
        }
        return mesh;
    });
}

void save_skinned_mesh(const std::filesystem::path& path, const SkinnedMesh& mesh) {
    json vertices = json::array();
    for (const Vec3& v : mesh.vertices) {
        vertices.push_back(vec_json(v));
    }
    json weights = json::array();
    for (const auto& list : mesh.weights) {
        json entry = json::array();
        for (const JointWeight& jw : list) {
            entry.push_back(json::array({jw.joint, jw.weight}));
        }
        weights.push_back(entry);
    }
    write_text(path, json{{"vertices", vertices}, {"weights", weights}}.dump());
}

SceneManifest load_scene(const std::filesystem::path& path) {
    const json j = parse(read_text(path), "scene");
    SceneManifest scene = convert("scene", [&] {
        SceneManifest s;
        s.directory = path.parent_path();
        const json& bounds = j.at("bounds");
        s.grid.bounds = {vec_from(bounds.at("lo")), vec_from(bounds.at("hi"))};
        s.grid.resolution = j.value("resolution", 64u);
        s.grid.validate();
        s.sh_degree = j.value("sh_degree", 2);
        s.channels = j.value("channels", 3);
        if (j.contains("skeleton")) {
            s.skeleton_path = resolve(s.directory, j.at("skeleton").get<std::string>());
        }
        for (const json& c : j.at("cameras")) {
            s.cameras.push_back(camera_from(c));
        }
        if (s.cameras.empty()) {
            throw FormatError(FormatErrorKind::kCorrupt, "scene has no cameras");
        }
        for (const json& f : j.at("frames")) {
            SceneManifest::Frame frame;
            if (f.contains("pose")) {
                frame.has_pose = true;
                frame.pose = f.at("pose").is_string()
                                 ? load_pose(resolve(s.directory, f.at("pose").get<std::string>()))
                                 : pose_from(f.at("pose"));
            }
            for (const json& image : f.at("images")) {
                frame.images.push_back(resolve(s.directory, image.get<std::string>()));
            }
            if (frame.images.size() != s.cameras.size()) {
                throw FormatError(FormatErrorKind::kCountMismatch,
                                  fmt::format("frame lists {} images for {} cameras", frame.images.size(),
                                              s.cameras.size()));
            }
            s.frames.push_back(std::move(frame));
        }
        if (s.frames.empty()) {
            throw FormatError(FormatErrorKind::kCorrupt, "scene has no frames");
        }
        s.probe = j.value("probe", std::vector<std::size_t>{});
        if (j.contains("train")) {
            s.train = j.at("train").get<std::vector<std::size_t>>();
        } else {
            for (std::size_t c = 0; c < s.cameras.size(); ++c) {
                if (std::find(s.probe.begin(), s.probe.end(), c) == s.probe.end()) {
                    s.train.push_back(c);
                }
            }
        }
        s.probe_frame = j.value("probe_frame", std::size_t{0});
        for (const std::size_t c : s.train) {
            if (c >= s.cameras.size()) throw FormatError(FormatErrorKind::kCorrupt, "train camera index out of range");
        }
        for (const std::size_t c : s.probe) {
            if (c >= s.cameras.size()) throw FormatError(FormatErrorKind::kCorrupt, "probe camera index out of range");
        }
        if (s.probe_frame >= s.frames.size()) {
            throw FormatError(FormatErrorKind::kCorrupt, "probe frame index out of range");
        }
        return s;
    });
    if (!scene.skeleton_path.empty()) {
        require_file(scene.skeleton_path);
    }
    for (const auto& frame : scene.frames) {
        for (const auto& image : frame.images) {
            require_file(image);
        }
    }
    return scene;
}

void save_scene(const std::filesystem::path& path, const SceneManifest& scene) {
    const std::filesystem::path base = path.parent_path();
    const auto relative = [&](const std::filesystem::path& p) {
        return base.empty() ? p.generic_string() : std::filesystem::relative(p, base).generic_string();
    };
    json cameras = json::array();
    for (const Camera& c : scene.cameras) {
        cameras.push_back(camera_json(c));
    }
    json frames = json::array();
    for (const auto& frame : scene.frames) {
        json images = json::array();
        for (const auto& image : frame.images) {
            images.push_back(relative(image));
        }
        json entry{{"images", images}};
        if (frame.has_pose) {
            entry["pose"] = pose_json(frame.pose);
        }
        frames.push_back(entry);
    }
    json j{{"bounds", {{"lo", vec_json(scene.grid.bounds.lo)}, {"hi", vec_json(scene.grid.bounds.hi)}}},
           {"resolution", scene.grid.resolution},
           {"sh_degree", scene.sh_degree},
           {"channels", scene.channels},
           {"cameras", cameras},
           {"frames", frames},
           {"train", scene.train},
           {"probe", scene.probe},
           {"probe_frame", scene.probe_frame}};
    if (!scene.skeleton_path.empty()) {
        j["skeleton"] = relative(scene.skeleton_path);
    }
    write_text(path, j.dump(2));
}

FitDataset load_fit_dataset(const SceneManifest& scene) {
    FitDataset data;
    data.cameras = scene.cameras;
    data.train_cameras = scene.train;
    data.probe_cameras = scene.probe;
    data.probe_frame = scene.probe_frame;
    const std::size_t joints = scene.skeleton_path.empty() ? 1 : load_skeleton(scene.skeleton_path).size();
    for (const auto& frame : scene.frames) {
        FitFrame f;
        f.pose = frame.has_pose ? frame.pose : Pose::canonical(joints);
        for (const auto& path : frame.images) {
            f.images.push_back(premultiply(read_png(path)));
        }
        data.frames.push_back(std::move(f));
    }
    data.validate();
    return data;
}

}  // namespace nvo
