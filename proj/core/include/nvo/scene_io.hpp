// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// JSON text formats. All vectors are arrays of numbers, quaternions are
// [w, x, y, z], angles are radians and relative paths resolve against the
// file that references them.
//
//   camera      {"width", "height", "fx", "fy", "cx", "cy",
//                "world_to_camera": {"rotation": [w,x,y,z], "translation": [x,y,z]}}
//   .skel.json  {"joints": [{"name", "parent" (-1 for the root),
//                            "rotation": [w,x,y,z], "translation": [x,y,z]}]}
//               (bind transform from the joint frame to its parent frame)
//   pose        {"rotations": [[x,y,z] per joint], "root_rotation": [x,y,z],
//                "root_translation": [x,y,z]}   Euler XYZ: R = Rx Ry Rz
//   .clip.json  {"fps", "frames": [pose, ...]}
//   .skin.json  {"vertices": [[x,y,z], ...] or "obj": "mesh.obj",
//                "weights": [[[joint, weight], ...] per vertex]}
//   .scene.json {"bounds": {"lo": [x,y,z], "hi": [x,y,z]}, "resolution",
//                "sh_degree", "channels", "skeleton" (optional path),
//                "cameras": [camera, ...],
//                "frames": [{"pose": path or inline pose (optional, canonical),
//                            "images": [png path per camera]}],
//                "train": [camera indices] (default all but probe),
//                "probe": [camera indices] (default none), "probe_frame"}

#include "nvo/camera.hpp"
#include "nvo/fitter.hpp"
#include "nvo/skeleton.hpp"
#include "nvo/skinning.hpp"
#include "nvo/voxel_set.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nvo {

struct PoseClip {
    double fps = 30.0;
    std::vector<Pose> frames;
};

struct SceneManifest {
    std::filesystem::path directory;
    VoxelGrid grid;
    int sh_degree = 2;
    int channels = 3;
    /// Empty when the scene is unrigged.
    std::filesystem::path skeleton_path;
    std::vector<Camera> cameras;
    struct Frame {
        Pose pose;
        bool has_pose = false;
        std::vector<std::filesystem::path> images;
    };
    std::vector<Frame> frames;
    std::vector<std::size_t> train;
    std::vector<std::size_t> probe;
    std::size_t probe_frame = 0;
};

/// JSON text of the formats above. Parsers throw FormatError (kSyntax for
/// malformed JSON, kCorrupt for schema violations).
std::string camera_to_json(const Camera& camera);
Camera camera_from_json(const std::string& text);
std::string skeleton_to_json(const Skeleton& skeleton);
Skeleton skeleton_from_json(const std::string& text);
std::string pose_to_json(const Pose& pose);
Pose pose_from_json(const std::string& text);
std::string clip_to_json(const PoseClip& clip);
PoseClip clip_from_json(const std::string& text);

Skeleton load_skeleton(const std::filesystem::path& path);
void save_skeleton(const std::filesystem::path& path, const Skeleton& skeleton);
Pose load_pose(const std::filesystem::path& path);
void save_pose(const std::filesystem::path& path, const Pose& pose);
Camera load_camera(const std::filesystem::path& path);
PoseClip load_clip(const std::filesystem::path& path);
void save_clip(const std::filesystem::path& path, const PoseClip& clip);
/// Reads vertices inline or from the "v" lines of an OBJ file.
SkinnedMesh load_skinned_mesh(const std::filesystem::path& path);
void save_skinned_mesh(const std::filesystem::path& path, const SkinnedMesh& mesh);

/// Parses the manifest and checks that every referenced file exists.
SceneManifest load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const SceneManifest& scene);
/// Loads the manifest's images (straight alpha PNG) premultiplied.
FitDataset load_fit_dataset(const SceneManifest& scene);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace nvo
