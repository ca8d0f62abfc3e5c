// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/synthetic.hpp"

#include "nvo/error.hpp"
#include "nvo/image_io.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace nvo {

namespace {

bool clip_to_box(const Aabb& box, const Ray& ray, double& t0, double& t1) {
    t0 = 0.0;
    t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        const double o = ray.origin[a];
        const double d = ray.direction[a];
        if (d == 0.0) {
            if (o < box.lo[a] || o > box.hi[a]) {
                return false;
            }
            continue;
        }
        double near = (box.lo[a] - o) / d;
        double far = (box.hi[a] - o) / d;
        if (near > far) {
            std::swap(near, far);
        }
        t0 = std::max(t0, near);
        t1 = std::min(t1, far);
    }
    return t0 < t1;
}

bool clip_to_ball(const Vec3& center, double radius, const Ray& ray, double& t0, double& t1) {
    if (!std::isfinite(radius)) {
        return true;
    }
    const Vec3 oc = ray.origin - center;
    const double b = oc.dot(ray.direction);
    const double disc = b * b - (oc.squaredNorm() - radius * radius);
    if (disc <= 0.0) {
        return false;
    }
    const double root = std::sqrt(disc);
    t0 = std::max(t0, -b - root);
    t1 = std::min(t1, -b + root);
    return t0 < t1;
}

double smoothstep(double e0, double e1, double x) {
    const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

std::uint32_t hash3(std::int32_t x, std::int32_t y, std::int32_t z) {
    std::uint32_t h = static_cast<std::uint32_t>(x) * 0x8da6b343u ^ static_cast<std::uint32_t>(y) * 0xd8163841u ^
                      static_cast<std::uint32_t>(z) * 0xcb1ab31fu;
    h ^= h >> 16;
    h *= 0x7feb352du;
    h ^= h >> 15;
    h *= 0x846ca68bu;
    h ^= h >> 16;
    return h;
}

/// Trilinear value noise in [0, 1].
double value_noise(const Vec3& p) {
    const Vec3 f = p.array().floor();
    const Vec3 t = p - f;
    const Vec3 w(smoothstep(0, 1, t.x()), smoothstep(0, 1, t.y()), smoothstep(0, 1, t.z()));
    const auto ix = static_cast<std::int32_t>(f.x()), iy = static_cast<std::int32_t>(f.y()),
               iz = static_cast<std::int32_t>(f.z());
    double sum = 0.0;
    for (int c = 0; c < 8; ++c) {
        const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
        const double v = hash3(ix + dx, iy + dy, iz + dz) / 4294967295.0;
        sum += v * (dx ? w.x() : 1 - w.x()) * (dy ? w.y() : 1 - w.y()) * (dz ? w.z() : 1 - w.z());
    }
    return sum;
}

constexpr double kBoneLength = 0.8;
constexpr double kCapsuleRadius = 0.25;
constexpr double kCapsuleEdge = 0.06;
constexpr double kCapsuleDensity = 15.0;

/// Density and color of one bone's capsule in canonical coordinates.
struct BoneSample {
    double density;
    Vec3 color;
};

BoneSample bone_part(int bone, const Vec3& q) {
    const double lo = bone == 0 ? -kBoneLength : 0.0;
    const double hi = bone == 0 ? 0.0 : kBoneLength;
    const Vec3 axis_point(std::clamp(q.x(), lo, hi), 0.0, 0.0);
    const double d = (q - axis_point).norm();
    const double shell = 1.0 - smoothstep(kCapsuleRadius - kCapsuleEdge, kCapsuleRadius + kCapsuleEdge, d);
    if (shell <= 0.0) {
        return {0.0, Vec3::Zero()};
    }
    const double fur = value_noise(q * 10.0);
    const Vec3 base = bone == 0 ? Vec3(0.85, 0.55, 0.3) : Vec3(0.3, 0.55, 0.85);
    return {kCapsuleDensity * shell * (0.55 + 0.45 * fur), base * (0.75 + 0.25 * value_noise(q * 4.0 + Vec3(5, 5, 5)))};
}

}  // namespace

MarchSample march_ray(const AnalyticField& field, const Ray& ray, double step) {
    if (!(step > 0.0)) {
        throw ContractError("march step must be positive");
    }
    MarchSample out;
    double t0 = 0.0, t1 = 0.0;
    if (!clip_to_box(field.bounds, ray, t0, t1) ||
        !clip_to_ball(field.bounds.center(), field.support_radius, ray, t0, t1)) {
        return out;
    }
    double transmittance = 1.0;
    const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / step));
    for (std::size_t k = 0; k < steps; ++k) {
        const double a = t0 + static_cast<double>(k) * step;
        const double b = std::min(a + step, t1);
        if (!(b > a)) {
            break;
        }
        const Vec3 p = ray.origin + 0.5 * (a + b) * ray.direction;
        const double sigma = field.density(p);
        if (sigma <= 0.0) {
            continue;
        }
        const double absorbed = transmittance * -std::expm1(-sigma * (b - a));
        const Vec3 c = field.color(p, ray.direction);
        for (int ch = 0; ch < 3; ++ch) {
            out.color[ch] += absorbed * c[ch];
        }
        out.alpha += absorbed;
        transmittance *= std::exp(-sigma * (b - a));
    }
    return out;
}

Image march_image(const AnalyticField& field, const Camera& camera, double step) {
    Image image(camera.width, camera.height, 4);
    tbb::parallel_for(tbb::blocked_range<int>(0, camera.height), [&](const tbb::blocked_range<int>& rows) {
        for (int y = rows.begin(); y != rows.end(); ++y) {
            for (int x = 0; x < camera.width; ++x) {
                const MarchSample s = march_ray(field, ray_from_pixel(camera, Vec2(x, y)), step);
                for (int c = 0; c < 3; ++c) {
                    image.at(x, y, c) = static_cast<float>(s.color[c]);
                }
                image.at(x, y, 3) = static_cast<float>(s.alpha);
            }
        }
    });
    return image;
}

AnalyticField fuzzy_sphere_field(const Aabb& bounds, const FuzzySphereParams& params) {
    AnalyticField field;
    field.bounds = bounds;
    const Vec3 center = bounds.center();
    field.density = [center, params](const Vec3& p) {
        const double r = (p - center).norm();
        if (r <= params.core_radius) {
            return params.core_density;
        }
        const double u = (r - params.core_radius) / params.falloff;
        return params.core_density * std::exp(-u * u);
    };
    field.color = [center](const Vec3& p, const Vec3&) {
        const Vec3 q = p - center;
        return Vec3(0.5 + 0.3 * std::sin(3.0 * q.x() + 0.4), 0.5 + 0.3 * std::sin(2.5 * q.y() + 1.3),
                    0.5 + 0.3 * std::cos(2.0 * q.z() + 0.2 * q.x()));
    };
    // exp(-16) of the core density is far below any test tolerance.
    field.support_radius = params.core_radius + 4.0 * params.falloff;
    return field;
}

Skeleton capsule_skeleton() {
    return Skeleton({Joint{"root", -1, RigidTransform::identity()}, Joint{"elbow", 0, RigidTransform::identity()}});
}

AnalyticField capsule_field(const Aabb& bounds, const Skeleton& skeleton, const Pose& pose) {
    if (skeleton.size() != 2) {
        throw ContractError("the capsule field needs the two-bone skeleton");
    }
    const std::vector<RigidTransform> live = forward_kinematics(skeleton, pose);
    std::array<RigidTransform, 2> to_canonical;
    for (int b = 0; b < 2; ++b) {
        to_canonical[b] = (live[b] * skeleton.canonical_globals()[b].inverse()).inverse();
    }
    const auto sample = [to_canonical](const Vec3& p) {
        BoneSample best{0.0, Vec3::Zero()};
        for (int b = 0; b < 2; ++b) {
            const BoneSample s = bone_part(b, to_canonical[b].apply_point(p));
            if (s.density > best.density) {
                best = s;
            }
        }
        return best;
    };
    AnalyticField field;
    field.bounds = bounds;
    field.density = [sample](const Vec3& p) { return sample(p).density; };
    field.color = [sample](const Vec3& p, const Vec3&) { return sample(p).color; };
    field.support_radius = kBoneLength + kCapsuleRadius + kCapsuleEdge;
    return field;
}

SkinnedMesh capsule_mesh(std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss;
    SkinnedMesh mesh;
    for (std::size_t s = 0; s < samples; ++s) {
        Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
        dir.normalize();
        const double x = (2.0 * unit(rng) - 1.0) * (kBoneLength + kCapsuleRadius);
        Vec3 p;
        if (std::abs(x) <= kBoneLength) {
            dir.x() = 0.0;
            if (dir.norm() < 1e-9) {
                dir = Vec3::UnitY();
            }
            p = Vec3(x, 0.0, 0.0) + kCapsuleRadius * dir.normalized();
        } else {
            dir.x() = std::copysign(std::abs(dir.x()), x);
            p = Vec3(std::copysign(kBoneLength, x), 0.0, 0.0) + kCapsuleRadius * dir;
        }
        const double w1 = smoothstep(-0.1, 0.1, p.x());
        std::vector<JointWeight> weights;
        if (w1 < 1.0) {
            weights.push_back({0, static_cast<float>(1.0 - w1)});
        }
        if (w1 > 0.0) {
            weights.push_back({1, static_cast<float>(w1)});
        }
        mesh.vertices.push_back(p);
        mesh.weights.push_back(std::move(weights));
    }
    return mesh;
}

std::vector<Pose> capsule_poses(double bend_rad) {
    Pose straight = Pose::canonical(2);
    Pose bent = straight;
    bent.joint_rotations[1] = Vec3(0.0, 0.0, bend_rad);
    return {straight, bent};
}

std::vector<Camera> ring_cameras(std::size_t count, double elevation_rad, double azimuth_offset_rad, double radius,
                                 double vertical_fov_rad, int size) {
    std::vector<Camera> cameras;
    for (std::size_t k = 0; k < count; ++k) {
        const double azimuth = azimuth_offset_rad + 2.0 * std::numbers::pi * static_cast<double>(k) / count;
        cameras.push_back(orbit_camera(azimuth, elevation_rad, radius, Vec3::Zero(), vertical_fov_rad, size, size));
    }
    return cameras;
}

SyntheticScene make_synthetic_scene(const SyntheticSpec& spec) {
    SyntheticScene scene;
    scene.grid.resolution = spec.resolution;
    scene.grid.bounds = {Vec3::Constant(-1.0), Vec3::Constant(1.0)};
    scene.grid.validate();
    const double step = scene.grid.cell_size() * spec.step_fraction;
    constexpr double deg = std::numbers::pi / 180.0;

    std::vector<Camera> cameras;
    const std::size_t upper = (spec.train_views + 1) / 2;
    for (const Camera& c : ring_cameras(upper, 20.0 * deg, 0.0, spec.camera_radius, spec.vertical_fov_rad,
                                        spec.image_size)) {
        cameras.push_back(c);
    }
    for (const Camera& c : ring_cameras(spec.train_views - upper, -20.0 * deg, 180.0 * deg / std::max<std::size_t>(upper, 1),
                                        spec.camera_radius, spec.vertical_fov_rad, spec.image_size)) {
        cameras.push_back(c);
    }
    for (const Camera& c : ring_cameras(spec.probe_views, 5.0 * deg, 45.0 * deg + 7.0 * deg, spec.camera_radius,
                                        spec.vertical_fov_rad, spec.image_size)) {
        cameras.push_back(c);
    }
    scene.dataset.cameras = cameras;
    for (std::size_t c = 0; c < spec.train_views; ++c) {
        scene.dataset.train_cameras.push_back(c);
    }
    for (std::size_t c = 0; c < spec.probe_views; ++c) {
        scene.dataset.probe_cameras.push_back(spec.train_views + c);
    }

    std::vector<Pose> poses;
    if (spec.kind == SyntheticKind::kFuzzySphere) {
        scene.skeleton = Skeleton::single_joint();
        scene.mesh.vertices = {Vec3::Zero()};
        scene.mesh.weights = {{JointWeight{0, 1.0f}}};
        poses = {Pose::canonical(1)};
    } else {
        scene.skeleton = capsule_skeleton();
        scene.mesh = capsule_mesh(4000, spec.seed);
        poses = capsule_poses(spec.bend_rad);
    }
    for (const Pose& pose : poses) {
        const AnalyticField field = spec.kind == SyntheticKind::kFuzzySphere
                                        ? fuzzy_sphere_field(scene.grid.bounds)
                                        : capsule_field(scene.grid.bounds, scene.skeleton, pose);
        FitFrame frame;
        frame.pose = pose;
        for (const Camera& camera : cameras) {
            frame.images.push_back(march_image(field, camera, step));
        }
        scene.dataset.frames.push_back(std::move(frame));
    }
    scene.dataset.validate();
    return scene;
}

std::filesystem::path save_synthetic_scene(const SyntheticScene& scene, const std::filesystem::path& directory,
                                           int sh_degree) {
    std::filesystem::create_directories(directory / "images");
    SceneManifest manifest;
    manifest.directory = directory;
    manifest.grid = scene.grid;
    manifest.sh_degree = sh_degree;
    manifest.channels = 3;
    manifest.cameras = scene.dataset.cameras;
    manifest.train = scene.dataset.train_cameras;
    manifest.probe = scene.dataset.probe_cameras;
    manifest.probe_frame = scene.dataset.probe_frame;
    manifest.skeleton_path = directory / "rig.skel.json";
    save_skeleton(manifest.skeleton_path, scene.skeleton);
    save_skinned_mesh(directory / "rig.skin.json", scene.mesh);
    for (std::size_t f = 0; f < scene.dataset.frames.size(); ++f) {
        SceneManifest::Frame frame;
        frame.pose = scene.dataset.frames[f].pose;
        frame.has_pose = true;
        for (std::size_t c = 0; c < scene.dataset.cameras.size(); ++c) {
            const auto path = directory / "images" / fmt::format("f{:02}_c{:03}.png", f, c);
            write_png(path, unpremultiply(scene.dataset.frames[f].images[c]));
            frame.images.push_back(path);
        }
        manifest.frames.push_back(std::move(frame));
    }
    const auto path = directory / "scene.scene.json";
    save_scene(path, manifest);
    return path;
}

Asset make_benchmark_asset(std::size_t voxels, std::uint64_t seed) {
    if (voxels == 0) {
        throw ContractError("benchmark asset needs at least one voxel");
    }
    const double radius = std::cbrt(3.0 * static_cast<double>(voxels) / (4.0 * std::numbers::pi));
    std::uint32_t resolution = 2;
    while (0.35 * resolution < radius + 1.0) {
        resolution *= 2;
    }
    Asset asset;
    asset.voxels.grid.resolution = resolution;
    asset.voxels.grid.bounds = {Vec3::Constant(-1.0), Vec3::Constant(1.0)};
    asset.voxels.grid.validate();

    // Candidates in a box slightly larger than the ball, ranked by distance.
    const double center = 0.5 * resolution;
    const int half = static_cast<int>(std::ceil(radius)) + 2;
    struct Candidate {
        double distance;
        std::uint64_t morton;
    };
    std::vector<Candidate> candidates;
    for (int k = -half; k < half; ++k) {
        for (int j = -half; j < half; ++j) {
            for (int i = -half; i < half; ++i) {
                const GridCoord c{static_cast<std::uint32_t>(center + i), static_cast<std::uint32_t>(center + j),
                                  static_cast<std::uint32_t>(center + k)};
                const Vec3 d(i + 0.5, j + 0.5, k + 0.5);
                candidates.push_back({d.norm(), morton_encode(c)});
            }
        }
    }
    if (candidates.size() < voxels) {
        throw ContractError("benchmark ball does not fit its candidate box");
    }
    std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(voxels - 1),
                     candidates.end(), [](const Candidate& a, const Candidate& b) {
                         return a.distance != b.distance ? a.distance < b.distance : a.morton < b.morton;
                     });
    candidates.resize(voxels);
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.morton < b.morton; });
    asset.voxels.cells.reserve(voxels);
    for (const Candidate& c : candidates) {
        asset.voxels.cells.push_back(morton_decode(c.morton));
    }

    asset.skeleton = capsule_skeleton();
    std::vector<std::vector<JointWeight>> weights(voxels);
    const double blend = 0.25;
    for (std::size_t v = 0; v < voxels; ++v) {
        const double x = asset.voxels.grid.cell_center(asset.voxels.cells[v]).x();
        const float w1 = static_cast<float>(std::clamp((x + blend) / (2.0 * blend), 0.0, 1.0));
        if (w1 <= 0.0f) {
            weights[v] = {{0, 1.0f}};
        } else if (w1 >= 1.0f) {
            weights[v] = {{1, 1.0f}};
        } else {
            weights[v] = {{0, 1.0f - w1}, {1, w1}};
        }
    }
    asset.weights = SkinWeights(weights);

    asset.flut = Flut(voxels, 2, 3);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> coefficient(-0.1f, 0.1f);
    const float density = static_cast<float>(0.5 / asset.voxels.grid.cell_size());
    for (std::size_t v = 0; v < voxels; ++v) {
        for (int h = 0; h < asset.flut.basis_count(); ++h) {
            for (int c = 0; c < 3; ++c) {
                asset.flut.coefficient(v, h, c) = h == 0 ? 1.0f + coefficient(rng) : coefficient(rng);
            }
        }
        asset.flut.density(v) = density;
    }
    asset.validate();
    return asset;
}

Pose benchmark_pose() { return capsule_poses(0.5)[1]; }

}  // namespace nvo
