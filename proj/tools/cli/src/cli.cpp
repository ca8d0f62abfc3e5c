// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#include "nvo/cli/cli.hpp"

#include "nvo/asset.hpp"
#include "nvo/carve.hpp"
#include "nvo/error.hpp"
#include "nvo/fitter.hpp"
#include "nvo/image_io.hpp"
#include "nvo/parallel.hpp"
#include "nvo/renderer.hpp"
#include "nvo/scene_io.hpp"
#include "nvo/service/server.hpp"
#include "nvo/service/view.hpp"
#include "nvo/skinning.hpp"
#include "nvo/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

namespace nvo::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr double kDefaultLambdaTh = 0.01;
constexpr std::size_t kMinTimedFrames = 20;

class Log {
public:
    Log(std::ostream& out, std::ostream& err, bool json_mode) : out_(out), err_(err), json_(json_mode) {}

    /// Progress and diagnostics (stderr).
    void note(const std::string& event, json fields, const std::string& human) const {
        if (json_) {
            fields["event"] = event;
            err_ << fields.dump() << '\n';
        } else {
            err_ << human << '\n';
        }
    }
    /// Command results (stdout).
    void result(const std::string& event, json fields, const std::string& human) const {
        if (json_) {
            fields["event"] = event;
            out_ << fields.dump() << '\n';
        } else {
            out_ << human << '\n';
        }
    }
    std::ostream& out() const { return out_; }

private:
    std::ostream& out_;
    std::ostream& err_;
    bool json_;
};

struct CameraArgs {
    std::string camera_path;
    std::optional<double> azimuth;
    std::optional<double> elevation;
    std::optional<double> radius;
    std::optional<double> fov;
    int width = 512;
    int height = 512;
    double scale = 1.0;
};

void add_camera_options(CLI::App* app, CameraArgs& args) {
    auto* camera = app->add_option("--camera", args.camera_path, "Camera JSON (overrides the orbit options)");
    const std::array<CLI::Option*, 4> orbit = {
        app->add_option("--azimuth", args.azimuth, "Orbit azimuth in radians from +x (default 0)"),
        app->add_option("--elevation", args.elevation, "Orbit elevation in radians (default 0.3)"),
        app->add_option("--radius", args.radius, "Orbit radius (default 1.5 grid widths)"),
        app->add_option("--fov", args.fov, "Vertical field of view in radians (default 0.785)"),
    };
    for (CLI::Option* o : orbit) {
        camera->excludes(o);
    }
    camera->excludes(app->add_option("--width", args.width, "Image width for the orbit camera")
                         ->check(CLI::Range(1, 8192)));
    camera->excludes(app->add_option("--height", args.height, "Image height for the orbit camera")
                         ->check(CLI::Range(1, 8192)));
    app->add_option("--scale", args.scale, "Character scale; s > 1 moves the camera s times closer")
        ->check(CLI::PositiveNumber);
}

Camera camera_from_args(const Asset& asset, const CameraArgs& args) {
    if (!args.camera_path.empty()) {
        return service::scaled_camera(load_camera(args.camera_path), args.scale);
    }
    service::OrbitView view = service::default_view(asset);
    view.azimuth = args.azimuth.value_or(view.azimuth);
    view.elevation = args.elevation.value_or(view.elevation);
    view.radius = args.radius.value_or(view.radius);
    view.vertical_fov = args.fov.value_or(view.vertical_fov);
    view.width = args.width;
    view.height = args.height;
    return service::make_camera(view, args.scale);
}

struct StageSamples {
    std::vector<double> warp, build, render, total;

    void add(const StageTimings& t) {
        warp.push_back(t.warp_ms);
        build.push_back(t.build_ms);
        render.push_back(t.render_ms);
        total.push_back(t.warp_ms + t.build_ms + t.render_ms);
    }
    std::size_t size() const { return total.size(); }
};

struct StageRow {
    const char* name;
    double median_ms;
    double reference_ms;
};

/// Published GPU timings of the same three stages at grid resolution 512,
/// shown next to CPU numbers for orientation only.
constexpr std::array<double, 4> kReferenceGpuMs = {1.950, 7.990, 4.521, 14.461};

std::array<StageRow, 4> stage_rows(const StageSamples& s) {
    return {{{"warp", median(s.warp), kReferenceGpuMs[0]},
             {"build octree", median(s.build), kReferenceGpuMs[1]},
             {"volume render", median(s.render), kReferenceGpuMs[2]},
             {"total", median(s.total), kReferenceGpuMs[3]}}};
}

void print_stage_table(std::ostream& out, const StageSamples& s, bool with_reference) {
    out << fmt::format("{:<16}{:>14}", "stage", "median_ms");
    if (with_reference) {
        out << fmt::format("{:>20}", "reference_gpu_ms");
    }
    out << '\n';
    for (const StageRow& row : stage_rows(s)) {
        out << fmt::format("{:<16}{:>14.3f}", row.name, row.median_ms);
        if (with_reference) {
            out << fmt::format("{:>20.3f}", row.reference_ms);
        }
        out << '\n';
    }
    out << fmt::format("frames: {} (medians; warmup excluded)\n", s.size());
}

json stage_json(const StageSamples& s, bool with_reference) {
    json rows = json::array();
    for (const StageRow& row : stage_rows(s)) {
        json r{{"stage", row.name}, {"median_ms", row.median_ms}};
        if (with_reference) {
            r["reference_gpu_ms"] = row.reference_ms;
        }
        rows.push_back(r);
    }
    return {{"frames", s.size()}, {"stages", rows}};
}

bool is_canonical(const Pose& pose) {
    const auto zero = [](const Vec3& v) { return v.isZero(0.0); };
    return std::all_of(pose.joint_rotations.begin(), pose.joint_rotations.end(), zero) && zero(pose.root_rotation) &&
           zero(pose.root_translation);
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCategory::kIo, fmt::format("cannot create directory '{}': {}", dir.string(), ec.message()));
    }
}

// --- carve ------------------------------------------------------------------

struct CarveArgs {
    std::string scene;
    std::string out;
    std::string report;
    std::size_t frame = 0;
    int dilation = 5;
    double alpha_threshold = 0.005;
    bool keep_unobserved = false;
};

void run_carve(const CarveArgs& a, const Log& log) {
    const SceneManifest scene = load_scene(a.scene);
    if (a.frame >= scene.frames.size()) {
        throw ContractError(fmt::format("scene has {} frames, --frame {} does not exist", scene.frames.size(), a.frame));
    }
    const SceneManifest::Frame& frame = scene.frames[a.frame];
    if (frame.has_pose && !is_canonical(frame.pose)) {
        throw ContractError(fmt::format("frame {} is not in the canonical pose", a.frame));
    }
    std::vector<CarveView> views;
    for (const std::size_t c : scene.train) {
        views.push_back({scene.cameras[c], read_png(frame.images[c])});
    }
    CarveOptions options;
    options.dilation_radius_px = a.dilation;
    options.alpha_threshold = a.alpha_threshold;
    options.keep_unobserved = a.keep_unobserved;
    CarveReport report;
    Asset asset;
    asset.voxels = carve_volume(views, scene.grid, options, &report);
    const std::size_t n = asset.voxels.size();
    asset.flut = Flut(n, scene.sh_degree, scene.channels);
    asset.skeleton = Skeleton::single_joint();
    asset.weights = SkinWeights::rigid(n);
    save_asset_file(asset, a.out);

    const json summary{{"candidate_cells", report.candidate_cells},
                       {"surviving_cells", report.surviving_cells},
                       {"per_view_survivors", report.per_view_survivors},
                       {"views", views.size()}};
    if (!a.report.empty()) {
        write_text(a.report, summary.dump(2));
    }
    log.result("carve_done", summary,
               fmt::format("carved {} of {} cells from {} views -> {}", report.surviving_cells,
                           report.candidate_cells, views.size(), a.out));
}

// --- bake -------------------------------------------------------------------

struct BakeArgs {
    std::string voxels;
    std::string skeleton;
    std::string mesh;
    std::string out;
    int neighbors = 4;
    std::string sign = "nearer";
};

void run_bake(const BakeArgs& a, const Log& log) {
    Asset asset = load_asset_file(a.voxels);
    const Skeleton skeleton = load_skeleton(a.skeleton);
    const SkinnedMesh mesh = load_skinned_mesh(a.mesh);
    mesh.validate(skeleton.size());
    BakeOptions options;
    options.neighbors = a.neighbors;
    options.sign = a.sign == "farther" ? BlendSign::kFarther : BlendSign::kNearer;
    BakeResult baked = bake_skinning_weights(asset.voxels, mesh, options);
    for (const std::string& w : baked.warnings) {
        log.note("warning", {{"message", w}}, "warning: " + w);
    }
    asset.skeleton = skeleton;
    asset.weights = std::move(baked.weights);
    save_asset_file(asset, a.out);
    log.result("bake_done",
               {{"voxels", asset.voxels.size()}, {"joints", skeleton.size()}, {"neighbors", baked.neighbors_used}},
               fmt::format("baked {} joints onto {} voxels ({} neighbors) -> {}", skeleton.size(),
                           asset.voxels.size(), baked.neighbors_used, a.out));
}

// --- fit --------------------------------------------------------------------

struct FitArgs {
    std::string scene;
    std::string asset;
    std::string out;
    std::string log_path;
    std::size_t iterations = 2000;
    std::size_t rays = 4096;
    double learning_rate = 0.02;
    double density_learning_rate = 0.0;
    double lambda_vrt = 0.01;
    std::uint64_t seed = 1;
    bool deterministic = false;
    bool fast = false;
    bool warm_start = false;
    std::string pose_sampling = "uniform";
    std::size_t probe_interval = 50;
};

void run_fit(const FitArgs& a, const Log& log) {
    const SceneManifest scene = load_scene(a.scene);
    const FitDataset dataset = load_fit_dataset(scene);
    Asset asset = load_asset_file(a.asset);

    FitConfig config;
    config.iterations = a.iterations;
    config.rays_per_batch = a.rays;
    config.adam.learning_rate = a.learning_rate;
    config.density_learning_rate = a.density_learning_rate;
    config.lambda_vrt = a.lambda_vrt;
    config.seed = a.seed;
    config.reduction = a.fast ? ReductionMode::kFast : ReductionMode::kDeterministic;
    config.warm_start = a.warm_start;
    config.pose_sampling = a.pose_sampling == "round-robin" ? PoseSampling::kRoundRobin : PoseSampling::kUniform;
    config.probe_interval = a.probe_interval;

    std::ofstream log_file;
    if (!a.log_path.empty()) {
        log_file.open(a.log_path, std::ios::trunc);
        if (!log_file) {
            throw Error(ErrorCategory::kIo, fmt::format("cannot open log '{}'", a.log_path));
        }
    }
    const auto progress = [&](const LossReport& r) {
        // The log file holds only seed-determined values so that it is
        // reproducible; throughput goes to the console.
        json line{{"iteration", r.iteration},
                  {"l_rgba", r.l_rgba},
                  {"l_vrt", r.l_vrt},
                  {"total", r.total},
                  {"collision_pairs", r.collision_pairs}};
        if (std::isfinite(r.probe_psnr)) {
            line["probe_psnr"] = r.probe_psnr;
        }
        if (log_file.is_open()) {
            log_file << line.dump() << '\n';
        }
        if ((r.iteration + 1) % config.probe_interval == 0 || r.iteration + 1 == config.iterations) {
            line["rays_per_second"] = r.rays_per_second;
            log.note("fit_progress", line,
                     fmt::format("iter {:>6}  loss {:.6f}  l_vrt {:.6f}  probe {:.2f} dB  {:.0f} rays/s",
                                 r.iteration + 1, r.total, r.l_vrt, r.probe_psnr, r.rays_per_second));
        }
    };
    FitResult result = fit(dataset, asset, config, progress);
    asset.flut = std::move(result.flut);
    save_asset_file(asset, a.out);
    if (log_file.is_open() && !log_file.flush()) {
        throw Error(ErrorCategory::kIo, fmt::format("failed writing log '{}'", a.log_path));
    }
    const LossReport& last = result.history.back();
    json summary{{"iterations", result.history.size()}, {"loss", last.total}, {"output", a.out}};
    if (std::isfinite(last.probe_psnr)) {
        summary["probe_psnr"] = last.probe_psnr;
    }
    log.result("fit_done", summary,
               fmt::format("fit {} iterations, final loss {:.6f}, probe PSNR {:.2f} dB -> {}", result.history.size(),
                           last.total, last.probe_psnr, a.out));
}

// --- render / animate -------------------------------------------------------

struct RenderArgs {
    std::string asset;
    std::string pose;
    std::string out;
    std::string depth;
    double lambda_th = kDefaultLambdaTh;
    bool no_early_stop = false;
    CameraArgs camera;
};

RenderOptions render_options(double lambda_th, bool no_early_stop) {
    RenderOptions options;
    options.early_stop = lambda_th;
    options.early_stop_enabled = !no_early_stop;
    options.validate();
    return options;
}

void run_render(const RenderArgs& a, const Log& log) {
    const Asset asset = load_asset_file(a.asset);
    const Pose pose = a.pose.empty() ? Pose::canonical(asset.skeleton.size()) : load_pose(a.pose);
    const Camera camera = camera_from_args(asset, a.camera);
    StageTimings timings;
    const FrameBuffers frame = render_frame(asset, pose, camera, render_options(a.lambda_th, a.no_early_stop), &timings);
    write_file(a.out, encode_frame_png(frame));
    if (!a.depth.empty()) {
        write_depth(a.depth, frame);
    }
    log.result("render_done",
               {{"output", a.out},
                {"width", frame.width},
                {"height", frame.height},
                {"warp_ms", timings.warp_ms},
                {"build_ms", timings.build_ms},
                {"render_ms", timings.render_ms}},
               fmt::format("rendered {}x{} -> {}", frame.width, frame.height, a.out));
}

struct AnimateArgs {
    std::string asset;
    std::string clip;
    std::string out_dir;
    std::string timings;
    std::size_t warmup = 2;
    std::size_t timed_frames = kMinTimedFrames;
    double lambda_th = kDefaultLambdaTh;
    bool no_early_stop = false;
    CameraArgs camera;
};

void run_animate(const AnimateArgs& a, const Log& log) {
    const Asset asset = load_asset_file(a.asset);
    const PoseClip clip = load_clip(a.clip);
    const Camera camera = camera_from_args(asset, a.camera);
    const RenderOptions options = render_options(a.lambda_th, a.no_early_stop);
    ensure_directory(a.out_dir);

    // Every clip frame is written once; a short clip is cycled (without
    // writing) until enough frames are timed.
    StageSamples samples;
    const std::size_t n = clip.frames.size();
    for (std::size_t k = 0; k < n || samples.size() < a.timed_frames; ++k) {
        const std::size_t f = k % n;
        StageTimings timings;
        const FrameBuffers frame = render_frame(asset, clip.frames[f], camera, options, &timings);
        if (k < n) {
            write_file(fs::path(a.out_dir) / fmt::format("frame_{:05d}.png", f), encode_frame_png(frame));
        }
        if (k >= a.warmup) {
            samples.add(timings);
        }
    }
    if (!a.timings.empty()) {
        write_text(a.timings, stage_json(samples, false).dump(2));
    }
    log.note("animate_done", {{"frames", n}, {"output", a.out_dir}},
             fmt::format("wrote {} frames to {}", n, a.out_dir));
    print_stage_table(log.out(), samples, false);
}

// --- bench ------------------------------------------------------------------

struct BenchArgs {
    std::size_t voxels = 1000000;
    std::size_t frames = kMinTimedFrames;
    std::size_t warmup = 2;
    int size = 512;
    std::uint64_t seed = 1;
    std::vector<int> sweep;
    std::string json_path;
};

void run_bench(const BenchArgs& a, const Log& log) {
    const Asset asset = make_benchmark_asset(a.voxels, a.seed);
    const Pose pose = benchmark_pose();
    service::OrbitView view = service::default_view(asset);
    view.width = view.height = a.size;
    const Camera camera = service::make_camera(view);
    const RenderOptions options;

    StageSamples samples;
    for (std::size_t k = 0; k < a.warmup + a.frames; ++k) {
        StageTimings timings;
        render_frame(asset, pose, camera, options, &timings);
        if (k >= a.warmup) {
            samples.add(timings);
        }
    }
    log.out() << fmt::format("voxels: {}  grid: {}^3  image: {}x{}  threads: {}\n", asset.voxels.size(),
                             asset.voxels.grid.resolution, a.size, a.size, hardware_threads());
    print_stage_table(log.out(), samples, true);
    const double build_rate = static_cast<double>(asset.voxels.size()) / (median(samples.build) * 1e-3);
    log.out() << fmt::format("octree build throughput: {:.3e} voxels/s\n", build_rate);

    json report = stage_json(samples, true);
    report["voxels"] = asset.voxels.size();
    report["octree_voxels_per_second"] = build_rate;
    if (!a.sweep.empty()) {
        json sweep = json::array();
        double base = 0.0;
        log.out() << fmt::format("{:<10}{:>16}{:>20}{:>10}\n", "threads", "build_ms", "voxels_per_second", "speedup");
        for (const int threads : a.sweep) {
            const ThreadLimit limit(threads);
            std::vector<double> build;
            for (std::size_t k = 0; k < a.warmup + 5; ++k) {
                StageTimings timings;
                pose_asset(asset, pose, &timings);
                if (k >= a.warmup) {
                    build.push_back(timings.build_ms);
                }
            }
            const double ms = median(build);
            const double rate = static_cast<double>(asset.voxels.size()) / (ms * 1e-3);
            if (base == 0.0) {
                base = rate;
            }
            log.out() << fmt::format("{:<10}{:>16.3f}{:>20.3e}{:>10.2f}\n", threads, ms, rate, rate / base);
            sweep.push_back({{"threads", threads}, {"build_ms", ms}, {"voxels_per_second", rate}});
        }
        report["sweep"] = sweep;
    }
    if (!a.json_path.empty()) {
        write_text(a.json_path, report.dump(2));
    }
}

// --- serve / synth ----------------------------------------------------------

struct ServeArgs {
    std::string asset;
    std::string address = "127.0.0.1";
    unsigned short port = 8080;
    int workers = 0;
};

void run_serve(const ServeArgs& a, const Log& log) {
    service::ServerOptions options;
    options.address = a.address;
    options.port = a.port;
    options.render_workers = a.workers;
    const auto server = service::Server::from_file(a.asset, options);
    log.result("serving", {{"asset_id", server->asset_id()}, {"address", a.address}, {"port", server->port()}},
               fmt::format("serving asset {} on ws://{}:{}/session", server->asset_id(), a.address, server->port()));
    log.out().flush();
    server->run(true);
}

struct SynthArgs {
    std::string out_dir;
    std::string kind = "sphere";
    std::uint32_t resolution = 64;
    int size = 128;
    std::size_t train = 20;
    std::size_t probe = 4;
    int degree = 2;
    std::uint64_t seed = 7;
};

void run_synth(const SynthArgs& a, const Log& log) {
    SyntheticSpec spec;
    spec.kind = a.kind == "capsule" ? SyntheticKind::kTwoBoneCapsule : SyntheticKind::kFuzzySphere;
    spec.resolution = a.resolution;
    spec.image_size = a.size;
    spec.train_views = a.train;
    spec.probe_views = a.probe;
    spec.seed = a.seed;
    ensure_directory(a.out_dir);
    const SyntheticScene scene = make_synthetic_scene(spec);
    const fs::path manifest = save_synthetic_scene(scene, a.out_dir, a.degree);
    log.result("synth_done", {{"scene", manifest.string()}}, fmt::format("wrote {}", manifest.string()));
}

}  // namespace

double median(std::vector<double> values) {
    if (values.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    return 0.5 * (upper + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"nvo: sparse voxel character capture, rigging, fitting and rendering"};
    app.name("nvo");
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.fallthrough();

    int threads = 0;
    bool json_logs = false;
    app.add_option("--threads", threads, "Cap on worker threads for every stage (0 = available parallelism)")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--json-logs", json_logs, "Print progress and results as JSON lines");

    CarveArgs carve_args;
    auto* carve = app.add_subcommand("carve", "Carve a voxel set from the silhouettes of a canonical-pose scene");
    carve->add_option("--scene", carve_args.scene, "Scene manifest (.scene.json)")->required();
    carve->add_option("--out", carve_args.out, "Output .nvo (voxels, empty features, one-joint rig)")->required();
    carve->add_option("--report", carve_args.report, "Optional JSON carve report");
    carve->add_option("--frame", carve_args.frame, "Scene frame holding the canonical-pose images");
    carve->add_option("--dilation", carve_args.dilation, "Mask dilation radius in pixels")
        ->check(CLI::NonNegativeNumber);
    carve->add_option("--alpha-threshold", carve_args.alpha_threshold, "Silhouette alpha threshold");
    carve->add_flag("--keep-unobserved", carve_args.keep_unobserved, "Keep cells that no camera sees");

    BakeArgs bake_args;
    auto* bake = app.add_subcommand("bake", "Bake mesh skinning weights onto a voxel set");
    bake->add_option("--voxels", bake_args.voxels, "Input .nvo from carve")->required();
    bake->add_option("--skeleton", bake_args.skeleton, "Skeleton (.skel.json)")->required();
    bake->add_option("--mesh", bake_args.mesh, "Skinned mesh (.skin.json)")->required();
    bake->add_option("--out", bake_args.out, "Output rigged .nvo")->required();
    bake->add_option("--neighbors", bake_args.neighbors, "Nearest mesh vertices blended per voxel")
        ->check(CLI::PositiveNumber);
    bake->add_option("--sign", bake_args.sign, "Distance weighting: nearer = exp(-d), farther = exp(+d)")
        ->check(CLI::IsMember({"nearer", "farther"}));

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "Optimize the feature table against multi-view images");
    fit_cmd->add_option("--scene", fit_args.scene, "Scene manifest (.scene.json)")->required();
    fit_cmd->add_option("--asset", fit_args.asset, "Rigged .nvo from bake (or carve)")->required();
    fit_cmd->add_option("--out", fit_args.out, "Output trained .nvo")->required();
    fit_cmd->add_option("--log", fit_args.log_path, "Per-iteration JSON lines log");
    fit_cmd->add_option("--iterations", fit_args.iterations, "Optimizer iterations")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--rays", fit_args.rays, "Rays per batch")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--lr", fit_args.learning_rate, "Learning rate for SH coefficients")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--density-lr", fit_args.density_learning_rate,
                        "Density learning rate (0 = lr / cell size)");
    fit_cmd->add_option("--lambda-vrt", fit_args.lambda_vrt, "Weight lambda_vrt of the voxel regularity term")
        ->check(CLI::NonNegativeNumber);
    fit_cmd->add_option("--seed", fit_args.seed, "Random seed");
    auto* deterministic =
        fit_cmd->add_flag("--deterministic", fit_args.deterministic,
                          "Ray-ordered gradient reduction, bit-identical across thread counts (the default)");
    auto* fast = fit_cmd->add_flag("--fast", fit_args.fast, "Unordered gradient reduction; last bits may vary");
    fast->excludes(deterministic);
    fit_cmd->add_flag("--warm-start", fit_args.warm_start, "Start from the asset's features");
    fit_cmd->add_option("--pose-sampling", fit_args.pose_sampling, "Frame choice per iteration")
        ->check(CLI::IsMember({"uniform", "round-robin"}));
    fit_cmd->add_option("--probe-interval", fit_args.probe_interval, "Iterations between probe PSNR reports")
        ->check(CLI::PositiveNumber);

    const std::string lambda_help =
        fmt::format("Early-stop threshold lambda_th: stop once alpha exceeds 1 - lambda_th (default {})",
                    kDefaultLambdaTh);

    RenderArgs render_args;
    auto* render = app.add_subcommand("render", "Render one posed frame to PNG (and optionally depth)");
    render->add_option("--asset", render_args.asset, "Trained .nvo")->required();
    render->add_option("--pose", render_args.pose, "Pose JSON (default canonical)");
    render->add_option("--out", render_args.out, "Output PNG (straight alpha)")->required();
    render->add_option("--depth", render_args.depth, "Optional depth raster (.dpt)");
    render->add_option("--lambda-th", render_args.lambda_th, lambda_help)->check(CLI::Range(0.0, 1.0));
    render->add_flag("--no-early-stop", render_args.no_early_stop, "Integrate every voxel along each ray");
    add_camera_options(render, render_args.camera);

    AnimateArgs animate_args;
    auto* animate = app.add_subcommand("animate", "Render a pose clip and report per-stage timing medians");
    animate->add_option("--asset", animate_args.asset, "Trained .nvo")->required();
    animate->add_option("--clip", animate_args.clip, "Pose clip (.clip.json)")->required();
    animate->add_option("--out-dir", animate_args.out_dir, "Directory for frame_NNNNN.png")->required();
    animate->add_option("--timings", animate_args.timings, "Optional JSON timing table");
    animate->add_option("--warmup", animate_args.warmup, "Untimed leading frames");
    animate->add_option("--timed-frames", animate_args.timed_frames, "Frames entering the medians")
        ->check(CLI::Range(kMinTimedFrames, std::size_t{1} << 20));
    animate->add_option("--lambda-th", animate_args.lambda_th, lambda_help)->check(CLI::Range(0.0, 1.0));
    animate->add_flag("--no-early-stop", animate_args.no_early_stop, "Integrate every voxel along each ray");
    add_camera_options(animate, animate_args.camera);

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Time warp, octree build and rendering on a generated asset");
    bench->add_option("--voxels", bench_args.voxels, "Voxel count of the generated ball")
        ->check(CLI::PositiveNumber);
    bench->add_option("--frames", bench_args.frames, "Timed frames")
        ->check(CLI::Range(kMinTimedFrames, std::size_t{1} << 20));
    bench->add_option("--warmup", bench_args.warmup, "Untimed leading frames");
    bench->add_option("--size", bench_args.size, "Image side in pixels")->check(CLI::Range(1, 8192));
    bench->add_option("--seed", bench_args.seed, "Feature seed");
    bench->add_option("--sweep", bench_args.sweep, "Thread counts for an octree build sweep, e.g. 1,2,4,8")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    bench->add_option("--json", bench_args.json_path, "Optional JSON report");

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "Serve frames over WebSocket (/session) with a /healthz probe");
    serve->add_option("--asset", serve_args.asset, "Trained .nvo")->required();
    serve->add_option("--address", serve_args.address, "Bind address");
    serve->add_option("--port", serve_args.port, "Bind port (0 = any free port)");
    serve->add_option("--workers", serve_args.workers, "Render workers shared by all sessions (0 = available)")
        ->check(CLI::NonNegativeNumber);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Write an analytic multi-view scene with ground-truth images");
    synth->add_option("--out-dir", synth_args.out_dir, "Output directory")->required();
    synth->add_option("--kind", synth_args.kind, "Scene kind")->check(CLI::IsMember({"sphere", "capsule"}));
    synth->add_option("--resolution", synth_args.resolution, "Grid resolution (power of two)");
    synth->add_option("--size", synth_args.size, "Image side in pixels")->check(CLI::Range(1, 8192));
    synth->add_option("--train", synth_args.train, "Training views")->check(CLI::PositiveNumber);
    synth->add_option("--probe", synth_args.probe, "Held-out probe views");
    synth->add_option("--degree", synth_args.degree, "SH degree written to the manifest")->check(CLI::Range(0, 4));
    synth->add_option("--seed", synth_args.seed, "Scene seed");

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << category_name(ErrorCategory::kUsage) << ": " << e.what() << '\n';
        return 2;
    }

    const Log log(out, err, json_logs);
    try {
        std::unique_ptr<ThreadLimit> limit;
        if (threads > 0) {
            limit = std::make_unique<ThreadLimit>(threads);
        }
        if (carve->parsed()) {
            run_carve(carve_args, log);
        } else if (bake->parsed()) {
            run_bake(bake_args, log);
        } else if (fit_cmd->parsed()) {
            run_fit(fit_args, log);
        } else if (render->parsed()) {
            run_render(render_args, log);
        } else if (animate->parsed()) {
            run_animate(animate_args, log);
        } else if (bench->parsed()) {
            run_bench(bench_args, log);
        } else if (serve->parsed()) {
            run_serve(serve_args, log);
        } else if (synth->parsed()) {
            run_synth(synth_args, log);
        }
    } catch (const Error& e) {
        err << "error: " << category_name(e.category()) << ": " << e.what() << '\n';
        return e.category() == ErrorCategory::kUsage ? 2 : 1;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << category_name(ErrorCategory::kIo) << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace nvo::cli
