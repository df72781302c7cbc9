// mldepth: command-line front end for the multi-layer depth pipeline.
//
// Every subcommand accepts --seed, --threads and --config FILE.json; keys in
// the JSON object use the long flag names and explicit flags win. Results are
// logged to stdout as key=value lines. Exit status: 0 success, 2 usage or
// validation error, 3 I/O or file-format error.

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mld/epipolar.hpp"
#include "mld/io.hpp"
#include "mld/mesh_recon.hpp"
#include "mld/metrics.hpp"
#include "mld/overhead.hpp"
#include "mld/ray_layers.hpp"
#include "mld/synth.hpp"

namespace fs = std::filesystem;
using namespace mld;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

// JSON object -> CLI11 config items for the selected subcommand.
class JsonConfig : public CLI::Config {
 public:
  std::string section;

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      if (!section.empty()) item.parents = {section};
      item.name = key;
      auto text = [](const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
        return v.dump();
      };
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(text(v));
      } else {
        item.inputs.push_back(text(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }
};

// One key=value line per call.
class Log {
 public:
  ~Log() { std::cout << line_.str() << '\n'; }
  Log& operator()(const std::string& key, const std::string& value) {
    sep();
    line_ << key << '=' << value;
    return *this;
  }
  Log& operator()(const std::string& key, double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return (*this)(key, std::string(buf));
  }
  Log& operator()(const std::string& key, long long value) {
    return (*this)(key, std::to_string(value));
  }
  Log& operator()(const std::string& key, int value) {
    return (*this)(key, static_cast<long long>(value));
  }
  Log& operator()(const std::string& key, std::size_t value) {
    return (*this)(key, static_cast<long long>(value));
  }

 private:
  void sep() {
    if (!first_) line_ << ' ';
    first_ = false;
  }
  std::ostringstream line_;
  bool first_ = true;
};

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

Scene load_camera_scene(const std::string& path, const PerspectiveCamera& cam) {
  Scene s = read_obj(path);
  return s.frame == Frame::Camera ? s : transform_to_camera(s, cam);
}

// Camera-frame scene restricted to the view: clipped, hidden objects removed.
Scene visible_scene(const Scene& camera_scene, const PerspectiveCamera& cam, int threads) {
  TraceOptions o;
  o.threads = threads;
  Scene c = clip_to_frustum(camera_scene, cam);
  return remove_hidden_objects(c, cam, trace_envelope(c, cam, o), threads);
}

std::string stem_of(const std::string& path) {
  const fs::path p(path);
  return (p.parent_path() / p.stem()).string();
}

FeatureMap raster_to_feature(const DepthRaster& r) {
  FeatureMap f(r.width(), r.height(), 1, 0.0, 0);
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) {
      if (std::isfinite(r(x, y))) {
        f.at(x, y, 0) = r(x, y);
        f.valid(x, y) = 1;
      }
    }
  }
  return f;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  Common common;
  SynthSpec spec;
  int objects = -1;
  std::string family = "boxes";
  int width = 256;
  std::string output;
  std::string camera;
};

void add_synth(CLI::App& app, SynthArgs& a, std::function<void()>& run) {
  auto* s = app.add_subcommand("synth", "Generate a procedural room scene");
  add_common(s, a.common);
  s->add_option("--objects", a.objects, "Exact object count (overrides min/max)");
  s->add_option("--min-objects", a.spec.min_objects)->capture_default_str();
  s->add_option("--max-objects", a.spec.max_objects)->capture_default_str();
  s->add_option("--family", a.family, "boxes | lshapes | stacked | tables | mixed")
      ->capture_default_str();
  s->add_flag("--tabletop", a.spec.tabletop, "Add a table just below eye height");
  s->add_flag("--keep-in-view", a.spec.keep_in_view, "Keep objects inside the default view");
  s->add_flag("--allow-overlap", a.spec.allow_overlap);
  s->add_option("--room-width", a.spec.room_width)->capture_default_str();
  s->add_option("--room-depth", a.spec.room_depth)->capture_default_str();
  s->add_option("--room-height", a.spec.room_height)->capture_default_str();
  s->add_option("--camera-height", a.spec.camera_height)->capture_default_str();
  s->add_option("--tilt", a.spec.camera_tilt_deg, "Camera pitch down, degrees")
      ->capture_default_str();
  s->add_option("--hfov", a.spec.camera_hfov_deg)->capture_default_str();
  s->add_option("--aspect", a.spec.camera_aspect, "Image width / height")->capture_default_str();
  s->add_option("--width", a.width, "Camera image width in pixels")->capture_default_str();
  s->add_option("-o,--output", a.output, "Scene OBJ (a JSON sidecar is written next to it)")
      ->required();
  s->add_option("--camera", a.camera, "Also write the default camera JSON here");
  s->callback([&] {
    run = [&] {
      SynthSpec spec = a.spec;
      spec.family = parse_shape_family(a.family);
      if (a.objects >= 0) spec.min_objects = spec.max_objects = a.objects;
      const Scene scene = generate_synthetic_scene(a.common.seed, spec);
      write_obj(a.output, scene);
      std::size_t tris = 0, objects = 0;
      for (const auto& o : scene.objects) {
        tris += o.mesh.triangles.size();
        objects += !o.is_envelope;
      }
      Log()("cmd", "synth")("seed", static_cast<long long>(a.common.seed))("objects", objects)(
          "envelope", scene.objects.size() - objects)("triangles", tris)("out", a.output);
      if (!a.camera.empty()) {
        write_camera(a.camera, synth_camera(spec, a.width));
        Log()("camera", a.camera);
      }
    };
  });
}

// ---------------------------------------------------------------- trace

struct TraceArgs {
  Common common;
  std::string scene, camera, output, format = "mld";
  bool brute_force = false;
};

void add_trace(CLI::App& app, TraceArgs& a, std::function<void()>& run) {
  auto* s = app.add_subcommand("trace", "Ground-truth multi-layer depth of a scene");
  add_common(s, a.common);
  s->add_option("scene", a.scene, "Scene OBJ")->required();
  s->add_option("camera", a.camera, "Camera JSON")->required();
  s->add_option("-o,--output", a.output, "Output file (pfm writes <stem>_D1..D5.pfm)")
      ->required();
  s->add_option("--format", a.format, "mld | pfm")
      ->check(CLI::IsMember({"mld", "pfm"}))
      ->capture_default_str();
  s->add_flag("--brute-force", a.brute_force, "Skip the hierarchy");
  s->callback([&] {
    run = [&] {
      const PerspectiveCamera cam = read_camera(a.camera);
      const Scene view = visible_scene(load_camera_scene(a.scene, cam), cam, a.common.threads);
      TraceOptions o;
      o.threads = a.common.threads;
      o.brute_force = a.brute_force;
      const LayeredTrace tr = trace_layers(view, cam, o);
      if (a.format == "mld") {
        write_mld(a.output, tr.depths, tr.semantics);
      } else {
        for (int l = 1; l <= kLayerCount; ++l) {
          write_pfm(stem_of(a.output) + "_D" + std::to_string(l) + ".pfm", tr.depths.layer(l));
        }
      }
      std::size_t obj = 0, occ = 0;
      for (auto m : tr.depths.object_mask.data()) obj += m;
      for (auto m : tr.depths.occluded_mask.data()) occ += m;
      Log()("cmd", "trace")("width", cam.width)("height", cam.height)(
          "objects", view.objects.size())("max_intervals", tr.max_intervals_per_ray)(
          "object_pixels", obj)("occluded_pixels", occ)("out", a.output);
    };
  });
}

// ---------------------------------------------------------------- overhead

struct OverheadArgs {
  Common common;
  std::string depths, camera, output, heuristic = "blend";
  std::vector<double> weights{kDefaultBlendWeights.begin(), kDefaultBlendWeights.end()};
  int resolution = 128;
  std::string scene, heights;
};

void add_overhead(CLI::App& app, OverheadArgs& a, std::function<void()>& run) {
  auto* s = app.add_subcommand("overhead", "Choose a virtual overhead camera");
  add_common(s, a.common);
  s->add_option("depths", a.depths, "Multi-layer depth (.mld)")->required();
  s->add_option("camera", a.camera, "Input camera JSON")->required();
  s->add_option("-o,--output", a.output, "Overhead camera JSON")->required();
  s->add_option("--heuristic", a.heuristic, "blend | pointcloud | principal | bbox")
      ->check(CLI::IsMember({"blend", "pointcloud", "principal", "bbox"}))
      ->capture_default_str();
  s->add_option("--weights", a.weights, "Blend weights: pointcloud,principal,bbox")
      ->delimiter(',')
      ->expected(3);
  s->add_option("--resolution", a.resolution)->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--scene", a.scene, "Scene OBJ for ground-truth heights");
  s->add_option("--heights", a.heights, "Write ground-truth overhead heights (.fmp)");
  s->callback([&] {
    run = [&] {
      if (a.weights.size() != 3) fail(ErrorCode::InvalidArgument, "--weights needs 3 values");
      if (!a.heights.empty() && a.scene.empty()) {
        fail(ErrorCode::InvalidArgument, "--heights needs --scene");
      }
      const PerspectiveCamera cam = read_camera(a.camera);
      const MultiLayerDepthMap depths = read_mld(a.depths).first;
      OverheadParams p;
      if (a.heuristic == "pointcloud") {
        p = heuristic_pointcloud(depths, cam);
      } else if (a.heuristic == "principal") {
        p = heuristic_principal_plane(depths, cam);
      } else if (a.heuristic == "bbox") {
        p = heuristic_bbox(depths, cam);
      } else {
        p = choose_overhead(depths, cam, {a.weights[0], a.weights[1], a.weights[2]});
      }
      const OrthographicCamera vcam = make_overhead_camera(p, a.resolution);
      write_overhead(a.output, vcam);
      Log()("cmd", "overhead")("heuristic", a.heuristic)("t_x", p.t_x)("t_y", p.t_y)(
          "t_z", p.t_z)("theta", p.theta_deg)("sigma", p.radius_sigma)(
          "resolution", a.resolution)("out", a.output);
      if (!a.heights.empty()) {
        TraceOptions o;
        o.threads = a.common.threads;
        const Scene view =
            visible_scene(load_camera_scene(a.scene, cam), cam, a.common.threads);
        write_feature_map(a.heights,
                          raster_to_feature(trace_overhead_heights(view, cam, vcam, o)));
        Log()("heights", a.heights);
      }
    };
  });
}

// ---------------------------------------------------------------- transfer

struct TransferArgs {
  Common common;
  std::string depths, camera, overhead, output, features, gating = "surface";
  double z_step = 0.0, z_min = 0.0, z_max = 0.0;
  bool no_infill = false, best_guess = false;
};

void add_transfer(CLI::App& app, TransferArgs& a, std::function<void()>& run) {
  auto* s = app.add_subcommand("transfer", "Epipolar feature transfer into the overhead view");
  add_common(s, a.common);
  s->add_option("depths", a.depths, "Multi-layer depth (.mld)")->required();
  s->add_option("camera", a.camera, "Input camera JSON")->required();
  s->add_option("overhead", a.overhead, "Overhead camera JSON")->required();
  s->add_option("-o,--output", a.output, "Transferred feature map (.fmp)")->required();
  s->add_option("--features", a.features, "Input features (.fmp); default is the D1 layer");
  s->add_option("--gating", a.gating, "surface | volume12 | volume34 | const | bestguess")
      ->capture_default_str();
  s->add_option("--z-step", a.z_step, "Ray sampling step; <= 0 picks half a cell");
  s->add_option("--z-min", a.z_min, "Constant gating near bound; <= 0 is the near plane");
  s->add_option("--z-max", a.z_max, "Constant gating far bound; <= 0 is the deepest layer");
  s->add_flag("--no-infill", a.no_infill, "Leave empty frustum cells empty");
  s->add_flag("--best-guess", a.best_guess, "Write the best-guess height map instead");
  s->callback([&] {
    run = [&] {
      const PerspectiveCamera cam = read_camera(a.camera);
      const OrthographicCamera vcam = read_overhead(a.overhead);
      const MultiLayerDepthMap depths = read_mld(a.depths).first;
      FeatureMap out;
      if (a.best_guess) {
        out = best_guess_height(depths, cam, vcam);
      } else {
        const FeatureMap f =
            a.features.empty() ? raster_to_feature(depths.layer(1)) : read_feature_map(a.features);
        GatingSpec g;
        g.kind = parse_gating(a.gating);
        g.z_step = a.z_step;
        g.z_min = a.z_min;
        g.z_max = a.z_max;
        TransferOptions o;
        o.threads = a.common.threads;
        o.infill = !a.no_infill;
        out = transfer_features(f, g, depths, cam, vcam, o);
      }
      write_feature_map(a.output, out);
      std::size_t valid = 0;
      for (auto m : out.valid.data()) valid += m;
      Log()("cmd", "transfer")("gating", a.best_guess ? "bestguess-height" : a.gating)(
          "resolution", out.width)("channels", out.channels)("valid_cells", valid)(
          "out", a.output);
    };
  });
}

// ---------------------------------------------------------------- recon

struct ReconArgs {
  Common common;
  std::string depths, camera, output, overhead, heights;
  double a = kEdgeFactor, floor_cutoff = kFloorCutoff;
  bool no_envelope = false;
};

void add_recon(CLI::App& app, ReconArgs& a, std::function<void()>& run) {
  auto* s = app.add_subcommand("recon", "Meshes from depth layers (world-frame OBJs)");
  add_common(s, a.common);
  s->add_option("depths", a.depths, "Multi-layer depth (.mld)")->required();
  s->add_option("camera", a.camera, "Input camera JSON")->required();
  s->add_option("-o,--output", a.output, "Output directory")->required();
  s->add_option("--overhead", a.overhead, "Overhead camera JSON");
  s->add_option("--heights", a.heights, "Overhead height map (.fmp), needs --overhead");
  s->add_option("--edge-factor", a.a, "Depth discontinuity factor")->capture_default_str();
  s->add_option("--floor-cutoff", a.floor_cutoff)->capture_default_str();
  s->add_flag("--no-envelope", a.no_envelope, "Skip the D5 mesh");
  s->callback([&] {
    run = [&] {
      if (a.heights.empty() != a.overhead.empty()) {
        fail(ErrorCode::InvalidArgument, "--heights and --overhead go together");
      }
      const PerspectiveCamera cam = read_camera(a.camera);
      const MultiLayerDepthMap depths = read_mld(a.depths).first;
      AssembleOptions opts;
      opts.a = a.a;
      opts.floor_cutoff = a.floor_cutoff;
      opts.include_envelope = !a.no_envelope;
      FeatureMap height;
      OrthographicCamera vcam;
      if (!a.heights.empty()) {
        height = read_feature_map(a.heights);
        vcam = read_overhead(a.overhead);
      }
      const auto parts = assemble_scene_mesh(depths, cam, a.heights.empty() ? nullptr : &height,
                                             a.heights.empty() ? nullptr : &vcam, opts);
      std::error_code ec;
      fs::create_directories(a.output, ec);
      if (ec) fail(ErrorCode::Io, "cannot create '" + a.output + "': " + ec.message());
      for (const auto& part : parts) {
        Scene one;
        one.frame = Frame::Camera;
        one.objects = {part};
        const std::string path = (fs::path(a.output) / (part.name + ".obj")).string();
        write_obj(path, transform_to_world(one, cam));
        Log()("cmd", "recon")("part", part.name)("triangles", part.mesh.triangles.size())(
            "area", part.mesh.area())("out", path);
      }
    };
  });
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  Common common;
  std::string prediction, ground_truth, camera, csv, json;
  std::vector<double> thresholds{0.05};
  double density = kDefaultDensity;
  bool objects_only = false;
};

Scene load_prediction(const std::string& path) {
  if (!fs::is_directory(path)) return read_obj(path);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(path)) {
    if (e.path().extension() == ".obj") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorCode::Io, "no .obj files in '" + path + "'");
  Scene all = read_obj(files.front());
  for (std::size_t i = 1; i < files.size(); ++i) {
    Scene s = read_obj(files[i]);
    if (s.frame != all.frame) fail(ErrorCode::Format, "mixed frames in '" + path + "'");
    for (auto& o : s.objects) all.objects.push_back(std::move(o));
  }
  return all;
}

void add_eval(CLI::App& app, EvalArgs& a, std::function<void()>& run) {
  auto* s = app.add_subcommand("eval", "Surface precision and recall against a scene");
  add_common(s, a.common);
  s->add_option("prediction", a.prediction, "Predicted OBJ or directory of OBJs")->required();
  s->add_option("ground_truth", a.ground_truth, "Ground-truth scene OBJ")->required();
  s->add_option("--camera", a.camera, "Restrict ground truth to this camera's view");
  s->add_option("--threshold", a.thresholds, "Distance thresholds in meters")
      ->delimiter(',')
      ->capture_default_str();
  s->add_option("--density", a.density, "Sample points per square meter")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_flag("--objects-only", a.objects_only, "Ignore envelope geometry on both sides");
  s->add_option("--csv", a.csv, "Also write results as CSV");
  s->add_option("--json", a.json, "Also write results as JSON");
  s->callback([&] {
    run = [&] {
      Scene pred = load_prediction(a.prediction);
      Scene gt = read_obj(a.ground_truth);
      if (!a.camera.empty()) {
        const PerspectiveCamera cam = read_camera(a.camera);
        if (gt.frame == Frame::World) gt = transform_to_camera(gt, cam);
        gt = visible_scene(gt, cam, a.common.threads);
        if (pred.frame == Frame::World) pred = transform_to_camera(pred, cam);
      } else if (gt.frame != pred.frame) {
        fail(ErrorCode::InvalidArgument, "frames differ; pass --camera");
      }
      const bool env = !a.objects_only;
      const auto pr = pr_curve(pred.merged(env, true), gt.merged(env, true), a.thresholds,
                               a.density, a.common.seed, a.common.threads);
      nlohmann::json j = nlohmann::json::array();
      std::string csv = "threshold,precision,recall\n";
      for (const auto& p : pr) {
        Log()("cmd", "eval")("threshold", p.threshold)("precision", p.precision)(
            "recall", p.recall);
        j.push_back({{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall}});
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", p.threshold, p.precision, p.recall);
        csv += buf;
      }
      if (!a.csv.empty()) write_file(a.csv, csv);
      if (!a.json.empty()) write_file(a.json, j.dump(2) + "\n");
    };
  });
}

// ---------------------------------------------------------------- voxel

struct VoxelArgs {
  Common common;
  std::string input, camera, output, compare;
  std::vector<double> origin;
  std::vector<int> dims;
  double edge = 0.0;
  bool include_envelope = false;
};

VoxelGrid grid_from(const VoxelArgs& a) {
  VoxelGrid g = default_voxel_grid();
  Vec3 origin = g.origin;
  double edge = g.edge;
  int nx = g.nx, ny = g.ny, nz = g.nz;
  if (!a.origin.empty()) {
    if (a.origin.size() != 3) fail(ErrorCode::InvalidArgument, "--origin needs x,y,z");
    origin = {a.origin[0], a.origin[1], a.origin[2]};
  }
  if (a.edge > 0.0) edge = a.edge;
  if (a.dims.size() == 1) {
    nx = ny = nz = a.dims[0];
  } else if (a.dims.size() == 3) {
    nx = a.dims[0];
    ny = a.dims[1];
    nz = a.dims[2];
  } else if (!a.dims.empty()) {
    fail(ErrorCode::InvalidArgument, "--dims needs n or nx,ny,nz");
  }
  return VoxelGrid(origin, edge, nx, ny, nz);
}

void add_voxel(CLI::App& app, VoxelArgs& a, std::function<void()>& run) {
  auto* s = app.add_subcommand("voxel", "Voxelize depth layers (.mld) or a mesh (.obj)");
  add_common(s, a.common);
  s->add_option("input", a.input, ".mld for layer occupancy, .obj for solid voxelization")
      ->required();
  s->add_option("camera", a.camera, "Camera JSON; the grid lives in its frame")->required();
  s->add_option("-o,--output", a.output, "Voxel grid (.vox)")->required();
  s->add_option("--origin", a.origin, "Grid corner x,y,z")->delimiter(',');
  s->add_option("--edge", a.edge, "Voxel edge in meters");
  s->add_option("--dims", a.dims, "n or nx,ny,nz")->delimiter(',');
  s->add_flag("--include-envelope", a.include_envelope, "Voxelize envelope meshes too");
  s->add_option("--compare", a.compare, "Report IoU against this .vox");
  s->callback([&] {
    run = [&] {
      const PerspectiveCamera cam = read_camera(a.camera);
      const VoxelGrid grid = grid_from(a);
      VoxelGrid occ;
      if (fs::path(a.input).extension() == ".obj") {
        const Scene s = load_camera_scene(a.input, cam);
        occ = voxelize_mesh_parity(s.merged(a.include_envelope, true), grid, a.common.threads);
      } else {
        occ = voxelize_prediction(read_mld(a.input).first, cam, grid, a.common.threads);
      }
      write_voxels(a.output, occ);
      Log log;
      log("cmd", "voxel")("occupied", occ.count())("out", a.output);
      // Compare stored grids: geometry is serialized at single precision.
      if (!a.compare.empty()) {
        log("iou", voxel_iou(read_voxels(a.output), read_voxels(a.compare)));
      }
    };
  });
}

// ---------------------------------------------------------------- loss

struct LossArgs {
  Common common;
  std::string prediction, ground_truth;
  double delta = kDefaultHuberDelta;
};

void add_loss(CLI::App& app, LossArgs& a, std::function<void()>& run) {
  auto* s = app.add_subcommand("loss", "Masked multi-layer Huber loss");
  add_common(s, a.common);
  s->add_option("prediction", a.prediction, "Predicted depth (.mld)")->required();
  s->add_option("ground_truth", a.ground_truth, "Ground-truth depth (.mld)")->required();
  s->add_option("--delta", a.delta, "Huber threshold")->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->callback([&] {
    run = [&] {
      const double l = multilayer_depth_loss(read_mld(a.prediction).first,
                                             read_mld(a.ground_truth).first, a.delta);
      Log()("cmd", "loss")("delta", a.delta)("loss", l);
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Multi-layer depth maps, overhead feature transfer and evaluation", "mldepth");
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_config("--config", "", "JSON file whose keys mirror the long flags");
  app.allow_config_extras(false);
  auto config = std::make_shared<JsonConfig>();
  app.config_formatter(config);

  std::function<void()> run;
  SynthArgs synth;
  TraceArgs trace;
  OverheadArgs overhead;
  TransferArgs transfer;
  ReconArgs recon;
  EvalArgs eval;
  VoxelArgs voxel;
  LossArgs loss;
  add_synth(app, synth, run);
  add_trace(app, trace, run);
  add_overhead(app, overhead, run);
  add_transfer(app, transfer, run);
  add_recon(app, recon, run);
  add_eval(app, eval, run);
  add_voxel(app, voxel, run);
  add_loss(app, loss, run);

  // Config keys apply to the subcommand named on the command line.
  for (int i = 1; i < argc; ++i) {
    if (app.get_subcommand_no_throw(argv[i]) != nullptr) {
      config->section = argv[i];
      break;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << "error=io message=\"" << e.what() << "\"\n";
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (run) run();
  } catch (const Error& e) {
    std::cerr << "error=" << to_string(e.code()) << " message=\"" << e.what() << "\"\n";
    return e.is_io() ? kExitIo : kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error=io message=\"" << e.what() << "\"\n";
    return kExitIo;
  }
  return 0;
}
