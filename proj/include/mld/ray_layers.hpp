#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mld/bvh.hpp"
#include "mld/camera.hpp"
#include "mld/geometry.hpp"
#include "mld/scene.hpp"

namespace mld {

inline constexpr int kLayerCount = 5;

// Five depth layers (camera-frame z, meters; NaN where unsupported):
//   D1 first object entry, D2 last exit of that object instance,
//   D3 entry of the next object instance beyond D2, D4 its last exit,
//   D5 first room-envelope hit.
struct MultiLayerDepthMap {
  int width = 0;
  int height = 0;
  std::array<DepthRaster, kLayerCount> layers;
  MaskRaster object_mask;    // support of D1 and D2
  MaskRaster occluded_mask;  // support of D3 and D4
  MaskRaster envelope_mask;  // support of D5

  MultiLayerDepthMap() = default;
  MultiLayerDepthMap(int w, int h);

  DepthRaster& layer(int one_based) { return layers[one_based - 1]; }
  const DepthRaster& layer(int one_based) const { return layers[one_based - 1]; }

  // Support mask of a 1-based layer index.
  const MaskRaster& mask_of(int one_based) const;

  // Ordering and mask invariants; throws InvalidArgument on violation.
  void validate(double near = 0.0) const;

  // Recompute masks from NaN patterns of D1, D3 and D5.
  void rebuild_masks();

  bool operator==(const MultiLayerDepthMap&) const;
};

// Category ids of the first and second object intervals (0 = none).
struct SemanticLayerMap {
  int width = 0;
  int height = 0;
  Raster<std::uint16_t> sem1;
  Raster<std::uint16_t> sem3;

  SemanticLayerMap() = default;
  SemanticLayerMap(int w, int h) : width(w), height(h), sem1(w, h, 0), sem3(w, h, 0) {}
};

struct RayInterval {
  int instance_id = 0;
  double t_enter = 0.0;
  double t_exit = 0.0;
  int category_id = 0;
};

using RayIntervals = std::vector<RayInterval>;

struct TraceOptions {
  int threads = 1;
  // Test every triangle instead of walking the hierarchy.
  bool brute_force = false;
};

// Camera-frame scene prepared for repeated multi-hit queries. Envelope and
// object triangles live in separate hierarchies.
class SceneTracer {
 public:
  explicit SceneTracer(const Scene& camera_scene, bool brute_force = false);

  // Per-object [first hit, last hit] along o + t d with t >= 0, sorted by
  // (t_enter, instance_id). t is measured in units of |d|. Envelope objects
  // are excluded.
  RayIntervals object_intervals(const Vec3& origin, const Vec3& dir) const;

  // Nearest envelope hit parameter, or NaN.
  double envelope_hit(const Vec3& origin, const Vec3& dir) const;

 private:
  struct TriangleOwner {
    int instance_id;
    int category_id;
  };

  void collect(const TriangleBvh& bvh, const Vec3& o, const Vec3& d,
               std::vector<RayHit>& out) const;

  TriangleBvh objects_;
  TriangleBvh envelope_;
  std::vector<TriangleOwner> owners_;
  bool brute_force_;
};

RayIntervals ray_object_intervals(const Scene& camera_scene, const Vec3& origin, const Vec3& dir);

struct LayeredTrace {
  MultiLayerDepthMap depths;
  SemanticLayerMap semantics;
  // Largest number of object intervals seen on any pixel ray.
  int max_intervals_per_ray = 0;
};

// Multi-hit ray tracing through pixel centers. Requires every vertex at
// z >= cam.near (run clip_to_frustum first). Object intervals starting at or
// beyond the first envelope hit are outside the room and ignored.
LayeredTrace trace_layers(const Scene& camera_scene, const PerspectiveCamera& cam,
                          const TraceOptions& options = {});

inline std::pair<MultiLayerDepthMap, SemanticLayerMap> trace_multilayer(
    const Scene& camera_scene, const PerspectiveCamera& cam, const TraceOptions& options = {}) {
  LayeredTrace r = trace_layers(camera_scene, cam, options);
  return {std::move(r.depths), std::move(r.semantics)};
}

// First-hit z depth of envelope geometry only; NaN where nothing is hit.
DepthRaster trace_envelope(const Scene& camera_scene, const PerspectiveCamera& cam,
                           const TraceOptions& options = {});

// Ground-truth overhead height map: orthographic rays cast down the virtual
// view direction through each cell center; height above the floor of the
// first object hit, NaN where no object is hit.
DepthRaster trace_overhead_heights(const Scene& camera_scene, const PerspectiveCamera& cam,
                                   const OrthographicCamera& vcam,
                                   const TraceOptions& options = {});

inline constexpr double kDefaultHuberDelta = 1.0;

// Masked multi-layer Huber loss: sum over layers of the mean Huber penalty on
// that layer's ground-truth support. Layers without support contribute 0.
double multilayer_depth_loss(const MultiLayerDepthMap& pred, const MultiLayerDepthMap& gt,
                             double delta_h = kDefaultHuberDelta);

}  // namespace mld
