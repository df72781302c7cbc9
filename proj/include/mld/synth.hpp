#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "mld/camera.hpp"
#include "mld/scene.hpp"

namespace mld {

// Portable deterministic generator: mt19937_64 bits mapped to doubles by hand
// so sequences do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);

 private:
  std::mt19937_64 engine_;
};

enum class ShapeFamily { Boxes, LShapes, StackedPairs, Tables, Mixed };

ShapeFamily parse_shape_family(const std::string& name);
const char* to_string(ShapeFamily family);

// Desk-scale room: x in [-w/2, w/2], y in [0, h] (floor at 0), z in [-d, 0].
// The envelope is floor, ceiling, left, right and back walls. The default
// camera stands at (0, camera_height, 0) looking toward -z.
struct SynthSpec {
  double room_width = 5.0;
  double room_depth = 5.0;
  double room_height = 2.7;

  int min_objects = 0;
  int max_objects = 0;
  ShapeFamily family = ShapeFamily::Boxes;
  bool allow_overlap = false;

  double min_size = 0.3;   // footprint side
  double max_size = 1.0;
  double min_height = 0.3;
  double max_height = 1.2;
  double wall_margin = 0.05;
  double front_clearance = 1.0;  // objects keep z <= -front_clearance

  // Add one table whose top sits 0.15 to 0.35 m below eye height.
  bool tabletop = false;
  // Reject placements not entirely inside the default camera's view volume.
  bool keep_in_view = false;

  double camera_height = 1.5;
  double camera_tilt_deg = 11.0;
  double camera_hfov_deg = 60.0;
  double camera_aspect = 1.0;  // width / height

  int max_retries = 200;

  void validate() const;
};

// Deterministic in (seed, spec). Throws Generation when objects cannot be
// placed within max_retries attempts each.
Scene generate_synthetic_scene(std::uint64_t seed, const SynthSpec& spec);

// Default input camera for a synthetic room at the given pixel width; height
// follows camera_aspect.
PerspectiveCamera synth_camera(const SynthSpec& spec, int width);

// Closed axis-aligned box mesh, outward-facing triangles.
Mesh box_mesh(const Vec3& lo, const Vec3& hi);

}  // namespace mld
