#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mld/camera.hpp"
#include "mld/geometry.hpp"

namespace mld {

using TriangleIndices = std::array<std::uint32_t, 3>;

inline constexpr double kMinTriangleArea = 1e-12;

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<TriangleIndices> triangles;

  bool empty() const { return triangles.empty(); }
  double triangle_area(std::size_t i) const;
  double area() const;
  void append(const Mesh& other);
  // Adds a triangle unless its area is below kMinTriangleArea; returns whether it was kept.
  bool add_triangle(const Vec3& a, const Vec3& b, const Vec3& c);
};

struct SceneObject {
  std::string name;
  Mesh mesh;
  int instance_id = 1;
  int category_id = 1;
  bool is_envelope = false;

  // Index range, non-degenerate triangles, id/category ranges.
  void validate() const;
};

enum class Frame { World, Camera };

struct Scene {
  std::vector<SceneObject> objects;
  Frame frame = Frame::World;
  // Unit "down" direction in the scene's frame.
  Vec3 gravity_axis{0.0, -1.0, 0.0};

  void validate() const;

  // All triangles of the selected objects concatenated.
  Mesh merged(bool include_envelope = true, bool include_objects = true) const;
  double area(bool include_envelope = true, bool include_objects = true) const {
    return merged(include_envelope, include_objects).area();
  }
};

// Rigid motion into the camera frame: v -> R v + T.
Scene transform_to_camera(const Scene& scene, const PerspectiveCamera& cam);
// Inverse of transform_to_camera.
Scene transform_to_world(const Scene& scene, const PerspectiveCamera& cam);

// Sutherland-Hodgman clipping of every triangle against the left, right, top,
// bottom and near planes, fan-retriangulated. No far plane.
Scene clip_to_frustum(const Scene& scene, const PerspectiveCamera& cam);

// Polygon clipping against a single half-space; exposed for tests.
std::vector<Vec3> clip_polygon(const std::vector<Vec3>& polygon, const Plane& plane);

inline constexpr double kHiddenEpsilon = 0.01;

// Drops non-envelope objects whose every covered pixel lies behind the
// envelope depth by more than epsilon. Objects covering no pixel are dropped.
Scene remove_hidden_objects(const Scene& scene, const PerspectiveCamera& cam,
                            const DepthRaster& envelope_depth, int threads = 1,
                            double epsilon = kHiddenEpsilon);

}  // namespace mld
