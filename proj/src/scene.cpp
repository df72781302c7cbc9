#include "mld/scene.hpp"

#include <set>
#include <string>

namespace mld {

double Mesh::triangle_area(std::size_t i) const {
  const auto& t = triangles[i];
  const Vec3& a = vertices[t[0]];
  return 0.5 * norm(cross(vertices[t[1]] - a, vertices[t[2]] - a));
}

double Mesh::area() const {
  double total = 0.0;
  for (std::size_t i = 0; i < triangles.size(); ++i) total += triangle_area(i);
  return total;
}

void Mesh::append(const Mesh& other) {
  const auto base = static_cast<std::uint32_t>(vertices.size());
  vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
  triangles.reserve(triangles.size() + other.triangles.size());
  for (const auto& t : other.triangles) {
    triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  }
}

bool Mesh::add_triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
  if (0.5 * norm(cross(b - a, c - a)) <= kMinTriangleArea) return false;
  const auto base = static_cast<std::uint32_t>(vertices.size());
  vertices.push_back(a);
  vertices.push_back(b);
  vertices.push_back(c);
  triangles.push_back({base, base + 1, base + 2});
  return true;
}

void SceneObject::validate() const {
  const std::string who = "object '" + name + "': ";
  if (instance_id < 1) fail(ErrorCode::InvalidArgument, who + "instance_id must be >= 1");
  if (category_id < 0 || category_id > 40) {
    fail(ErrorCode::InvalidArgument, who + "category_id must lie in [0, 40]");
  }
  if (is_envelope != (category_id == 0)) {
    fail(ErrorCode::InvalidArgument, who + "is_envelope must hold exactly when category_id = 0");
  }
  for (const auto& v : mesh.vertices) {
    if (!v.finite()) fail(ErrorCode::InvalidArgument, who + "non-finite vertex");
  }
  const auto n = mesh.vertices.size();
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    if (t[0] >= n || t[1] >= n || t[2] >= n) {
      fail(ErrorCode::InvalidArgument, who + "triangle index out of range");
    }
    if (mesh.triangle_area(i) <= kMinTriangleArea) {
      fail(ErrorCode::InvalidArgument, who + "degenerate triangle");
    }
  }
}

void Scene::validate() const {
  std::set<int> ids;
  for (const auto& o : objects) {
    o.validate();
    if (!ids.insert(o.instance_id).second) {
      fail(ErrorCode::InvalidArgument,
           "duplicate instance_id " + std::to_string(o.instance_id));
    }
  }
}

Mesh Scene::merged(bool include_envelope, bool include_objects) const {
  Mesh out;
  for (const auto& o : objects) {
    if (o.is_envelope ? include_envelope : include_objects) out.append(o.mesh);
  }
  return out;
}

namespace {

Scene map_vertices(const Scene& scene, Frame target, const Vec3& gravity,
                   auto&& fn) {
  Scene out = scene;
  out.frame = target;
  out.gravity_axis = gravity;
  for (auto& o : out.objects) {
    for (auto& v : o.mesh.vertices) v = fn(v);
  }
  return out;
}

}  // namespace

Scene transform_to_camera(const Scene& scene, const PerspectiveCamera& cam) {
  if (scene.frame != Frame::World) {
    fail(ErrorCode::Precondition, "transform_to_camera expects a world-frame scene");
  }
  cam.validate();
  return map_vertices(scene, Frame::Camera, cam.gravity_down(),
                      [&](const Vec3& v) { return cam.to_camera(v); });
}

Scene transform_to_world(const Scene& scene, const PerspectiveCamera& cam) {
  if (scene.frame != Frame::Camera) {
    fail(ErrorCode::Precondition, "transform_to_world expects a camera-frame scene");
  }
  cam.validate();
  return map_vertices(scene, Frame::World, Vec3{0.0, -1.0, 0.0},
                      [&](const Vec3& v) { return cam.to_world(v); });
}

}  // namespace mld
