#include <algorithm>

#include "mld/parallel.hpp"
#include "mld/ray_layers.hpp"
#include "mld/scene.hpp"

namespace mld {

std::vector<Vec3> clip_polygon(const std::vector<Vec3>& polygon, const Plane& plane) {
  std::vector<Vec3> out;
  const std::size_t n = polygon.size();
  if (n == 0) return out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& a = polygon[i];
    const Vec3& b = polygon[(i + 1) % n];
    const double da = plane.signed_distance(a);
    const double db = plane.signed_distance(b);
    if (da >= 0.0) out.push_back(a);
    if ((da >= 0.0) != (db >= 0.0)) {
      const double s = da / (da - db);
      Vec3 p = a + (b - a) * s;
      // Project the crossing onto the plane to absorb interpolation error.
      p -= plane.normal * plane.signed_distance(p);
      out.push_back(p);
    }
  }
  return out;
}

Scene clip_to_frustum(const Scene& scene, const PerspectiveCamera& cam) {
  if (scene.frame != Frame::Camera) {
    fail(ErrorCode::Precondition, "clip_to_frustum expects a camera-frame scene");
  }
  cam.validate();
  const auto planes = cam.frustum_planes();

  Scene out;
  out.frame = scene.frame;
  out.gravity_axis = scene.gravity_axis;
  for (const auto& object : scene.objects) {
    SceneObject clipped = object;
    clipped.mesh = Mesh{};
    for (const auto& tri : object.mesh.triangles) {
      const Vec3& a = object.mesh.vertices[tri[0]];
      const Vec3& b = object.mesh.vertices[tri[1]];
      const Vec3& c = object.mesh.vertices[tri[2]];
      bool inside = true;
      for (const auto& pl : planes) {
        if (pl.signed_distance(a) < 0.0 || pl.signed_distance(b) < 0.0 ||
            pl.signed_distance(c) < 0.0) {
          inside = false;
          break;
        }
      }
      if (inside) {
        clipped.mesh.add_triangle(a, b, c);
        continue;
      }
      std::vector<Vec3> poly{a, b, c};
      for (const auto& pl : planes) {
        poly = clip_polygon(poly, pl);
        if (poly.size() < 3) break;
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        clipped.mesh.add_triangle(poly[0], poly[k], poly[k + 1]);
      }
    }
    if (!clipped.mesh.triangles.empty()) out.objects.push_back(std::move(clipped));
  }
  return out;
}

Scene remove_hidden_objects(const Scene& scene, const PerspectiveCamera& cam,
                            const DepthRaster& envelope_depth, int threads, double epsilon) {
  cam.validate();
  if (!envelope_depth.same_shape(cam.width, cam.height)) {
    fail(ErrorCode::Dimension, "envelope depth raster does not match the camera resolution");
  }
  const SceneTracer tracer(scene);

  // visible[k] set when object k has at least one covered pixel in front of
  // the envelope (or with no envelope behind it).
  std::vector<int> ids;
  for (const auto& o : scene.objects) ids.push_back(o.instance_id);
  const std::size_t rows = static_cast<std::size_t>(cam.height);
  const int workers = std::max(1, threads);
  std::vector<std::vector<std::uint8_t>> visible(workers,
                                                 std::vector<std::uint8_t>(ids.size(), 0));
  const std::size_t chunk = (rows + workers - 1) / workers;
  parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w0, std::size_t w1) {
    for (std::size_t w = w0; w < w1; ++w) {
      const std::size_t y_end = std::min(rows, (w + 1) * chunk);
      for (std::size_t y = w * chunk; y < y_end; ++y) {
        for (int x = 0; x < cam.width; ++x) {
          const Vec3 dir = cam.ray(x + 0.5, static_cast<double>(y) + 0.5);
          const double env = envelope_depth(x, static_cast<int>(y));
          for (const auto& iv : tracer.object_intervals(Vec3{}, dir)) {
            if (std::isfinite(env) && iv.t_enter > env + epsilon) continue;
            const auto k = static_cast<std::size_t>(
                std::find(ids.begin(), ids.end(), iv.instance_id) - ids.begin());
            visible[w][k] = 1;
          }
        }
      }
    }
  });

  Scene out;
  out.frame = scene.frame;
  out.gravity_axis = scene.gravity_axis;
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    const auto& o = scene.objects[k];
    bool keep = o.is_envelope;
    for (int w = 0; w < workers && !keep; ++w) keep = visible[w][k] != 0;
    if (keep) out.objects.push_back(o);
  }
  return out;
}

}  // namespace mld
