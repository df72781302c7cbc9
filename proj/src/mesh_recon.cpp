#include "mld/mesh_recon.hpp"

#include <cmath>
#include <functional>

namespace mld {

namespace {

// Grid triangulation shared by depth layers and height maps. value() drives
// the diagonal choice and the edge rule; limit(i, j) is the largest allowed
// |value(i) - value(j)| for an edge.
struct GridSource {
  int width;
  int height;
  std::function<bool(int, int)> supported;
  std::function<double(int, int)> value;
  std::function<Vec3(int, int)> position;
  std::function<double(double, double)> limit;
};

Mesh triangulate(const GridSource& g) {
  Mesh mesh;
  std::vector<std::int64_t> index(static_cast<std::size_t>(g.width) *
                                      static_cast<std::size_t>(g.height),
                                  -1);
  auto vertex = [&](int x, int y) {
    auto& slot = index[static_cast<std::size_t>(y) * static_cast<std::size_t>(g.width) +
                       static_cast<std::size_t>(x)];
    if (slot < 0) {
      slot = static_cast<std::int64_t>(mesh.vertices.size());
      mesh.vertices.push_back(g.position(x, y));
    }
    return static_cast<std::uint32_t>(slot);
  };
  struct Corner {
    int x, y;
    double v;
  };
  auto edge_ok = [&](const Corner& a, const Corner& b) {
    return std::fabs(a.v - b.v) <= g.limit(a.v, b.v);
  };
  auto emit = [&](const Corner& a, const Corner& b, const Corner& c) {
    if (!edge_ok(a, b) || !edge_ok(b, c) || !edge_ok(a, c)) return;
    const Vec3 pa = g.position(a.x, a.y), pb = g.position(b.x, b.y), pc = g.position(c.x, c.y);
    if (0.5 * norm(cross(pb - pa, pc - pa)) < kMinTriangleArea) return;
    mesh.triangles.push_back({vertex(a.x, a.y), vertex(b.x, b.y), vertex(c.x, c.y)});
  };

  for (int y = 0; y + 1 < g.height; ++y) {
    for (int x = 0; x + 1 < g.width; ++x) {
      const bool s00 = g.supported(x, y), s10 = g.supported(x + 1, y);
      const bool s01 = g.supported(x, y + 1), s11 = g.supported(x + 1, y + 1);
      const int n = s00 + s10 + s01 + s11;
      if (n < 3) continue;
      const Corner c00{x, y, s00 ? g.value(x, y) : 0.0};
      const Corner c10{x + 1, y, s10 ? g.value(x + 1, y) : 0.0};
      const Corner c01{x, y + 1, s01 ? g.value(x, y + 1) : 0.0};
      const Corner c11{x + 1, y + 1, s11 ? g.value(x + 1, y + 1) : 0.0};
      if (n == 4) {
        if (std::fabs(c00.v - c11.v) <= std::fabs(c10.v - c01.v)) {
          emit(c00, c01, c11);
          emit(c00, c11, c10);
        } else {
          emit(c00, c01, c10);
          emit(c10, c01, c11);
        }
      } else if (!s10) {
        emit(c00, c01, c11);
      } else if (!s01) {
        emit(c00, c11, c10);
      } else if (!s00) {
        emit(c10, c01, c11);
      } else {
        emit(c00, c01, c10);
      }
    }
  }
  return mesh;
}

}  // namespace

SceneObject depth_layer_to_mesh(const DepthRaster& layer, const MaskRaster& mask,
                                const PerspectiveCamera& cam, double a) {
  cam.validate();
  if (!layer.same_shape(cam.width, cam.height) || !mask.same_shape(cam.width, cam.height)) {
    fail(ErrorCode::Dimension, "depth layer does not match the camera resolution");
  }
  if (!(a > 0.0)) fail(ErrorCode::InvalidArgument, "edge factor must be positive");
  const double pa = cam.pixel_angle();
  GridSource g{
      cam.width,
      cam.height,
      [&](int x, int y) { return mask(x, y) != 0 && std::isfinite(layer(x, y)); },
      [&](int x, int y) { return layer(x, y); },
      [&](int x, int y) { return cam.unproject(x + 0.5, y + 0.5, layer(x, y)); },
      [&](double za, double zb) { return a * (std::fmin(za, zb) * pa); },
  };
  SceneObject o;
  o.mesh = triangulate(g);
  return o;
}

SceneObject heightmap_to_mesh(const FeatureMap& height, const OrthographicCamera& vcam,
                              double camera_height, double floor_cutoff, double a) {
  vcam.validate();
  if (height.width != vcam.resolution || height.height != vcam.resolution) {
    fail(ErrorCode::Dimension, "height map does not match the overhead resolution");
  }
  if (!(a > 0.0)) fail(ErrorCode::InvalidArgument, "edge factor must be positive");
  const double k = vcam.scale();
  const double half = 0.5 * vcam.resolution;
  const double limit = a * vcam.footprint();
  GridSource g{
      height.width,
      height.height,
      [&](int x, int y) {
        const double h = height.at(x, y, 0);
        return height.valid(x, y) != 0 && std::isfinite(h) && h > floor_cutoff;
      },
      [&](int x, int y) { return height.at(x, y, 0); },
      [&](int x, int y) {
        // Virtual depth grows downward from the camera height.
        const Vec3 pv{(x + 0.5 - half) / k, (y + 0.5 - half) / k,
                      camera_height - height.at(x, y, 0) + vcam.translation.z};
        return vcam.from_virtual(pv);
      },
      [&](double, double) { return limit; },
  };
  SceneObject o;
  o.mesh = triangulate(g);
  return o;
}

std::vector<SceneObject> assemble_scene_mesh(const MultiLayerDepthMap& depths,
                                             const PerspectiveCamera& cam,
                                             const FeatureMap* height,
                                             const OrthographicCamera* vcam,
                                             const AssembleOptions& options) {
  std::vector<SceneObject> out;
  for (int l = 1; l <= kLayerCount; ++l) {
    if (l == 5 && !options.include_envelope) continue;
    SceneObject o = depth_layer_to_mesh(depths.layer(l), depths.mask_of(l), cam, options.a);
    if (o.mesh.empty()) continue;
    o.name = "D" + std::to_string(l);
    o.instance_id = l;
    o.is_envelope = l == 5;
    o.category_id = o.is_envelope ? 0 : 1;
    out.push_back(std::move(o));
  }
  if (height && vcam) {
    SceneObject o = heightmap_to_mesh(*height, *vcam, cam.camera_height(),
                                      options.floor_cutoff, options.a);
    if (!o.mesh.empty()) {
      o.name = "overhead";
      o.instance_id = 6;
      o.category_id = 1;
      out.push_back(std::move(o));
    }
  }
  return out;
}

}  // namespace mld
