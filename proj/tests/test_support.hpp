#pragma once

// Scene builders and independent reference implementations shared by the
// unit and acceptance tests. The oracles here deliberately avoid the library's
// hierarchy, kernels and scan order.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "mld/epipolar.hpp"
#include "mld/ray_layers.hpp"
#include "mld/scene.hpp"
#include "mld/synth.hpp"

namespace mld::test {

// Pinhole camera at the origin with identity pose, square pixels, centered
// principal point.
inline PerspectiveCamera pinhole(int w, int h, double f) {
  PerspectiveCamera cam;
  cam.width = w;
  cam.height = h;
  cam.fx = f;
  cam.fy = f;
  cam.cx = 0.5 * w;
  cam.cy = 0.5 * h;
  cam.near = 0.05;
  return cam;
}

inline SceneObject box_object(const Vec3& lo, const Vec3& hi, int id, int category = 1) {
  SceneObject o;
  o.name = "box_" + std::to_string(id);
  o.mesh = box_mesh(lo, hi);
  o.instance_id = id;
  o.category_id = category;
  return o;
}

// Envelope rectangle at camera depth z covering [-half, half]^2, facing the camera.
inline SceneObject wall_at(double z, double half, int id) {
  SceneObject o;
  o.name = "wall_" + std::to_string(id);
  o.mesh.vertices = {{-half, -half, z}, {half, -half, z}, {half, half, z}, {-half, half, z}};
  o.mesh.triangles = {{0, 2, 1}, {0, 3, 2}};
  o.instance_id = id;
  o.category_id = 0;
  o.is_envelope = true;
  return o;
}

inline Scene camera_scene(std::vector<SceneObject> objects) {
  Scene s;
  s.frame = Frame::Camera;
  s.objects = std::move(objects);
  return s;
}

// World scene -> camera frame, frustum clip, hidden-object removal.
struct PreparedView {
  Scene scene;
  PerspectiveCamera cam;
};

inline PreparedView prepare_view(const Scene& world, const PerspectiveCamera& cam,
                                 int threads = 1) {
  Scene c = clip_to_frustum(transform_to_camera(world, cam), cam);
  TraceOptions opts;
  opts.threads = threads;
  c = remove_hidden_objects(c, cam, trace_envelope(c, cam, opts), threads);
  return {std::move(c), cam};
}

// Plane-then-barycentric ray/triangle test (no Moller-Trumbore), t >= 0 along o + t d.
inline bool naive_ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b,
                               const Vec3& c, double& t_out) {
  const Vec3 n = cross(b - a, c - a);
  const double nn = norm(n);
  if (nn == 0.0) return false;
  const double denom = dot(n, d);
  if (std::fabs(denom) < 1e-9 * nn * norm(d)) return false;
  const double t = dot(n, a - o) / denom;
  if (t < 0.0) return false;
  const Vec3 p = o + d * t;
  const double tol = -1e-12 * nn;
  if (dot(cross(b - a, p - a), n) < tol) return false;
  if (dot(cross(c - b, p - b), n) < tol) return false;
  if (dot(cross(a - c, p - c), n) < tol) return false;
  t_out = t;
  return true;
}

struct NaiveInterval {
  int id;
  double enter;
  double exit;
  int category;
};

// Per-instance first/last hit over every triangle, sorted by (enter, id).
inline std::vector<NaiveInterval> naive_intervals(const Scene& scene, const Vec3& o, const Vec3& d,
                                                  bool envelope) {
  std::vector<NaiveInterval> out;
  for (const auto& obj : scene.objects) {
    if (obj.is_envelope != envelope) continue;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& t : obj.mesh.triangles) {
      double th;
      if (naive_ray_triangle(o, d, obj.mesh.vertices[t[0]], obj.mesh.vertices[t[1]],
                             obj.mesh.vertices[t[2]], th)) {
        lo = std::min(lo, th);
        hi = std::max(hi, th);
      }
    }
    if (lo <= hi) out.push_back({obj.instance_id, lo, hi, obj.category_id});
  }
  std::sort(out.begin(), out.end(), [](const NaiveInterval& a, const NaiveInterval& b) {
    return a.enter != b.enter ? a.enter < b.enter : a.id < b.id;
  });
  return out;
}

// Five layers for one pixel ray from the naive intervals.
inline std::array<double, 5> naive_layers(const Scene& scene, const Vec3& dir) {
  std::array<double, 5> d;
  d.fill(kNaN);
  const auto env = naive_intervals(scene, Vec3{}, dir, true);
  const double e = env.empty() ? kNaN : env.front().enter;
  auto iv = naive_intervals(scene, Vec3{}, dir, false);
  if (std::isfinite(e)) {
    std::erase_if(iv, [&](const NaiveInterval& r) { return r.enter >= e; });
  }
  d[4] = e;
  if (!iv.empty()) {
    d[0] = iv[0].enter;
    d[1] = iv[0].exit;
    for (std::size_t k = 1; k < iv.size(); ++k) {
      if (iv[k].enter > iv[0].exit) {
        d[2] = iv[k].enter;
        d[3] = iv[k].exit;
        break;
      }
    }
  }
  return d;
}

// Literal gating definitions evaluated pixel by pixel.
inline std::vector<GateSample> naive_gate(const GatingSpec& g, const MultiLayerDepthMap& depths,
                                          const PerspectiveCamera& cam,
                                          const OrthographicCamera& vcam, int s, int t) {
  const double step = g.z_step > 0.0 ? g.z_step : 0.5 * vcam.footprint();
  std::vector<GateSample> out;
  auto range = [&](double lo, double hi) {
    const auto n = static_cast<long long>(std::floor((hi - lo) / step)) + 1;
    for (long long k = 0; k < n; ++k) out.push_back({lo + static_cast<double>(k) * step, 1.0});
  };
  auto cell_of = [&](int ss, int tt, double z) {
    const auto uv = forward_map(cam, vcam, ss + 0.5, tt + 0.5, z);
    return std::array<double, 2>{std::floor(uv[0]), std::floor(uv[1])};
  };
  switch (g.kind) {
    case GatingKind::SurfaceAll:
      for (int l = 1; l <= 4; ++l) {
        const double z = depths.layer(l)(s, t);
        if (!std::isfinite(z)) continue;
        // Weight 1 unless a pixel above in the same column lands in the same cell.
        bool occluded = false;
        for (int th = 0; th < t && !occluded; ++th) {
          const double zh = depths.layer(l)(s, th);
          if (std::isfinite(zh) && cell_of(s, th, zh) == cell_of(s, t, z)) occluded = true;
        }
        if (!occluded) out.push_back({z, 1.0});
      }
      std::sort(out.begin(), out.end(),
                [](const GateSample& a, const GateSample& b) { return a.z < b.z; });
      out.erase(std::unique(out.begin(), out.end(),
                            [](const GateSample& a, const GateSample& b) { return a.z == b.z; }),
                out.end());
      break;
    case GatingKind::Volume12:
    case GatingKind::Volume34: {
      const int f = g.kind == GatingKind::Volume12 ? 1 : 3;
      const double a = depths.layer(f)(s, t), b = depths.layer(f + 1)(s, t);
      if (!std::isfinite(a) || !std::isfinite(b) || !(b > a)) break;
      const double lo = a + 0.25 * step, hi = b - 0.25 * step;
      if (lo > hi) {
        out.push_back({0.5 * (a + b), 1.0});
      } else {
        range(lo, hi);
      }
      break;
    }
    case GatingKind::Constant:
      range(g.z_min > 0.0 ? g.z_min : cam.near, g.z_max > 0.0 ? g.z_max : default_z_max(depths));
      break;
    case GatingKind::BestGuessHeight: {
      const double z = depths.layer(1)(s, t);
      if (std::isfinite(z)) out.push_back({z, z});
      break;
    }
  }
  return out;
}

// Triple loop sum F W / sum W with bilinear splatting, then the same infill rule.
inline FeatureMap naive_transfer(const FeatureMap& f, const GatingSpec& g,
                                 const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                                 const OrthographicCamera& vcam, bool infill = true) {
  const int res = vcam.resolution;
  const int c = f.channels;
  std::vector<double> num(static_cast<std::size_t>(res * res * c), 0.0);
  std::vector<double> den(static_cast<std::size_t>(res * res), 0.0);
  for (int s = 0; s < cam.width; ++s) {
    for (int t = 0; t < cam.height; ++t) {
      if (!f.valid(s, t)) continue;
      for (const auto& smp : naive_gate(g, depths, cam, vcam, s, t)) {
        if (!(smp.weight > 0.0)) continue;
        const auto uv = forward_map(cam, vcam, s + 0.5, t + 0.5, smp.z);
        const double fu = uv[0] - 0.5, fv = uv[1] - 0.5;
        const double iu = std::floor(fu), iv = std::floor(fv);
        const double a = fu - iu, b = fv - iv;
        const double wts[4] = {(1.0 - a) * (1.0 - b), a * (1.0 - b), (1.0 - a) * b, a * b};
        for (int k = 0; k < 4; ++k) {
          const double cx = iu + (k & 1), cy = iv + (k >> 1);
          if (cx < 0 || cy < 0 || cx >= res || cy >= res) continue;
          const double wb = smp.weight * wts[k];
          if (!(wb > 0.0)) continue;
          const auto cell = static_cast<std::size_t>(cy) * static_cast<std::size_t>(res) +
                            static_cast<std::size_t>(cx);
          for (int ch = 0; ch < c; ++ch) num[cell * c + ch] += f.at(s, t, ch) * wb;
          den[cell] += wb;
        }
      }
    }
  }
  FeatureMap out(res, res, c, 0.0, 0);
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      const auto cell = static_cast<std::size_t>(y * res + x);
      if (!(den[cell] > 0.0)) continue;
      for (int ch = 0; ch < c; ++ch) out.at(x, y, ch) = num[cell * c + ch] / den[cell];
      out.valid(x, y) = 1;
    }
  }
  if (!infill) return out;
  const FeatureMap mask =
      frustum_mask(cam, vcam, g.z_max > 0.0 ? g.z_max : default_z_max(depths));
  for (int round = 0; round < kInfillRounds; ++round) {
    FeatureMap next = out;
    bool changed = false;
    for (int y = 0; y < res; ++y) {
      for (int x = 0; x < res; ++x) {
        if (out.valid(x, y) || mask.at(x, y, 0) == 0.0) continue;
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        std::vector<double> sum(static_cast<std::size_t>(c), 0.0);
        int count = 0;
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || ny[k] < 0 || nx[k] >= res || ny[k] >= res) continue;
          if (!out.valid(nx[k], ny[k])) continue;
          for (int ch = 0; ch < c; ++ch) sum[static_cast<std::size_t>(ch)] += out.at(nx[k], ny[k], ch);
          ++count;
        }
        if (count == 0) continue;
        for (int ch = 0; ch < c; ++ch) next.at(x, y, ch) = sum[static_cast<std::size_t>(ch)] / count;
        next.valid(x, y) = 1;
        changed = true;
      }
    }
    out = next;
    if (!changed) break;
  }
  return out;
}

// Random layered depths obeying the ordering invariants, with random holes.
inline MultiLayerDepthMap random_depths(Rng& rng, int w, int h, double zmin = 1.0,
                                        double zmax = 6.0) {
  MultiLayerDepthMap d(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      d.layer(5)(x, y) = rng.uniform(0.8 * zmax, zmax);
      if (rng.uniform() < 0.25) continue;
      const double d1 = rng.uniform(zmin, 0.6 * zmax);
      const double d2 = d1 + rng.uniform(0.0, 0.5);
      d.layer(1)(x, y) = d1;
      d.layer(2)(x, y) = d2;
      if (rng.uniform() < 0.4) continue;
      const double d3 = d2 + rng.uniform(0.01, 0.5);
      d.layer(3)(x, y) = d3;
      d.layer(4)(x, y) = std::min(0.8 * zmax - 1e-3, d3 + rng.uniform(0.0, 0.5));
      if (!(d.layer(4)(x, y) >= d3)) d.layer(4)(x, y) = d3;
    }
  }
  d.rebuild_masks();
  return d;
}

inline std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "mldepth_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace mld::test
