#include "mld/ray_layers.hpp"

#include <algorithm>
#include <cstring>
#include <string>
#include <unordered_map>

#include "mld/kernels/kernels.hpp"
#include "mld/parallel.hpp"

namespace mld {

MultiLayerDepthMap::MultiLayerDepthMap(int w, int h)
    : width(w), height(h), object_mask(w, h, 0), occluded_mask(w, h, 0), envelope_mask(w, h, 0) {
  for (auto& l : layers) l = DepthRaster(w, h, kNaN);
}

const MaskRaster& MultiLayerDepthMap::mask_of(int one_based) const {
  if (one_based <= 2) return object_mask;
  if (one_based <= 4) return occluded_mask;
  return envelope_mask;
}

void MultiLayerDepthMap::rebuild_masks() {
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      object_mask(x, y) = std::isfinite(layer(1)(x, y)) ? 1 : 0;
      occluded_mask(x, y) = std::isfinite(layer(3)(x, y)) ? 1 : 0;
      envelope_mask(x, y) = std::isfinite(layer(5)(x, y)) ? 1 : 0;
    }
  }
}

void MultiLayerDepthMap::validate(double near) const {
  auto bad = [](int x, int y, const std::string& what) {
    fail(ErrorCode::InvalidArgument, "multi-layer depth invariant violated at (" +
                                         std::to_string(x) + ", " + std::to_string(y) +
                                         "): " + what);
  };
  if (width <= 0 || height <= 0) fail(ErrorCode::Dimension, "empty multi-layer depth map");
  for (const auto& l : layers) {
    if (!l.same_shape(width, height)) fail(ErrorCode::Dimension, "layer size mismatch");
  }
  const double floor_depth = near - 1e-9;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const bool m1 = object_mask(x, y) != 0;
      const bool m3 = occluded_mask(x, y) != 0;
      const bool m5 = envelope_mask(x, y) != 0;
      const double d1 = layer(1)(x, y), d2 = layer(2)(x, y), d3 = layer(3)(x, y),
                   d4 = layer(4)(x, y), d5 = layer(5)(x, y);
      if (m1 != std::isfinite(d1) || m1 != std::isfinite(d2)) bad(x, y, "M1 support");
      if (m3 != std::isfinite(d3) || m3 != std::isfinite(d4)) bad(x, y, "M3 support");
      if (m5 != std::isfinite(d5)) bad(x, y, "envelope support");
      if (m3 && !m1) bad(x, y, "M3 without M1");
      if (m1 && !(d1 <= d2)) bad(x, y, "D1 > D2");
      if (m3 && !(d2 < d3 && d3 <= d4)) bad(x, y, "D2 < D3 <= D4 violated");
      if (m1 && d1 < floor_depth) bad(x, y, "depth in front of near plane");
      if (m5 && d5 < floor_depth) bad(x, y, "envelope in front of near plane");
    }
  }
}

bool MultiLayerDepthMap::operator==(const MultiLayerDepthMap& o) const {
  if (width != o.width || height != o.height) return false;
  for (int l = 0; l < kLayerCount; ++l) {
    const auto& a = layers[l].data();
    const auto& b = o.layers[l].data();
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::isnan(a[i]) != std::isnan(b[i])) return false;
      if (!std::isnan(a[i]) && a[i] != b[i]) return false;
    }
  }
  return object_mask == o.object_mask && occluded_mask == o.occluded_mask &&
         envelope_mask == o.envelope_mask;
}

SceneTracer::SceneTracer(const Scene& scene, bool brute_force) : brute_force_(brute_force) {
  if (scene.frame != Frame::Camera) {
    fail(ErrorCode::Precondition, "ray tracing expects a camera-frame scene");
  }
  Mesh objects, envelope;
  for (const auto& o : scene.objects) {
    if (o.is_envelope) {
      envelope.append(o.mesh);
    } else {
      objects.append(o.mesh);
      owners_.insert(owners_.end(), o.mesh.triangles.size(),
                     TriangleOwner{o.instance_id, o.category_id});
    }
  }
  objects_ = TriangleBvh(objects);
  envelope_ = TriangleBvh(envelope);
}

void SceneTracer::collect(const TriangleBvh& bvh, const Vec3& o, const Vec3& d,
                          std::vector<RayHit>& out) const {
  if (brute_force_) {
    bvh.all_hits_brute_force(o, d, 0.0, out);
  } else {
    bvh.all_hits(o, d, 0.0, out);
  }
}

RayIntervals SceneTracer::object_intervals(const Vec3& origin, const Vec3& dir) const {
  thread_local std::vector<RayHit> hits;
  hits.clear();
  collect(objects_, origin, dir, hits);
  // Hits ordered by (t, instance_id, triangle): ties between instances resolve
  // toward the lower id.
  std::sort(hits.begin(), hits.end(), [&](const RayHit& a, const RayHit& b) {
    if (a.t != b.t) return a.t < b.t;
    const int ia = owners_[a.triangle].instance_id;
    const int ib = owners_[b.triangle].instance_id;
    if (ia != ib) return ia < ib;
    return a.triangle < b.triangle;
  });
  RayIntervals out;
  for (const auto& h : hits) {
    const TriangleOwner& owner = owners_[h.triangle];
    auto it = std::find_if(out.begin(), out.end(), [&](const RayInterval& r) {
      return r.instance_id == owner.instance_id;
    });
    if (it == out.end()) {
      out.push_back({owner.instance_id, h.t, h.t, owner.category_id});
    } else {
      it->t_exit = h.t;
    }
  }
  // Appended in order of first hit, so already sorted by (t_enter, instance_id).
  return out;
}

double SceneTracer::envelope_hit(const Vec3& origin, const Vec3& dir) const {
  thread_local std::vector<RayHit> hits;
  hits.clear();
  collect(envelope_, origin, dir, hits);
  double best = kNaN;
  for (const auto& h : hits) {
    if (!(h.t >= best)) best = h.t;
  }
  return best;
}

RayIntervals ray_object_intervals(const Scene& scene, const Vec3& origin, const Vec3& dir) {
  return SceneTracer(scene).object_intervals(origin, dir);
}

namespace {

void require_clipped(const Scene& scene, const PerspectiveCamera& cam) {
  for (const auto& o : scene.objects) {
    for (const auto& v : o.mesh.vertices) {
      if (v.z < cam.near - 1e-9) {
        fail(ErrorCode::Precondition,
             "scene has vertices in front of the near plane; clip it to the frustum first");
      }
    }
  }
}

}  // namespace

LayeredTrace trace_layers(const Scene& scene, const PerspectiveCamera& cam,
                          const TraceOptions& options) {
  cam.validate();
  require_clipped(scene, cam);
  const SceneTracer tracer(scene, options.brute_force);

  LayeredTrace out;
  out.depths = MultiLayerDepthMap(cam.width, cam.height);
  out.semantics = SemanticLayerMap(cam.width, cam.height);
  std::vector<int> row_max(cam.height, 0);

  auto& d = out.depths;
  auto& sem = out.semantics;
  parallel_for(static_cast<std::size_t>(cam.height), options.threads,
               [&](std::size_t y0, std::size_t y1) {
    for (std::size_t yy = y0; yy < y1; ++yy) {
      const int y = static_cast<int>(yy);
      for (int x = 0; x < cam.width; ++x) {
        // Unnormalized ray with unit z: the hit parameter is the z depth.
        const Vec3 dir = cam.ray(x + 0.5, y + 0.5);
        const double env = tracer.envelope_hit(Vec3{}, dir);
        RayIntervals iv = tracer.object_intervals(Vec3{}, dir);
        if (std::isfinite(env)) {
          std::erase_if(iv, [&](const RayInterval& r) { return r.t_enter >= env; });
        }
        row_max[y] = std::max(row_max[y], static_cast<int>(iv.size()));
        if (std::isfinite(env)) {
          d.layer(5)(x, y) = env;
          d.envelope_mask(x, y) = 1;
        }
        if (iv.empty()) continue;
        const RayInterval& first = iv.front();
        d.layer(1)(x, y) = first.t_enter;
        d.layer(2)(x, y) = first.t_exit;
        d.object_mask(x, y) = 1;
        sem.sem1(x, y) = static_cast<std::uint16_t>(first.category_id);
        auto next = std::find_if(iv.begin() + 1, iv.end(), [&](const RayInterval& r) {
          return r.t_enter > first.t_exit;
        });
        if (next != iv.end()) {
          d.layer(3)(x, y) = next->t_enter;
          d.layer(4)(x, y) = next->t_exit;
          d.occluded_mask(x, y) = 1;
          sem.sem3(x, y) = static_cast<std::uint16_t>(next->category_id);
        }
      }
    }
  });
  out.max_intervals_per_ray = row_max.empty() ? 0 : *std::max_element(row_max.begin(), row_max.end());
  return out;
}

DepthRaster trace_envelope(const Scene& scene, const PerspectiveCamera& cam,
                           const TraceOptions& options) {
  cam.validate();
  const SceneTracer tracer(scene, options.brute_force);
  DepthRaster out(cam.width, cam.height, kNaN);
  parallel_for(static_cast<std::size_t>(cam.height), options.threads,
               [&](std::size_t y0, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y) {
      for (int x = 0; x < cam.width; ++x) {
        const Vec3 dir = cam.ray(x + 0.5, static_cast<double>(y) + 0.5);
        out(x, static_cast<int>(y)) = tracer.envelope_hit(Vec3{}, dir);
      }
    }
  });
  return out;
}

DepthRaster trace_overhead_heights(const Scene& scene, const PerspectiveCamera& cam,
                                   const OrthographicCamera& vcam, const TraceOptions& options) {
  cam.validate();
  vcam.validate();
  const SceneTracer tracer(scene, options.brute_force);
  // Start every ray above the highest vertex in the virtual frame.
  double top = 0.0;
  for (const auto& o : scene.objects) {
    for (const auto& v : o.mesh.vertices) top = std::fmin(top, vcam.to_virtual(v).z);
  }
  top -= 1.0;
  const Vec3 dir = vcam.rotation.transposed() * Vec3{0.0, 0.0, 1.0};
  const double k = vcam.scale();
  const double half = 0.5 * vcam.resolution;

  DepthRaster out(vcam.resolution, vcam.resolution, kNaN);
  parallel_for(static_cast<std::size_t>(vcam.resolution), options.threads,
               [&](std::size_t j0, std::size_t j1) {
    for (std::size_t jj = j0; jj < j1; ++jj) {
      const int j = static_cast<int>(jj);
      for (int i = 0; i < vcam.resolution; ++i) {
        const Vec3 start_v{(i + 0.5 - half) / k, (j + 0.5 - half) / k, top};
        const Vec3 origin = vcam.from_virtual(start_v);
        const RayIntervals iv = tracer.object_intervals(origin, dir);
        if (iv.empty()) continue;
        out(i, j) = cam.height_of(origin + dir * iv.front().t_enter);
      }
    }
  });
  return out;
}

double multilayer_depth_loss(const MultiLayerDepthMap& pred, const MultiLayerDepthMap& gt,
                             double delta_h) {
  if (pred.width != gt.width || pred.height != gt.height) {
    fail(ErrorCode::Dimension, "prediction and ground truth sizes differ");
  }
  if (!(delta_h > 0.0)) fail(ErrorCode::InvalidArgument, "Huber delta must be positive");
  const auto& kern = kernels::active();
  double total = 0.0;
  for (int l = 1; l <= kLayerCount; ++l) {
    const MaskRaster& mask = gt.mask_of(l);
    const auto& m = mask.data();
    const auto count = static_cast<std::size_t>(std::count_if(m.begin(), m.end(),
                                                              [](std::uint8_t v) { return v; }));
    if (count == 0) continue;
    if (!pred.layer(l).same_shape(gt.width, gt.height) ||
        !gt.layer(l).same_shape(gt.width, gt.height)) {
      fail(ErrorCode::Dimension, "layer size mismatch");
    }
    const double sum = kern.huber_masked_sum(pred.layer(l).data().data(),
                                             gt.layer(l).data().data(), m.data(), m.size(),
                                             delta_h);
    total += sum / static_cast<double>(count);
  }
  return total;
}

}  // namespace mld
