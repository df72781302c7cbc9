#include "mld/epipolar.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_map>

#include "mld/kernels/kernels.hpp"
#include "mld/parallel.hpp"

namespace mld {

FeatureMap::FeatureMap(int w, int h, int c, double fill, std::uint8_t valid_fill)
    : width(w), height(h), channels(c), valid(w, h, valid_fill) {
  if (c <= 0) fail(ErrorCode::Dimension, "feature map needs at least one channel");
  data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) *
                  static_cast<std::size_t>(c),
              fill);
}

bool FeatureMap::operator==(const FeatureMap& o) const {
  if (width != o.width || height != o.height || channels != o.channels) return false;
  if (data.size() != o.data.size() || !(valid == o.valid)) return false;
  return std::memcmp(data.data(), o.data.data(), data.size() * sizeof(double)) == 0;
}

GatingKind parse_gating(const std::string& name) {
  if (name == "surface") return GatingKind::SurfaceAll;
  if (name == "volume12") return GatingKind::Volume12;
  if (name == "volume34") return GatingKind::Volume34;
  if (name == "const") return GatingKind::Constant;
  if (name == "bestguess") return GatingKind::BestGuessHeight;
  fail(ErrorCode::InvalidArgument, "unknown gating '" + name + "'");
}

const char* to_string(GatingKind kind) {
  switch (kind) {
    case GatingKind::SurfaceAll: return "surface";
    case GatingKind::Volume12: return "volume12";
    case GatingKind::Volume34: return "volume34";
    case GatingKind::Constant: return "const";
    case GatingKind::BestGuessHeight: return "bestguess";
  }
  return "surface";
}

CameraParam parse_camera_param(const std::string& name) {
  if (name == "t_x") return CameraParam::TranslationX;
  if (name == "t_y") return CameraParam::TranslationY;
  if (name == "sigma") return CameraParam::Sigma;
  fail(ErrorCode::InvalidArgument, "unknown camera parameter '" + name + "'");
}

std::array<double, 2> forward_map(const PerspectiveCamera& cam, const OrthographicCamera& vcam,
                                  double s, double t, double z) {
  return vcam.image_of(vcam.to_virtual(cam.ray(s, t) * z));
}

double default_z_max(const MultiLayerDepthMap& depths) {
  double best = -1.0;
  for (const auto& layer : depths.layers) {
    for (double d : layer.data()) {
      if (std::isfinite(d) && d > best) best = d;
    }
  }
  return best > 0.0 ? best : kDefaultFrustumDepth;
}

namespace {

void check_inputs(const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                  const OrthographicCamera& vcam) {
  cam.validate();
  if (!(vcam.theta_deg < 90.0)) {
    fail(ErrorCode::Unsupported, "surface occlusion ordering requires theta < 90 degrees");
  }
  vcam.validate();
  if (depths.width != cam.width || depths.height != cam.height) {
    fail(ErrorCode::Dimension, "depth map does not match the camera resolution");
  }
}

struct GatePlan {
  GatingKind kind;
  double step;
  double z_min;
  double z_max;
};

GatePlan make_plan(const GatingSpec& g, const MultiLayerDepthMap& depths,
                   const PerspectiveCamera& cam, const OrthographicCamera& vcam) {
  GatePlan p{g.kind, g.z_step, g.z_min, g.z_max};
  const double footprint = vcam.footprint();
  if (!(p.step > 0.0)) p.step = 0.5 * footprint;
  if (p.step > footprint) {
    fail(ErrorCode::InvalidArgument, "z_step must not exceed the overhead pixel footprint");
  }
  if (!(p.z_min > 0.0)) p.z_min = cam.near;
  if (!(p.z_max > 0.0)) p.z_max = default_z_max(depths);
  return p;
}

// Last-writer flags for one column of one layer, scanning bottom to top.
void column_survivors(const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                      const OrthographicCamera& vcam, int x, int layer,
                      std::vector<std::uint8_t>& survive) {
  const DepthRaster& d = depths.layer(layer);
  const int h = depths.height;
  survive.assign(static_cast<std::size_t>(h), 0);
  std::unordered_map<std::uint64_t, int> owner;
  std::vector<std::uint64_t> key(static_cast<std::size_t>(h), 0);
  for (int y = h - 1; y >= 0; --y) {
    const double z = d(x, y);
    if (!std::isfinite(z)) continue;
    const auto uv = forward_map(cam, vcam, x + 0.5, y + 0.5, z);
    const auto cu = static_cast<std::int64_t>(std::floor(uv[0]));
    const auto cv = static_cast<std::int64_t>(std::floor(uv[1]));
    const std::uint64_t k = (static_cast<std::uint64_t>(cu) << 32) ^
                            (static_cast<std::uint64_t>(cv) & 0xffffffffULL);
    key[static_cast<std::size_t>(y)] = k;
    owner[k] = y;
  }
  for (int y = 0; y < h; ++y) {
    if (!std::isfinite(d(x, y))) continue;
    survive[static_cast<std::size_t>(y)] = owner[key[static_cast<std::size_t>(y)]] == y ? 1 : 0;
  }
}

void range_samples(double lo, double hi, double step, std::vector<GateSample>& out) {
  const auto n = static_cast<long long>(std::floor((hi - lo) / step)) + 1;
  for (long long k = 0; k < n; ++k) out.push_back({lo + static_cast<double>(k) * step, 1.0});
}

void volume_samples(double a, double b, double step, std::vector<GateSample>& out) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(b > a)) return;
  const double lo = a + 0.25 * step;
  const double hi = b - 0.25 * step;
  if (lo > hi) {
    out.push_back({0.5 * (a + b), 1.0});
    return;
  }
  range_samples(lo, hi, step, out);
}

// Samples of every row of column x.
void column_samples(const GatePlan& plan, const MultiLayerDepthMap& depths,
                    const PerspectiveCamera& cam, const OrthographicCamera& vcam, int x,
                    std::vector<std::vector<GateSample>>& rows) {
  const int h = depths.height;
  rows.assign(static_cast<std::size_t>(h), {});
  switch (plan.kind) {
    case GatingKind::SurfaceAll: {
      std::vector<std::uint8_t> survive;
      for (int layer = 1; layer <= 4; ++layer) {
        column_survivors(depths, cam, vcam, x, layer, survive);
        for (int y = 0; y < h; ++y) {
          if (survive[static_cast<std::size_t>(y)]) {
            rows[static_cast<std::size_t>(y)].push_back({depths.layer(layer)(x, y), 1.0});
          }
        }
      }
      for (auto& r : rows) {
        std::sort(r.begin(), r.end(),
                  [](const GateSample& a, const GateSample& b) { return a.z < b.z; });
        r.erase(std::unique(r.begin(), r.end(),
                            [](const GateSample& a, const GateSample& b) { return a.z == b.z; }),
                r.end());
      }
      break;
    }
    case GatingKind::Volume12:
    case GatingKind::Volume34: {
      const int front = plan.kind == GatingKind::Volume12 ? 1 : 3;
      for (int y = 0; y < h; ++y) {
        volume_samples(depths.layer(front)(x, y), depths.layer(front + 1)(x, y), plan.step,
                       rows[static_cast<std::size_t>(y)]);
      }
      break;
    }
    case GatingKind::Constant:
      for (int y = 0; y < h; ++y) {
        range_samples(plan.z_min, plan.z_max, plan.step, rows[static_cast<std::size_t>(y)]);
      }
      break;
    case GatingKind::BestGuessHeight:
      for (int y = 0; y < h; ++y) {
        const double z = depths.layer(1)(x, y);
        if (std::isfinite(z)) rows[static_cast<std::size_t>(y)].push_back({z, z});
      }
      break;
  }
}

// One gated ray point with its continuous overhead coordinates.
struct Splat {
  int x, y;
  double z, w, u, v;
};

// Splats of columns [x0, x1), each column in row order then ascending z.
void column_splats(const GatePlan& plan, const MultiLayerDepthMap& depths,
                   const PerspectiveCamera& cam, const OrthographicCamera& vcam,
                   const MaskRaster* valid, int x, std::vector<Splat>& out) {
  std::vector<std::vector<GateSample>> rows;
  column_samples(plan, depths, cam, vcam, x, rows);
  out.clear();
  for (int y = 0; y < depths.height; ++y) {
    if (valid && !(*valid)(x, y)) continue;
    for (const auto& g : rows[static_cast<std::size_t>(y)]) {
      if (!(g.weight > 0.0)) continue;
      const auto uv = forward_map(cam, vcam, x + 0.5, y + 0.5, g.z);
      out.push_back({x, y, g.z, g.weight, uv[0], uv[1]});
    }
  }
}

// Adds one column's splats into the sums in order.
void accumulate_column(const std::vector<Splat>& splats, const FeatureMap& f, TransferSums& sums,
                       const kernels::KernelTable& kern) {
  const std::size_t n = splats.size();
  if (n == 0) return;
  std::vector<double> us(n), vs(n), wts(4 * n);
  std::vector<std::int32_t> bu(n), bv(n);
  for (std::size_t i = 0; i < n; ++i) {
    us[i] = splats[i].u;
    vs[i] = splats[i].v;
  }
  kern.bilinear_weights(us.data(), vs.data(), n, bu.data(), bv.data(), wts.data());
  const int res = sums.resolution;
  const auto c = static_cast<std::size_t>(sums.channels);
  for (std::size_t i = 0; i < n; ++i) {
    const double* fp = f.pixel(splats[i].x, splats[i].y);
    for (int k = 0; k < 4; ++k) {
      const std::int32_t cx = bu[i] + (k & 1);
      const std::int32_t cy = bv[i] + (k >> 1);
      if (cx < 0 || cy < 0 || cx >= res || cy >= res) continue;
      const double wb = splats[i].w * wts[4 * i + static_cast<std::size_t>(k)];
      if (!(wb > 0.0)) continue;
      const std::size_t cell = static_cast<std::size_t>(cy) * static_cast<std::size_t>(res) +
                               static_cast<std::size_t>(cx);
      kern.axpy(sums.numerator.data() + cell * c, fp, wb, c);
      sums.weight[cell] += wb;
    }
  }
}

}  // namespace

std::vector<GateSample> gating_surface(const MultiLayerDepthMap& depths,
                                       const PerspectiveCamera& cam,
                                       const OrthographicCamera& vcam, int x, int y, int layer) {
  check_inputs(depths, cam, vcam);
  if (layer < 1 || layer > 4) fail(ErrorCode::InvalidArgument, "surface layer must be 1..4");
  if (x < 0 || y < 0 || x >= depths.width || y >= depths.height) {
    fail(ErrorCode::InvalidArgument, "pixel outside the depth map");
  }
  std::vector<std::uint8_t> survive;
  column_survivors(depths, cam, vcam, x, layer, survive);
  const double z = depths.layer(layer)(x, y);
  if (!std::isfinite(z)) return {};
  return {{z, survive[static_cast<std::size_t>(y)] ? 1.0 : 0.0}};
}

std::vector<GateSample> gate_samples(const GatingSpec& gating, const MultiLayerDepthMap& depths,
                                     const PerspectiveCamera& cam,
                                     const OrthographicCamera& vcam, int x, int y) {
  check_inputs(depths, cam, vcam);
  if (x < 0 || y < 0 || x >= depths.width || y >= depths.height) {
    fail(ErrorCode::InvalidArgument, "pixel outside the depth map");
  }
  const GatePlan plan = make_plan(gating, depths, cam, vcam);
  std::vector<std::vector<GateSample>> rows;
  column_samples(plan, depths, cam, vcam, x, rows);
  return rows[static_cast<std::size_t>(y)];
}

TransferSums accumulate_transfer(const FeatureMap& features, const GatingSpec& gating,
                                 const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                                 const OrthographicCamera& vcam, int threads) {
  check_inputs(depths, cam, vcam);
  if (features.width != cam.width || features.height != cam.height) {
    fail(ErrorCode::Dimension, "feature map does not match the camera resolution");
  }
  const GatePlan plan = make_plan(gating, depths, cam, vcam);
  TransferSums sums;
  sums.resolution = vcam.resolution;
  sums.channels = features.channels;
  const auto cells = static_cast<std::size_t>(vcam.resolution) *
                     static_cast<std::size_t>(vcam.resolution);
  sums.numerator.assign(cells * static_cast<std::size_t>(features.channels), 0.0);
  sums.weight.assign(cells, 0.0);

  const auto& kern = kernels::active();
  // Splats are generated in parallel per block of columns and accumulated
  // serially in column order, so sums never depend on the worker count.
  const int block = std::max(1, threads) * 16;
  std::vector<std::vector<Splat>> columns(static_cast<std::size_t>(block));
  for (int x0 = 0; x0 < cam.width; x0 += block) {
    const int x1 = std::min(cam.width, x0 + block);
    parallel_for(static_cast<std::size_t>(x1 - x0), threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        column_splats(plan, depths, cam, vcam, &features.valid, x0 + static_cast<int>(i),
                      columns[i]);
      }
    });
    for (int x = x0; x < x1; ++x) {
      accumulate_column(columns[static_cast<std::size_t>(x - x0)], features, sums, kern);
    }
  }
  return sums;
}

FeatureMap transfer_features(const FeatureMap& features, const GatingSpec& gating,
                             const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                             const OrthographicCamera& vcam, const TransferOptions& options) {
  const TransferSums sums =
      accumulate_transfer(features, gating, depths, cam, vcam, options.threads);
  const int res = vcam.resolution;
  const auto c = static_cast<std::size_t>(features.channels);
  FeatureMap out(res, res, features.channels, 0.0, 0);
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      const std::size_t cell = static_cast<std::size_t>(y) * static_cast<std::size_t>(res) +
                               static_cast<std::size_t>(x);
      const double w = sums.weight[cell];
      if (!(w > 0.0)) continue;
      for (std::size_t k = 0; k < c; ++k) out.data[cell * c + k] = sums.numerator[cell * c + k] / w;
      out.valid(x, y) = 1;
    }
  }
  if (!options.infill) return out;

  const double z_max = gating.z_max > 0.0 ? gating.z_max : default_z_max(depths);
  const FeatureMap mask = frustum_mask(cam, vcam, z_max);
  std::vector<std::size_t> fresh;
  std::vector<double> fresh_values;
  for (int round = 0; round < kInfillRounds; ++round) {
    fresh.clear();
    fresh_values.clear();
    for (int y = 0; y < res; ++y) {
      for (int x = 0; x < res; ++x) {
        if (out.valid(x, y) || mask.valid(x, y) == 0 || mask.at(x, y, 0) == 0.0) continue;
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        int count = 0;
        const std::size_t base = fresh_values.size();
        fresh_values.resize(base + c, 0.0);
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || ny[k] < 0 || nx[k] >= res || ny[k] >= res) continue;
          if (!out.valid(nx[k], ny[k])) continue;
          const double* p = out.pixel(nx[k], ny[k]);
          for (std::size_t j = 0; j < c; ++j) fresh_values[base + j] += p[j];
          ++count;
        }
        if (count == 0) {
          fresh_values.resize(base);
          continue;
        }
        for (std::size_t j = 0; j < c; ++j) fresh_values[base + j] /= count;
        fresh.push_back(out.offset(x, y) / c);
      }
    }
    if (fresh.empty()) break;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      const std::size_t cell = fresh[i];
      for (std::size_t j = 0; j < c; ++j) out.data[cell * c + j] = fresh_values[i * c + j];
      out.valid.data()[cell] = 1;
    }
  }
  return out;
}

namespace {

using Point2 = std::array<double, 2>;

double cross2(const Point2& o, const Point2& a, const Point2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// True when the open axis-aligned square of half side 1 around c meets the
// closed convex polygon.
bool square_meets_polygon(const Point2& c, const std::vector<Point2>& poly) {
  const std::array<Point2, 4> sq{{{c[0] - 1, c[1] - 1},
                                  {c[0] + 1, c[1] - 1},
                                  {c[0] + 1, c[1] + 1},
                                  {c[0] - 1, c[1] + 1}}};
  auto separated = [&](double ax, double ay) {
    double smin = 1e300, smax = -1e300, pmin = 1e300, pmax = -1e300;
    for (const auto& p : sq) {
      const double d = p[0] * ax + p[1] * ay;
      smin = std::min(smin, d);
      smax = std::max(smax, d);
    }
    for (const auto& p : poly) {
      const double d = p[0] * ax + p[1] * ay;
      pmin = std::min(pmin, d);
      pmax = std::max(pmax, d);
    }
    return smax <= pmin || pmax <= smin;
  };
  if (separated(1.0, 0.0) || separated(0.0, 1.0)) return false;
  for (std::size_t i = 0; i < poly.size() && poly.size() >= 2; ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % poly.size()];
    if (separated(-(b[1] - a[1]), b[0] - a[0])) return false;
  }
  return true;
}

}  // namespace

FeatureMap frustum_mask(const PerspectiveCamera& cam, const OrthographicCamera& vcam,
                        double z_max) {
  cam.validate();
  vcam.validate();
  if (!(z_max > cam.near)) fail(ErrorCode::InvalidArgument, "z_max must exceed the near plane");
  std::vector<Point2> pts;
  const double w = cam.width, h = cam.height;
  for (double z : {cam.near, z_max}) {
    for (const Point2& st : {Point2{0, 0}, Point2{w, 0}, Point2{0, h}, Point2{w, h}}) {
      pts.push_back(forward_map(cam, vcam, st[0], st[1], z));
    }
  }
  const std::vector<Point2> hull = convex_hull(pts);
  double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
  for (const auto& p : hull) {
    umin = std::min(umin, p[0]);
    umax = std::max(umax, p[0]);
    vmin = std::min(vmin, p[1]);
    vmax = std::max(vmax, p[1]);
  }
  const int res = vcam.resolution;
  FeatureMap out(res, res, 1, 0.0, 1);
  const int x0 = std::max(0, static_cast<int>(std::floor(umin - 1.5)));
  const int x1 = std::min(res - 1, static_cast<int>(std::ceil(umax + 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::floor(vmin - 1.5)));
  const int y1 = std::min(res - 1, static_cast<int>(std::ceil(vmax + 0.5)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (square_meets_polygon({x + 0.5, y + 0.5}, hull)) out.at(x, y, 0) = 1.0;
    }
  }
  return out;
}

FeatureMap best_guess_height(const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                             const OrthographicCamera& vcam) {
  check_inputs(depths, cam, vcam);
  const int res = vcam.resolution;
  FeatureMap out(res, res, 1, kNaN, 0);
  const DepthRaster& d1 = depths.layer(1);
  for (int y = 0; y < depths.height; ++y) {
    for (int x = 0; x < depths.width; ++x) {
      const double z = d1(x, y);
      if (!std::isfinite(z)) continue;
      const auto uv = forward_map(cam, vcam, x + 0.5, y + 0.5, z);
      const double fu = std::floor(uv[0]);
      const double fv = std::floor(uv[1]);
      if (fu < 0.0 || fv < 0.0 || fu >= res || fv >= res) continue;
      const int cu = static_cast<int>(fu);
      const int cv = static_cast<int>(fv);
      const double height = cam.height_of(cam.unproject(x + 0.5, y + 0.5, z));
      if (!out.valid(cu, cv) || height > out.at(cu, cv, 0)) {
        out.at(cu, cv, 0) = height;
        out.valid(cu, cv) = 1;
      }
    }
  }
  return out;
}

namespace {

OrthographicCamera perturbed(const OrthographicCamera& vcam, CameraParam param, double delta) {
  OrthographicCamera v = vcam;
  switch (param) {
    case CameraParam::TranslationX: v.translation.x += delta; break;
    case CameraParam::TranslationY: v.translation.y += delta; break;
    case CameraParam::Sigma: v.radius_sigma += delta; break;
  }
  return v;
}

std::vector<Splat> all_splats(const GatePlan& plan, const MultiLayerDepthMap& depths,
                              const PerspectiveCamera& cam, const OrthographicCamera& vcam,
                              const MaskRaster& valid) {
  std::vector<Splat> all, col;
  for (int x = 0; x < cam.width; ++x) {
    column_splats(plan, depths, cam, vcam, &valid, x, col);
    all.insert(all.end(), col.begin(), col.end());
  }
  return all;
}

}  // namespace

double finite_diff_check(const FeatureMap& features, const GatingSpec& gating,
                         const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                         const OrthographicCamera& vcam, CameraParam param, double h,
                         double min_weight) {
  check_inputs(depths, cam, vcam);
  if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  if (features.width != cam.width || features.height != cam.height) {
    fail(ErrorCode::Dimension, "feature map does not match the camera resolution");
  }
  // The sampling step is pinned so the gating does not move with sigma.
  GatingSpec fixed = gating;
  fixed.z_step = make_plan(gating, depths, cam, vcam).step;
  const OrthographicCamera vp = perturbed(vcam, param, h);
  const OrthographicCamera vm = perturbed(vcam, param, -h);
  const GatePlan plan0 = make_plan(fixed, depths, cam, vcam);

  const auto s0 = all_splats(plan0, depths, cam, vcam, features.valid);
  const auto sp = all_splats(make_plan(fixed, depths, cam, vp), depths, cam, vp, features.valid);
  const auto sm = all_splats(make_plan(fixed, depths, cam, vm), depths, cam, vm, features.valid);
  auto same_cells = [](const std::vector<Splat>& a, const std::vector<Splat>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].x != b[i].x || a[i].y != b[i].y || a[i].z != b[i].z || a[i].w != b[i].w) {
        return false;
      }
      if (std::floor(a[i].u - 0.5) != std::floor(b[i].u - 0.5) ||
          std::floor(a[i].v - 0.5) != std::floor(b[i].v - 0.5)) {
        return false;
      }
    }
    return true;
  };
  if (!same_cells(s0, sp) || !same_cells(s0, sm)) {
    fail(ErrorCode::Degenerate,
         "perturbation moves samples across cell boundaries; choose another configuration or a "
         "smaller step");
  }

  const int res = vcam.resolution;
  const auto c = static_cast<std::size_t>(features.channels);
  const auto cells = static_cast<std::size_t>(res) * static_cast<std::size_t>(res);
  std::vector<double> num(cells * c, 0.0), den(cells, 0.0), dnum(cells * c, 0.0),
      dden(cells, 0.0);
  const double k = vcam.scale();
  for (const auto& s : s0) {
    double du = 0.0, dv = 0.0;
    switch (param) {
      case CameraParam::TranslationX: du = k; break;
      case CameraParam::TranslationY: dv = k; break;
      case CameraParam::Sigma: {
        const Vec3 pv = vcam.to_virtual(cam.ray(s.x + 0.5, s.y + 0.5) * s.z);
        du = -k * pv.x / vcam.radius_sigma;
        dv = -k * pv.y / vcam.radius_sigma;
        break;
      }
    }
    const double fu = s.u - 0.5, fv = s.v - 0.5;
    const double iu = std::floor(fu), iv = std::floor(fv);
    const double a = fu - iu, b = fv - iv;
    if (a == 0.0 || b == 0.0) {
      fail(ErrorCode::Degenerate, "sample lies exactly on a cell-center grid line");
    }
    const double wt[4] = {(1 - a) * (1 - b), a * (1 - b), (1 - a) * b, a * b};
    const double dwt[4] = {-(1 - b) * du - (1 - a) * dv, (1 - b) * du - a * dv,
                           -b * du + (1 - a) * dv, b * du + a * dv};
    const double* fp = features.pixel(s.x, s.y);
    for (int q = 0; q < 4; ++q) {
      const int cx = static_cast<int>(iu) + (q & 1);
      const int cy = static_cast<int>(iv) + (q >> 1);
      if (cx < 0 || cy < 0 || cx >= res || cy >= res) continue;
      const std::size_t cell =
          static_cast<std::size_t>(cy) * static_cast<std::size_t>(res) + static_cast<std::size_t>(cx);
      den[cell] += s.w * wt[q];
      dden[cell] += s.w * dwt[q];
      for (std::size_t j = 0; j < c; ++j) {
        num[cell * c + j] += fp[j] * s.w * wt[q];
        dnum[cell * c + j] += fp[j] * s.w * dwt[q];
      }
    }
  }

  const TransferSums plus = accumulate_transfer(features, fixed, depths, cam, vp);
  const TransferSums minus = accumulate_transfer(features, fixed, depths, cam, vm);
  double worst = 0.0;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    if (!(den[cell] > 0.0) || den[cell] < min_weight) continue;
    if (!(plus.weight[cell] > 0.0) || !(minus.weight[cell] > 0.0)) continue;
    for (std::size_t j = 0; j < c; ++j) {
      const double g_plus = plus.numerator[cell * c + j] / plus.weight[cell];
      const double g_minus = minus.numerator[cell * c + j] / minus.weight[cell];
      const double fd = (g_plus - g_minus) / (2.0 * h);
      const double analytic =
          (dnum[cell * c + j] * den[cell] - num[cell * c + j] * dden[cell]) /
          (den[cell] * den[cell]);
      worst = std::max(worst, std::fabs(analytic - fd) / (std::fabs(fd) + 1e-6));
    }
  }
  return worst;
}

}  // namespace mld
