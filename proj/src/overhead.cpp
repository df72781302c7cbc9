#include "mld/overhead.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mld {

void OverheadParams::validate() const {
  if (!(radius_sigma > 0.0) || !std::isfinite(radius_sigma)) {
    fail(ErrorCode::InvalidArgument, "radius_sigma must be positive");
  }
  if (!(theta_deg > 0.0 && theta_deg < 90.0)) {
    fail(ErrorCode::InvalidArgument, "theta_deg must lie in (0, 90)");
  }
  if (!std::isfinite(t_x) || !std::isfinite(t_y) || !std::isfinite(t_z)) {
    fail(ErrorCode::InvalidArgument, "overhead translation must be finite");
  }
}

double overhead_theta(const PerspectiveCamera& cam) {
  const double theta = 90.0 - cam.tilt_deg;
  if (!(theta > 0.0 && theta < 90.0)) {
    fail(ErrorCode::Unsupported, "overhead view needs a camera tilted down by (0, 90) degrees");
  }
  return theta;
}

OrthographicCamera make_overhead_camera(const OverheadParams& p, int resolution) {
  p.validate();
  OrthographicCamera v;
  v.radius_sigma = p.radius_sigma;
  v.resolution = resolution;
  v.theta_deg = p.theta_deg;
  v.rotation = overhead_rotation(p.theta_deg);
  v.translation = {p.t_x, p.t_y, p.t_z};
  v.validate();
  return v;
}

namespace {

Vec3 ground_projected(const Vec3& p, const Vec3& g) { return p - g * dot(p, g); }

// Camera centered over ground point c (c . g = 0): c maps to the virtual origin.
OverheadParams centered(const PerspectiveCamera& cam, const Vec3& c, double sigma) {
  OverheadParams p;
  p.theta_deg = overhead_theta(cam);
  const Vec3 t = -(overhead_rotation(p.theta_deg) * c);
  p.t_x = t.x;
  p.t_y = t.y;
  p.t_z = t.z;
  p.radius_sigma = std::max(kSigmaMin, sigma);
  return p;
}

void require_shape(const MultiLayerDepthMap& depths, const PerspectiveCamera& cam) {
  cam.validate();
  if (depths.width != cam.width || depths.height != cam.height) {
    fail(ErrorCode::Dimension, "depth map does not match the camera resolution");
  }
}

}  // namespace

OverheadParams heuristic_pointcloud(const MultiLayerDepthMap& depths,
                                    const PerspectiveCamera& cam) {
  require_shape(depths, cam);
  const Vec3 g = cam.gravity_down();
  std::vector<Vec3> pts;
  for (int y = 0; y < depths.height; ++y) {
    for (int x = 0; x < depths.width; ++x) {
      double z = depths.layer(1)(x, y);
      if (!std::isfinite(z)) z = depths.layer(5)(x, y);
      if (!std::isfinite(z)) continue;
      pts.push_back(ground_projected(cam.unproject(x + 0.5, y + 0.5, z), g));
    }
  }
  if (pts.empty()) fail(ErrorCode::NoSupport, "no supported depth for the point-cloud heuristic");
  Vec3 mean;
  for (const auto& p : pts) mean += p;
  mean = mean / static_cast<double>(pts.size());
  double var = 0.0;
  for (const auto& p : pts) {
    const Vec3 d = p - mean;
    var += dot(d, d);
  }
  var /= static_cast<double>(pts.size());
  return centered(cam, mean, kPointCloudSpread * std::sqrt(var));
}

OverheadParams heuristic_principal_plane(const MultiLayerDepthMap& depths,
                                         const PerspectiveCamera& cam) {
  require_shape(depths, cam);
  double sum = 0.0;
  std::size_t n = 0;
  for (double d : depths.layer(5).data()) {
    if (!std::isfinite(d)) continue;
    sum += d;
    ++n;
  }
  if (n == 0) fail(ErrorCode::NoSupport, "no envelope depth for the principal-plane heuristic");
  const double offset = sum / static_cast<double>(n);
  const Vec3 g = cam.gravity_down();
  const Vec3 forward = normalized(ground_projected(Vec3{0.0, 0.0, 1.0}, g));
  return centered(cam, forward * offset, offset * cam.width / (2.0 * cam.fx));
}

OverheadParams heuristic_bbox(const MultiLayerDepthMap& depths, const PerspectiveCamera& cam) {
  require_shape(depths, cam);
  const double theta = overhead_theta(cam);
  const Mat3 r = overhead_rotation(theta);
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  bool any = false;
  for (int layer = 1; layer <= 4; ++layer) {
    const DepthRaster& d = depths.layer(layer);
    for (int y = 0; y < depths.height; ++y) {
      for (int x = 0; x < depths.width; ++x) {
        const double z = d(x, y);
        if (!std::isfinite(z)) continue;
        const Vec3 pv = r * cam.unproject(x + 0.5, y + 0.5, z);
        xmin = std::min(xmin, pv.x);
        xmax = std::max(xmax, pv.x);
        ymin = std::min(ymin, pv.y);
        ymax = std::max(ymax, pv.y);
        any = true;
      }
    }
  }
  if (!any) fail(ErrorCode::NoSupport, "no object pixels for the bounding-box heuristic");
  const double side = std::max(xmax - xmin, ymax - ymin) * (1.0 + kBboxMargin);
  OverheadParams p;
  p.theta_deg = theta;
  p.t_x = -0.5 * (xmin + xmax);
  p.t_y = -0.5 * (ymin + ymax);
  p.t_z = 0.0;
  p.radius_sigma = std::max(kSigmaMin, 0.5 * side);
  return p;
}

OverheadParams blend(const std::array<OverheadParams, 3>& c, const std::array<double, 3>& w) {
  double total = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      fail(ErrorCode::InvalidArgument, "blend weights must be finite and non-negative");
    }
    total += v;
  }
  if (!(total > 0.0)) fail(ErrorCode::InvalidArgument, "blend weights sum to zero");
  OverheadParams out{0.0, 0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    const double a = w[i] / total;
    out.t_x += a * c[i].t_x;
    out.t_y += a * c[i].t_y;
    out.t_z += a * c[i].t_z;
    out.theta_deg += a * c[i].theta_deg;
    out.radius_sigma += a * c[i].radius_sigma;
  }
  // A single active candidate is returned unchanged.
  for (int i = 0; i < 3; ++i) {
    if (w[i] == total) return c[i];
  }
  if (c[0] == c[1] && c[1] == c[2]) return c[0];
  return out;
}

OverheadParams choose_overhead(const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                               const std::array<double, 3>& weights) {
  std::array<OverheadParams, 3> cand;
  std::array<double, 3> w = weights;
  using Heuristic = OverheadParams (*)(const MultiLayerDepthMap&, const PerspectiveCamera&);
  const Heuristic fns[3] = {heuristic_pointcloud, heuristic_principal_plane, heuristic_bbox};
  for (int i = 0; i < 3; ++i) {
    try {
      cand[i] = fns[i](depths, cam);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoSupport) throw;
      w[i] = 0.0;
    }
  }
  if (!(w[0] + w[1] + w[2] > 0.0)) {
    fail(ErrorCode::NoSupport, "no overhead heuristic has support in this depth map");
  }
  return blend(cand, w);
}

}  // namespace mld
