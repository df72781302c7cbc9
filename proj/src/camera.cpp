#include "mld/camera.hpp"

#include <string>

namespace mld {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidCamera: return "invalid-camera";
    case ErrorCode::Dimension: return "dimension";
    case ErrorCode::NoSupport: return "no-support";
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::Unsupported: return "unsupported-configuration";
    case ErrorCode::Generation: return "generation";
    case ErrorCode::Degenerate: return "degenerate";
    case ErrorCode::Io: return "io";
    case ErrorCode::Format: return "format";
  }
  return "unknown";
}

bool is_rotation(const Mat3& r, double tol) {
  for (double v : r.m) {
    if (!std::isfinite(v)) return false;
  }
  const Mat3 rrt = r * r.transposed();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double expect = i == j ? 1.0 : 0.0;
      if (std::fabs(rrt(i, j) - expect) > tol) return false;
    }
  }
  return std::fabs(r.determinant() - 1.0) <= tol;
}

Mat3 rotation_x(double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  return Mat3{{1, 0, 0, 0, c, -s, 0, s, c}};
}

Mat3 rotation_y(double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  return Mat3{{c, 0, s, 0, 1, 0, -s, 0, c}};
}

void PerspectiveCamera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) fail(ErrorCode::InvalidCamera, "focal lengths must be positive");
  if (!(near > 0.0)) fail(ErrorCode::InvalidCamera, "near plane must be positive");
  if (width <= 0 || height <= 0) fail(ErrorCode::InvalidCamera, "resolution must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy) || !translation.finite() ||
      !std::isfinite(tilt_deg)) {
    fail(ErrorCode::InvalidCamera, "camera parameters must be finite");
  }
  if (!is_rotation(rotation)) {
    fail(ErrorCode::InvalidCamera, "camera rotation is not orthonormal with det +1");
  }
}

std::array<Plane, 5> PerspectiveCamera::frustum_planes() const {
  // s >= 0  <=>  fx x + cx z >= 0, and similarly for the other sides.
  auto make = [](Vec3 n) {
    const double len = norm(n);
    return Plane{n / len, 0.0};
  };
  return {
      make({fx, 0.0, cx}),
      make({-fx, 0.0, width - cx}),
      make({0.0, fy, cy}),
      make({0.0, -fy, height - cy}),
      Plane{{0.0, 0.0, 1.0}, -near},
  };
}

PerspectiveCamera PerspectiveCamera::looking(int width, int height, double hfov_deg,
                                             const Vec3& eye, double tilt_deg, double near) {
  PerspectiveCamera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = 0.5 * width / std::tan(0.5 * deg_to_rad(hfov_deg));
  cam.fy = cam.fx;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.near = near;
  cam.tilt_deg = tilt_deg;
  // World y-up / -z forward to camera y-down / +z forward, then pitch down.
  const Mat3 level{{1, 0, 0, 0, -1, 0, 0, 0, -1}};
  cam.rotation = rotation_x(deg_to_rad(tilt_deg)) * level;
  cam.translation = -(cam.rotation * eye);
  return cam;
}

void OrthographicCamera::validate() const {
  if (!(radius_sigma > 0.0) || !std::isfinite(radius_sigma)) {
    fail(ErrorCode::InvalidCamera, "radius_sigma must be positive");
  }
  if (resolution <= 0) fail(ErrorCode::InvalidCamera, "resolution must be positive");
  if (!(theta_deg > 0.0 && theta_deg < 90.0)) {
    fail(ErrorCode::InvalidCamera, "theta_deg must lie in (0, 90)");
  }
  if (!translation.finite()) fail(ErrorCode::InvalidCamera, "translation must be finite");
  if (!is_rotation(rotation)) {
    fail(ErrorCode::InvalidCamera, "virtual camera rotation is not orthonormal with det +1");
  }
}

Mat3 overhead_rotation(double theta_deg) { return rotation_x(deg_to_rad(theta_deg)); }

}  // namespace mld
