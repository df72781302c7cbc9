#pragma once

#include <array>

#include "mld/geometry.hpp"

namespace mld {

// Half-space n.p + d >= 0 with unit normal n (meters).
struct Plane {
  Vec3 normal;
  double offset = 0.0;

  double signed_distance(const Vec3& p) const { return dot(normal, p) + offset; }
};

// Pinhole camera. Camera frame: +x right, +y down, +z forward. Pixel (i, j)
// has its center at continuous image coordinates (s, t) = (i + 0.5, j + 0.5).
// rotation/translation map world points into the camera frame: p_c = R p_w + T.
// The world frame is y-up with the floor at y = 0.
struct PerspectiveCamera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;
  Mat3 rotation = Mat3::identity();
  Vec3 translation;
  double near = 0.05;
  double tilt_deg = 0.0;

  // Throws InvalidCamera.
  void validate() const;

  // K^-1 [s, t, 1]; the returned direction has z = 1.
  Vec3 ray(double s, double t) const { return {(s - cx) / fx, (t - cy) / fy, 1.0}; }

  Vec3 unproject(double s, double t, double depth) const { return ray(s, t) * depth; }

  // Continuous image coordinates of a camera-frame point with z > 0.
  std::array<double, 2> project(const Vec3& p) const {
    return {fx * p.x / p.z + cx, fy * p.y / p.z + cy};
  }

  // Left, right, top, bottom, near planes; interior is the visible frustum.
  std::array<Plane, 5> frustum_planes() const;

  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
  Vec3 to_world(const Vec3& cam) const { return rotation.transposed() * (cam - translation); }

  // Unit gravity ("down") direction expressed in the camera frame.
  Vec3 gravity_down() const { return rotation * Vec3{0.0, -1.0, 0.0}; }

  // Height above the floor of a camera-frame point.
  double height_of(const Vec3& cam_point) const { return to_world(cam_point).y; }

  // Height above the floor of the camera center.
  double camera_height() const { return to_world(Vec3{}).y; }

  // Smallest metric pixel footprint factor: footprint at depth z is z * pixel_angle().
  double pixel_angle() const { return std::fmax(1.0 / fx, 1.0 / fy); }

  // Level camera at `eye` looking along world -z, pitched down by tilt_deg,
  // with horizontal field of view hfov_deg and principal point at the image center.
  static PerspectiveCamera looking(int width, int height, double hfov_deg, const Vec3& eye,
                                   double tilt_deg, double near = 0.05);
};

// Orthographic virtual camera. Points map to the virtual frame by
// p_v = R p_c + t; image coordinates are u = k p_v.x + res/2, v = k p_v.y + res/2
// with k = res / (2 sigma). Depth in the virtual view is p_v.z.
struct OrthographicCamera {
  double radius_sigma = 1.0;
  int resolution = 1;
  Mat3 rotation = Mat3::identity();
  Vec3 translation;
  double theta_deg = 45.0;

  void validate() const;

  double footprint() const { return 2.0 * radius_sigma / resolution; }
  double scale() const { return resolution / (2.0 * radius_sigma); }

  Vec3 to_virtual(const Vec3& cam_point) const { return rotation * cam_point + translation; }
  Vec3 from_virtual(const Vec3& virt) const {
    return rotation.transposed() * (virt - translation);
  }

  // Continuous image coordinates of a point already in the virtual frame.
  std::array<double, 2> image_of(const Vec3& virt) const {
    const double k = scale();
    const double half = 0.5 * resolution;
    return {k * virt.x + half, k * virt.y + half};
  }
};

// Rotation about x by theta: the input view's axes expressed in the virtual frame.
Mat3 overhead_rotation(double theta_deg);

}  // namespace mld
