#pragma once

#include <array>

#include "mld/camera.hpp"
#include "mld/ray_layers.hpp"

namespace mld {

// Virtual overhead camera relative to the input view: p_v = R(theta) p + t.
struct OverheadParams {
  double t_x = 0.0;
  double t_y = 0.0;
  double t_z = 0.0;
  double theta_deg = 79.0;
  double radius_sigma = 1.0;

  void validate() const;
  bool operator==(const OverheadParams&) const = default;
};

inline constexpr double kSigmaMin = 0.5;
inline constexpr double kBboxMargin = 0.05;
inline constexpr double kPointCloudSpread = 1.5;

// Rotation that aligns the overhead axis with gravity for a camera pitched
// down by cam.tilt_deg: 90 - tilt. Throws Unsupported outside (0, 90).
double overhead_theta(const PerspectiveCamera& cam);

OrthographicCamera make_overhead_camera(const OverheadParams& params, int resolution);

// Overhead camera centered over the mean of the depth point cloud (D1, or D5
// where D1 is empty), radius 1.5 times the radial standard deviation of the
// points about that mean on the ground plane. Throws NoSupport.
OverheadParams heuristic_pointcloud(const MultiLayerDepthMap& depths,
                                    const PerspectiveCamera& cam);

// Overhead camera on the input camera's ground-projected principal axis,
// mean(D5) in front of it; radius is the half width of the image at that
// depth. Throws NoSupport.
OverheadParams heuristic_principal_plane(const MultiLayerDepthMap& depths,
                                         const PerspectiveCamera& cam);

// Smallest overhead-aligned square holding all object points (layers 1..4),
// enlarged by kBboxMargin of its side. Throws NoSupport.
OverheadParams heuristic_bbox(const MultiLayerDepthMap& depths, const PerspectiveCamera& cam);

inline constexpr std::array<double, 3> kDefaultBlendWeights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

// Component-wise convex combination after normalizing the weights.
OverheadParams blend(const std::array<OverheadParams, 3>& candidates,
                     const std::array<double, 3>& weights = kDefaultBlendWeights);

// All three heuristics blended.
OverheadParams choose_overhead(const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                               const std::array<double, 3>& weights = kDefaultBlendWeights);

}  // namespace mld
