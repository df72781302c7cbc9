#pragma once

#include <array>
#include <string>
#include <vector>

#include "mld/camera.hpp"
#include "mld/geometry.hpp"
#include "mld/ray_layers.hpp"

namespace mld {

// W x H x C real raster, channels interleaved per pixel, plus a validity mask.
struct FeatureMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;
  MaskRaster valid;

  FeatureMap() = default;
  FeatureMap(int w, int h, int c, double fill = 0.0, std::uint8_t valid_fill = 1);

  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
            static_cast<std::size_t>(x)) *
           static_cast<std::size_t>(channels);
  }
  double& at(int x, int y, int c) { return data[offset(x, y) + static_cast<std::size_t>(c)]; }
  double at(int x, int y, int c) const {
    return data[offset(x, y) + static_cast<std::size_t>(c)];
  }
  const double* pixel(int x, int y) const { return data.data() + offset(x, y); }

  // Bitwise comparison of values (NaN equal to NaN) and masks.
  bool operator==(const FeatureMap& o) const;
};

enum class GatingKind { SurfaceAll, Volume12, Volume34, Constant, BestGuessHeight };

// Accepts surface, volume12, volume34, const, bestguess.
GatingKind parse_gating(const std::string& name);
const char* to_string(GatingKind kind);

struct GatingSpec {
  GatingKind kind = GatingKind::SurfaceAll;
  // Sampling step along rays for Volume and Constant; <= 0 selects half the
  // overhead pixel footprint. Must not exceed the footprint.
  double z_step = 0.0;
  // Constant gating range. z_min <= 0 selects the camera near plane; z_max <= 0
  // selects default_z_max(depths).
  double z_min = 0.0;
  double z_max = 0.0;
};

struct GateSample {
  double z = 0.0;
  double weight = 0.0;
};

struct TransferOptions {
  int threads = 1;
  // Fill empty cells inside the input frustum from their neighbors.
  bool infill = true;
};

inline constexpr int kInfillRounds = 8;
inline constexpr double kDefaultFrustumDepth = 10.0;

// Continuous virtual image coordinates of the point at depth z on the ray
// through (s, t): K_V (R z K_I^-1 [s, t, 1] + t).
std::array<double, 2> forward_map(const PerspectiveCamera& cam, const OrthographicCamera& vcam,
                                  double s, double t, double z);

// Largest supported depth over all layers, or kDefaultFrustumDepth when none.
double default_z_max(const MultiLayerDepthMap& depths);

// Surface gating of layer (1..4) at pixel (x, y). Within each pixel column
// the scan runs bottom to top and each pixel overwrites the overhead cell
// (floor u, floor v) it lands in; a pixel keeps weight 1 only if it is the
// last writer of its cell. Empty when the layer is unsupported at (x, y).
std::vector<GateSample> gating_surface(const MultiLayerDepthMap& depths,
                                       const PerspectiveCamera& cam,
                                       const OrthographicCamera& vcam, int x, int y, int layer);

// Gated samples for pixel (x, y), ascending in z.
std::vector<GateSample> gate_samples(const GatingSpec& gating, const MultiLayerDepthMap& depths,
                                     const PerspectiveCamera& cam,
                                     const OrthographicCamera& vcam, int x, int y);

// Raw bilinear accumulation: numerator (res x res x C, interleaved) and
// denominator (res x res).
struct TransferSums {
  int resolution = 0;
  int channels = 0;
  std::vector<double> numerator;
  std::vector<double> weight;
};

TransferSums accumulate_transfer(const FeatureMap& features, const GatingSpec& gating,
                                 const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                                 const OrthographicCamera& vcam, int threads = 1);

// G = sum F W / sum W with bilinear splatting. Cells without weight are 0 and
// invalid outside the frustum mask; inside it they are filled by repeated
// 4-neighbor averaging (kInfillRounds rounds) and stay invalid if still empty.
FeatureMap transfer_features(const FeatureMap& features, const GatingSpec& gating,
                             const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                             const OrthographicCamera& vcam, const TransferOptions& options = {});

// Cells reached by a bilinear splat of some point of the input frustum
// truncated to [cam.near, z_max]. Computed from the convex outline of the
// projected frustum, so it does not depend on any feature content.
FeatureMap frustum_mask(const PerspectiveCamera& cam, const OrthographicCamera& vcam,
                        double z_max);

// Overhead height above the floor of reprojected D1 points, highest point per
// cell (floor u, floor v). NaN and invalid where no point lands.
FeatureMap best_guess_height(const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                             const OrthographicCamera& vcam);

enum class CameraParam { TranslationX, TranslationY, Sigma };

CameraParam parse_camera_param(const std::string& name);

// Max over cells with accumulated weight >= min_weight and channels of
// |analytic - central difference| / (|central difference| + 1e-6) for the
// derivative of the normalized transfer with respect to one virtual camera
// parameter. Throws Degenerate when a perturbation moves any sample across a
// cell boundary or changes the gating.
double finite_diff_check(const FeatureMap& features, const GatingSpec& gating,
                         const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                         const OrthographicCamera& vcam, CameraParam param, double h,
                         double min_weight = 0.0);

}  // namespace mld
