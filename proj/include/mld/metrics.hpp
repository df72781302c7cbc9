#pragma once

#include <cstdint>
#include <vector>

#include "mld/bvh.hpp"
#include "mld/camera.hpp"
#include "mld/ray_layers.hpp"
#include "mld/scene.hpp"

namespace mld {

inline constexpr double kDefaultDensity = 10000.0;  // points per square meter

struct SurfacePointSet {
  std::vector<Vec3> points;
  double source_area = 0.0;
  std::uint64_t seed = 0;
};

// round(rho * area) points: triangles drawn with probability proportional to
// area, then uniform barycentric coordinates. Throws Degenerate on zero area.
SurfacePointSet sample_surface(const Mesh& mesh, double rho, std::uint64_t seed);

// Per-point flags: distance to the target within threshold.
std::vector<std::uint8_t> coverage_flags(const SurfacePointSet& samples, const TriangleBvh& target,
                                         double threshold, int threads = 1);

// Fraction of samples within threshold of the target mesh; 0 for an empty
// target or empty sample set.
double coverage(const SurfacePointSet& samples, const TriangleBvh& target, double threshold,
                int threads = 1);
double coverage(const SurfacePointSet& samples, const Mesh& target, double threshold,
                int threads = 1);

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// recall = coverage(samples(gt), pred), precision = coverage(samples(pred), gt),
// both sampled with the same seed. An empty prediction scores 0 / 0.
std::vector<PrPoint> pr_curve(const Mesh& pred, const Mesh& gt, const std::vector<double>& thresholds,
                              double rho = kDefaultDensity, std::uint64_t seed = 0,
                              int threads = 1);

// Axis-aligned occupancy grid. Voxel (i, j, k) spans origin + edge * [i, i+1) etc.
struct VoxelGrid {
  Vec3 origin;
  double edge = 0.025;
  int nx = 1, ny = 1, nz = 1;
  std::vector<std::uint8_t> occupancy;

  VoxelGrid() = default;
  VoxelGrid(const Vec3& origin, double edge, int nx, int ny, int nz);

  // Same geometry, all voxels empty.
  VoxelGrid empty_like() const { return VoxelGrid(origin, edge, nx, ny, nz); }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(k));
  }
  Vec3 center(int i, int j, int k) const {
    return {origin.x + (i + 0.5) * edge, origin.y + (j + 0.5) * edge,
            origin.z + (k + 0.5) * edge};
  }
  std::size_t count() const;
  bool same_geometry(const VoxelGrid& o) const;
  bool operator==(const VoxelGrid&) const = default;
};

// 10 m cube of 2.5 cm voxels in front of the camera: x, y in [-5, 5], z in [0, 10].
VoxelGrid default_voxel_grid();

// Occupied when the voxel center projects inside the image and its z lies in
// (D1, D2) or (D3, D4) at the nearest pixel. Grid in the camera frame.
VoxelGrid voxelize_prediction(const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                              const VoxelGrid& grid, int threads = 1);

// Solid voxelization by crossing parity along x, y and z columns through voxel
// centers, majority vote over the three axes. Columns with an odd number of
// crossings mark only the voxels holding the crossings.
VoxelGrid voxelize_mesh_parity(const Mesh& mesh, const VoxelGrid& grid, int threads = 1);

// |a and b| / |a or b|; 1 when both are empty.
double voxel_iou(const VoxelGrid& a, const VoxelGrid& b);

}  // namespace mld
