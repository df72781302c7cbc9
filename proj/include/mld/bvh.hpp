#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mld/geometry.hpp"
#include "mld/kernels/kernels.hpp"
#include "mld/scene.hpp"

namespace mld {

using kernels::RayHit;

// Squared distance from p to the closed triangle (a, b, c).
double point_triangle_distance_sq(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Binned-SAH bounding volume hierarchy over a triangle soup. Leaves own
// contiguous runs of a structure-of-arrays copy consumed by the SIMD kernels.
// Hit and query results report triangle indices of the input mesh.
class TriangleBvh {
 public:
  TriangleBvh() = default;
  explicit TriangleBvh(const Mesh& mesh);

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

  // Every intersection along the half-line o + t d with t >= t_min, in no
  // particular order. d need not be normalized; t is in units of |d|.
  void all_hits(const Vec3& origin, const Vec3& dir, double t_min,
                std::vector<RayHit>& out) const;

  // Same contract, testing every triangle without the hierarchy.
  void all_hits_brute_force(const Vec3& origin, const Vec3& dir, double t_min,
                            std::vector<RayHit>& out) const;

  // True when some triangle lies within distance r of p (squared comparison).
  bool any_within(const Vec3& p, double r) const;

  double nearest_distance_sq(const Vec3& p) const;

 private:
  struct Node {
    Vec3 lo;
    Vec3 hi;
    std::uint32_t first = 0;   // leaf: first triangle; inner: right child
    std::uint32_t count = 0;   // 0 for inner nodes
  };

  struct Soa {
    std::vector<double> v0x, v0y, v0z, e1x, e1y, e1z, e2x, e2y, e2z, nx, ny, nz;
    void resize(std::size_t n);
  };

  std::uint32_t build(std::vector<std::uint32_t>& order, std::vector<Vec3>& centroids,
                      std::vector<Vec3>& lo, std::vector<Vec3>& hi, std::uint32_t begin,
                      std::uint32_t end, int depth);
  kernels::TriangleArrays arrays() const;
  void remap(std::size_t before, std::vector<RayHit>& out) const;

  std::size_t count_ = 0;
  std::vector<Node> nodes_;
  Soa soa_;
  std::vector<std::array<Vec3, 3>> corners_;  // sorted order, exact input vertices
  std::vector<std::uint32_t> original_;       // sorted index -> input index
};

}  // namespace mld
