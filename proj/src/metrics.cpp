#include "mld/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mld/parallel.hpp"
#include "mld/synth.hpp"

namespace mld {

SurfacePointSet sample_surface(const Mesh& mesh, double rho, std::uint64_t seed) {
  if (!(rho > 0.0)) fail(ErrorCode::InvalidArgument, "sampling density must be positive");
  const std::size_t n = mesh.triangles.size();
  std::vector<double> cumulative(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += mesh.triangle_area(i);
    cumulative[i] = total;
  }
  if (!(total > 0.0)) fail(ErrorCode::Degenerate, "cannot sample a zero-area mesh");

  SurfacePointSet out;
  out.source_area = total;
  out.seed = seed;
  const auto count = static_cast<std::size_t>(std::llround(rho * total));
  out.points.reserve(count);
  Rng rng(seed);
  for (std::size_t s = 0; s < count; ++s) {
    const double pick = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    const std::size_t tri = std::min<std::size_t>(
        n - 1, static_cast<std::size_t>(it - cumulative.begin()));
    const auto& t = mesh.triangles[tri];
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    out.points.push_back(a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2));
  }
  return out;
}

std::vector<std::uint8_t> coverage_flags(const SurfacePointSet& samples, const TriangleBvh& target,
                                         double threshold, int threads) {
  if (!(threshold > 0.0)) fail(ErrorCode::InvalidArgument, "coverage threshold must be positive");
  std::vector<std::uint8_t> flags(samples.points.size(), 0);
  if (target.empty()) return flags;
  parallel_for(samples.points.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      flags[i] = target.any_within(samples.points[i], threshold) ? 1 : 0;
    }
  });
  return flags;
}

double coverage(const SurfacePointSet& samples, const TriangleBvh& target, double threshold,
                int threads) {
  const auto flags = coverage_flags(samples, target, threshold, threads);
  if (flags.empty()) return 0.0;
  std::size_t hit = 0;
  for (auto f : flags) hit += f;
  return static_cast<double>(hit) / static_cast<double>(flags.size());
}

double coverage(const SurfacePointSet& samples, const Mesh& target, double threshold,
                int threads) {
  return coverage(samples, TriangleBvh(target), threshold, threads);
}

std::vector<PrPoint> pr_curve(const Mesh& pred, const Mesh& gt,
                              const std::vector<double>& thresholds, double rho,
                              std::uint64_t seed, int threads) {
  const SurfacePointSet gt_samples = sample_surface(gt, rho, seed);
  const bool pred_empty = !(pred.area() > 0.0);
  SurfacePointSet pred_samples;
  if (!pred_empty) pred_samples = sample_surface(pred, rho, seed);
  const TriangleBvh pred_bvh(pred);
  const TriangleBvh gt_bvh(gt);
  std::vector<PrPoint> out;
  for (double tau : thresholds) {
    PrPoint p;
    p.threshold = tau;
    p.recall = pred_empty ? 0.0 : coverage(gt_samples, pred_bvh, tau, threads);
    p.precision = pred_empty ? 0.0 : coverage(pred_samples, gt_bvh, tau, threads);
    out.push_back(p);
  }
  return out;
}

}  // namespace mld
