#include "doctest.h"

#include "mld/metrics.hpp"
#include "mld/synth.hpp"

using namespace mld;

namespace {

Mesh square(double z, double side = 1.0) {
  Mesh m;
  m.vertices = {{0, 0, z}, {side, 0, z}, {side, side, z}, {0, side, z}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

Mesh random_mesh(Rng& rng, int n) {
  Mesh m;
  while (static_cast<int>(m.triangles.size()) < n) {
    const Vec3 c{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    auto j = [&] { return c + Vec3{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)}; };
    m.add_triangle(j(), j(), j());
  }
  return m;
}

}  // namespace

TEST_CASE("sample_surface") {
  SUBCASE("unit square") {
    const auto s = sample_surface(square(0.0), kDefaultDensity, 1);
    CHECK(s.points.size() == 10000);
    CHECK(s.source_area == doctest::Approx(1.0));
    for (const auto& p : s.points) {
      CHECK(p.z == 0.0);
      CHECK(p.x >= 0.0);
      CHECK(p.x <= 1.0);
      CHECK(p.y >= 0.0);
      CHECK(p.y <= 1.0);
    }
  }
  SUBCASE("two equal triangles split binomially") {
    const auto s = sample_surface(square(0.0), kDefaultDensity, 2);
    int lower = 0;  // triangle (0,1,2) lies below the diagonal y = x
    for (const auto& p : s.points) lower += p.y < p.x;
    const double sd = std::sqrt(10000 * 0.25);
    CHECK(std::fabs(lower - 5000.0) < 3 * sd);
  }
  SUBCASE("same seed, same points") {
    const Mesh m = box_mesh({0, 0, 0}, {1, 0.5, 0.25});
    CHECK(sample_surface(m, 3000, 9).points == sample_surface(m, 3000, 9).points);
    CHECK(sample_surface(m, 3000, 9).points != sample_surface(m, 3000, 10).points);
  }
  SUBCASE("zero area") {
    CHECK_THROWS_AS(sample_surface(Mesh{}, 100, 1), Error);
  }
}

TEST_CASE("coverage") {
  const Mesh a = square(0.0);
  const auto s = sample_surface(a, 5000, 4);
  CHECK(coverage(s, a, 1e-9) == 1.0);
  CHECK(coverage(s, square(0.04), 0.05) == 1.0);
  CHECK(coverage(s, square(0.04), 0.03) == 0.0);
  CHECK(coverage(s, Mesh{}, 1.0) == 0.0);

  Rng rng(12);
  const Mesh target = random_mesh(rng, 60);
  const Mesh source = random_mesh(rng, 40);
  const auto pts = sample_surface(source, 2000, 5);
  const TriangleBvh bvh(target);
  double prev = 0.0;
  for (double thr : {0.01, 0.05, 0.1, 0.2, 0.5}) {
    // Brute-force oracle with the same exact distance.
    int inside = 0;
    for (const auto& p : pts.points) {
      double best = 1e300;
      for (const auto& t : target.triangles) {
        best = std::min(best, point_triangle_distance_sq(p, target.vertices[t[0]],
                                                         target.vertices[t[1]],
                                                         target.vertices[t[2]]));
      }
      inside += best <= thr * thr;
    }
    const double c = coverage(pts, bvh, thr, 3);
    CHECK(c == static_cast<double>(inside) / pts.points.size());
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("precision and recall") {
  const std::vector<double> thr{0.05, 0.1};
  const Mesh gt = box_mesh({0, 0, 0}, {1, 1, 1});

  SUBCASE("identical meshes") {
    for (const auto& p : pr_curve(gt, gt, thr, 5000, 1)) {
      CHECK(p.precision == 1.0);
      CHECK(p.recall == 1.0);
    }
  }
  SUBCASE("prediction is half the surface") {
    Mesh half;
    half.vertices = gt.vertices;
    for (std::size_t i = 0; i < 6; ++i) half.triangles.push_back(gt.triangles[i]);
    const auto pr = pr_curve(half, gt, {0.01}, 10000, 2);
    CHECK(pr[0].precision == 1.0);
    // Points within 1 cm of the shared edges also count.
    CHECK(pr[0].recall == doctest::Approx(0.5).epsilon(0.05));
  }
  SUBCASE("swapping arguments exchanges precision and recall") {
    Rng rng(1);
    const Mesh a = random_mesh(rng, 30), b = random_mesh(rng, 30);
    const auto ab = pr_curve(a, b, thr, 3000, 7);
    const auto ba = pr_curve(b, a, thr, 3000, 7);
    for (std::size_t i = 0; i < thr.size(); ++i) {
      CHECK(ab[i].precision == ba[i].recall);
      CHECK(ab[i].recall == ba[i].precision);
    }
  }
  SUBCASE("empty prediction") {
    const auto pr = pr_curve(Mesh{}, gt, thr);
    CHECK(pr[0].precision == 0.0);
    CHECK(pr[0].recall == 0.0);
  }
}
