#include "doctest.h"

#include <algorithm>

#include "mld/bvh.hpp"
#include "mld/synth.hpp"

using namespace mld;

namespace {

Mesh random_soup(Rng& rng, int n, double extent = 3.0, double size = 0.4) {
  Mesh m;
  for (int i = 0; i < n; ++i) {
    const Vec3 c{rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                 rng.uniform(1.0, 1.0 + 2 * extent)};
    auto jitter = [&] {
      return c + Vec3{rng.uniform(-size, size), rng.uniform(-size, size), rng.uniform(-size, size)};
    };
    m.add_triangle(jitter(), jitter(), jitter());
  }
  return m;
}

bool hit_less(const RayHit& a, const RayHit& b) {
  return a.t != b.t ? a.t < b.t : a.triangle < b.triangle;
}

}  // namespace

TEST_CASE("point_triangle_distance regions") {
  const Vec3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0};
  CHECK(point_triangle_distance_sq({0.2, 0.2, 0.5}, a, b, c) == doctest::Approx(0.25));
  CHECK(point_triangle_distance_sq({-1, -1, 0}, a, b, c) == doctest::Approx(2.0));
  CHECK(point_triangle_distance_sq({0.5, -2, 0}, a, b, c) == doctest::Approx(4.0));
  CHECK(point_triangle_distance_sq({1, 1, 0}, a, b, c) == doctest::Approx(0.5));
  CHECK(point_triangle_distance_sq({2, 0, 1}, a, b, c) == doctest::Approx(2.0));
}

TEST_CASE("point_triangle_distance against dense barycentric sampling") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 a{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vec3 b{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vec3 c{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vec3 p{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    double best = 1e300;
    const int n = 200;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; i + j <= n; ++j) {
        const double u = static_cast<double>(i) / n, v = static_cast<double>(j) / n;
        const Vec3 q = a + (b - a) * u + (c - a) * v;
        best = std::min(best, dot(q - p, q - p));
      }
    }
    const double exact = point_triangle_distance_sq(p, a, b, c);
    CHECK(exact <= best + 1e-12);
    CHECK(std::sqrt(best) - std::sqrt(exact) < 0.02);
  }
}

TEST_CASE("hierarchy returns exactly the brute-force hit set") {
  Rng rng(5);
  const Mesh m = random_soup(rng, 3000);
  const TriangleBvh bvh(m);
  CHECK(bvh.size() == m.triangles.size());
  std::size_t total = 0;
  for (int r = 0; r < 2000; ++r) {
    const Vec3 o{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0.0};
    const Vec3 d{rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), 1.0};
    std::vector<RayHit> a, b;
    bvh.all_hits(o, d, 0.0, a);
    bvh.all_hits_brute_force(o, d, 0.0, b);
    std::sort(a.begin(), a.end(), hit_less);
    std::sort(b.begin(), b.end(), hit_less);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].triangle == b[i].triangle);
      CHECK(a[i].t == b[i].t);
    }
    total += a.size();
  }
  CHECK(total > 100);
}

TEST_CASE("t_min excludes earlier hits") {
  Mesh m;
  m.add_triangle({-1, -1, 2}, {1, -1, 2}, {0, 1, 2});
  m.add_triangle({-1, -1, 4}, {1, -1, 4}, {0, 1, 4});
  const TriangleBvh bvh(m);
  std::vector<RayHit> hits;
  bvh.all_hits({0, 0, 0}, {0, 0, 1}, 3.0, hits);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].t == doctest::Approx(4.0));
  CHECK(hits[0].triangle == 1);
}

TEST_CASE("nearest distance and any_within agree with brute force") {
  Rng rng(9);
  const Mesh m = random_soup(rng, 800);
  const TriangleBvh bvh(m);
  for (int i = 0; i < 500; ++i) {
    const Vec3 p{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(0, 8)};
    double best = 1e300;
    for (const auto& t : m.triangles) {
      best = std::min(best, point_triangle_distance_sq(p, m.vertices[t[0]], m.vertices[t[1]],
                                                       m.vertices[t[2]]));
    }
    CHECK(bvh.nearest_distance_sq(p) == best);
    const double r = rng.uniform(0.0, 0.6);
    CHECK(bvh.any_within(p, r) == (best <= r * r));
  }
}

TEST_CASE("empty hierarchy") {
  const TriangleBvh bvh{Mesh{}};
  CHECK(bvh.empty());
  std::vector<RayHit> hits;
  bvh.all_hits({0, 0, 0}, {0, 0, 1}, 0.0, hits);
  CHECK(hits.empty());
  CHECK_FALSE(bvh.any_within({0, 0, 0}, 100.0));
}
