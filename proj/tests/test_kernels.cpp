#include "doctest.h"

#include <cstring>

#include "mld/kernels/kernels.hpp"
#include "mld/synth.hpp"

using namespace mld;
using namespace mld::kernels;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

struct SoaTris {
  std::vector<double> v[12];
  TriangleArrays arrays() const {
    return {v[0].data(), v[1].data(), v[2].data(), v[3].data(), v[4].data(), v[5].data(),
            v[6].data(), v[7].data(), v[8].data(), v[9].data(), v[10].data(), v[11].data()};
  }
};

SoaTris random_tris(Rng& rng, std::size_t n) {
  SoaTris s;
  const std::size_t padded = (n + kTrianglePad - 1) / kTrianglePad * kTrianglePad;
  for (auto& a : s.v) a.assign(padded, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double p[9];
    for (double& x : p) x = rng.uniform(-1.0, 1.0);
    p[2] += 3.0;
    p[5] += 3.0;
    p[8] += 3.0;
    const double e1[3] = {p[3] - p[0], p[4] - p[1], p[5] - p[2]};
    const double e2[3] = {p[6] - p[0], p[7] - p[1], p[8] - p[2]};
    double nx = e1[1] * e2[2] - e1[2] * e2[1];
    double ny = e1[2] * e2[0] - e1[0] * e2[2];
    double nz = e1[0] * e2[1] - e1[1] * e2[0];
    const double len = std::sqrt(nx * nx + ny * ny + nz * nz);
    nx /= len;
    ny /= len;
    nz /= len;
    const double vals[12] = {p[0], p[1], p[2], e1[0], e1[1], e1[2],
                             e2[0], e2[1], e2[2], nx, ny, nz};
    for (int k = 0; k < 12; ++k) s.v[k][i] = vals[k];
  }
  return s;
}

}  // namespace

TEST_CASE("kernel selection") {
  const std::string before = active().name;
  CHECK(select("scalar"));
  CHECK(std::string(active().name) == "scalar");
  CHECK_FALSE(select("sse9"));
  CHECK(select("auto"));
  if (avx2_table() != nullptr) CHECK(std::string(active().name) == "avx2");
  CHECK(select(before));
}

TEST_CASE("scalar kernel reference values") {
  const auto& k = scalar_table();
  const double pred[5] = {0.5, 2.0, -3.0, 0.0, 1.0};
  const double gt[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
  const std::uint8_t mask[5] = {1, 1, 1, 1, 0};
  // 0.125 + 1.5 + 2.5 + 0
  CHECK(k.huber_masked_sum(pred, gt, mask, 5, 1.0) == doctest::Approx(4.125));

  const double u[1] = {2.75}, v[1] = {1.0};
  std::int32_t bu[1], bv[1];
  double w[4];
  k.bilinear_weights(u, v, 1, bu, bv, w);
  CHECK(bu[0] == 2);
  CHECK(bv[0] == 0);
  CHECK(w[0] == doctest::Approx(0.75 * 0.5));
  CHECK(w[1] == doctest::Approx(0.25 * 0.5));
  CHECK(w[0] + w[1] + w[2] + w[3] == doctest::Approx(1.0));
}

TEST_CASE("avx2 kernels equal the scalar reference bit for bit") {
  const KernelTable* simd = avx2_table();
  if (simd == nullptr) {
    MESSAGE("AVX2 kernels unavailable on this machine; equivalence not exercised");
    return;
  }
  const auto& ref = scalar_table();
  Rng rng(2024);

  SUBCASE("intersect") {
    for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 13u, 64u, 257u}) {
      const SoaTris tris = random_tris(rng, n);
      for (int r = 0; r < 200; ++r) {
        RayQuery q{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 0.0,
                   rng.uniform(-0.4, 0.4),  rng.uniform(-0.4, 0.4), 1.0,
                   rng.uniform(0.0, 3.0)};
        const std::size_t begin = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(n) - 1));
        const std::size_t end = begin + static_cast<std::size_t>(
                                            rng.uniform_int(0, static_cast<int>(n - begin)));
        std::vector<RayHit> a, b;
        ref.intersect(q, tris.arrays(), begin, end, a);
        simd->intersect(q, tris.arrays(), begin, end, b);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
          CHECK(a[i].triangle == b[i].triangle);
          CHECK(same_bits(a[i].t, b[i].t));
        }
      }
    }
  }

  SUBCASE("huber_masked_sum") {
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 1000u, 1023u}) {
      std::vector<double> p(n), g(n);
      std::vector<std::uint8_t> m(n);
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = rng.uniform(-4, 4);
        g[i] = rng.uniform(-4, 4);
        m[i] = rng.uniform() < 0.7;
      }
      for (double delta : {0.3, 1.0, 2.5}) {
        CHECK(same_bits(ref.huber_masked_sum(p.data(), g.data(), m.data(), n, delta),
                        simd->huber_masked_sum(p.data(), g.data(), m.data(), n, delta)));
      }
    }
  }

  SUBCASE("bilinear_weights") {
    for (std::size_t n : {1u, 2u, 4u, 9u, 333u}) {
      std::vector<double> u(n), v(n), wa(4 * n), wb(4 * n);
      std::vector<std::int32_t> ua(n), ub(n), va(n), vb(n);
      for (std::size_t i = 0; i < n; ++i) {
        u[i] = rng.uniform(-3, 200);
        v[i] = rng.uniform(-3, 200);
      }
      u[0] = 0.5;  // exactly on a grid line
      ref.bilinear_weights(u.data(), v.data(), n, ua.data(), va.data(), wa.data());
      simd->bilinear_weights(u.data(), v.data(), n, ub.data(), vb.data(), wb.data());
      CHECK(ua == ub);
      CHECK(va == vb);
      for (std::size_t i = 0; i < 4 * n; ++i) CHECK(same_bits(wa[i], wb[i]));
    }
  }

  SUBCASE("axpy") {
    for (std::size_t n : {1u, 3u, 4u, 6u, 64u, 65u}) {
      std::vector<double> x(n), a(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform(-1, 1);
        a[i] = b[i] = rng.uniform(-1, 1);
      }
      const double w = rng.uniform(0, 2);
      ref.axpy(a.data(), x.data(), w, n);
      simd->axpy(b.data(), x.data(), w, n);
      for (std::size_t i = 0; i < n; ++i) CHECK(same_bits(a[i], b[i]));
    }
  }
}
