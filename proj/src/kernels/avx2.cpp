// AVX2 variants, four doubles per lane group. Compiled with -mavx2 only (no
// FMA) so every product and sum rounds exactly like the scalar reference.

#include <immintrin.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace mld::kernels {

namespace {

inline __m256d abs_pd(__m256d x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

// a0*b0 + a1*b1 + a2*b2, evaluated left to right.
inline __m256d dot3(__m256d a0, __m256d b0, __m256d a1, __m256d b1, __m256d a2, __m256d b2) {
  return _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(a0, b0), _mm256_mul_pd(a1, b1)),
                       _mm256_mul_pd(a2, b2));
}

// a*b - c*d
inline __m256d msub(__m256d a, __m256d b, __m256d c, __m256d d) {
  return _mm256_sub_pd(_mm256_mul_pd(a, b), _mm256_mul_pd(c, d));
}

void intersect_avx2(const RayQuery& r, const TriangleArrays& tr, std::size_t begin,
                    std::size_t end, std::vector<RayHit>& out) {
  const __m256d ox = _mm256_set1_pd(r.ox);
  const __m256d oy = _mm256_set1_pd(r.oy);
  const __m256d oz = _mm256_set1_pd(r.oz);
  const __m256d dx = _mm256_set1_pd(r.dx);
  const __m256d dy = _mm256_set1_pd(r.dy);
  const __m256d dz = _mm256_set1_pd(r.dz);
  const __m256d tmin = _mm256_set1_pd(r.t_min);
  const __m256d graze = _mm256_set1_pd(kGrazingCosine);
  const __m256d lo = _mm256_set1_pd(-kEdgeSlack);
  const __m256d hi = _mm256_set1_pd(1.0 + kEdgeSlack);
  const __m256d one = _mm256_set1_pd(1.0);

  std::size_t i = begin;
  for (; i + 4 <= end; i += 4) {
    const __m256d nx = _mm256_loadu_pd(tr.nx + i);
    const __m256d ny = _mm256_loadu_pd(tr.ny + i);
    const __m256d nz = _mm256_loadu_pd(tr.nz + i);
    const __m256d ndot = dot3(dx, nx, dy, ny, dz, nz);
    __m256d ok = _mm256_cmp_pd(abs_pd(ndot), graze, _CMP_GE_OQ);
    if (_mm256_movemask_pd(ok) == 0) continue;

    const __m256d e1x = _mm256_loadu_pd(tr.e1x + i);
    const __m256d e1y = _mm256_loadu_pd(tr.e1y + i);
    const __m256d e1z = _mm256_loadu_pd(tr.e1z + i);
    const __m256d e2x = _mm256_loadu_pd(tr.e2x + i);
    const __m256d e2y = _mm256_loadu_pd(tr.e2y + i);
    const __m256d e2z = _mm256_loadu_pd(tr.e2z + i);

    const __m256d px = msub(dy, e2z, dz, e2y);
    const __m256d py = msub(dz, e2x, dx, e2z);
    const __m256d pz = msub(dx, e2y, dy, e2x);
    const __m256d det = dot3(e1x, px, e1y, py, e1z, pz);
    const __m256d inv = _mm256_div_pd(one, det);

    const __m256d sx = _mm256_sub_pd(ox, _mm256_loadu_pd(tr.v0x + i));
    const __m256d sy = _mm256_sub_pd(oy, _mm256_loadu_pd(tr.v0y + i));
    const __m256d sz = _mm256_sub_pd(oz, _mm256_loadu_pd(tr.v0z + i));
    const __m256d u = _mm256_mul_pd(dot3(sx, px, sy, py, sz, pz), inv);

    const __m256d qx = msub(sy, e1z, sz, e1y);
    const __m256d qy = msub(sz, e1x, sx, e1z);
    const __m256d qz = msub(sx, e1y, sy, e1x);
    const __m256d v = _mm256_mul_pd(dot3(dx, qx, dy, qy, dz, qz), inv);
    const __m256d t = _mm256_mul_pd(dot3(e2x, qx, e2y, qy, e2z, qz), inv);

    ok = _mm256_and_pd(ok, _mm256_cmp_pd(u, lo, _CMP_GE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(v, lo, _CMP_GE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(_mm256_add_pd(u, v), hi, _CMP_LE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(t, tmin, _CMP_GE_OQ));

    int bits = _mm256_movemask_pd(ok);
    if (bits == 0) continue;
    alignas(32) double ts[4];
    _mm256_store_pd(ts, t);
    for (int lane = 0; lane < 4; ++lane) {
      if (bits & (1 << lane)) out.push_back({ts[lane], static_cast<std::uint32_t>(i + lane)});
    }
  }
  if (i < end) scalar_table().intersect(r, tr, i, end, out);
}

inline __m256d huber_pd(__m256d r, __m256d delta) {
  const __m256d a = abs_pd(r);
  const __m256d quad = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(0.5), r), r);
  const __m256d lin =
      _mm256_mul_pd(delta, _mm256_sub_pd(a, _mm256_mul_pd(_mm256_set1_pd(0.5), delta)));
  const __m256d use_quad = _mm256_cmp_pd(a, delta, _CMP_LE_OQ);
  return _mm256_blendv_pd(lin, quad, use_quad);
}

double huber_avx2(const double* pred, const double* gt, const std::uint8_t* mask, std::size_t n,
                  double delta) {
  const __m256d vdelta = _mm256_set1_pd(delta);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(pred + i), _mm256_loadu_pd(gt + i));
    const __m256d h = huber_pd(r, vdelta);
    const __m256i m32 = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(
        static_cast<int>(static_cast<std::uint32_t>(mask[i]) |
                         (static_cast<std::uint32_t>(mask[i + 1]) << 8) |
                         (static_cast<std::uint32_t>(mask[i + 2]) << 16) |
                         (static_cast<std::uint32_t>(mask[i + 3]) << 24))));
    const __m256d keep =
        _mm256_castsi256_pd(_mm256_cmpgt_epi64(m32, _mm256_setzero_si256()));
    acc = _mm256_add_pd(acc, _mm256_blendv_pd(_mm256_setzero_pd(), h, keep));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (; i < n; ++i) {
    lanes[i % 4] += mask[i] ? huber_value(pred[i] - gt[i], delta) : 0.0;
  }
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

void bilinear_avx2(const double* u, const double* v, std::size_t n, std::int32_t* bu,
                   std::int32_t* bv, double* w) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d fu = _mm256_sub_pd(_mm256_loadu_pd(u + i), half);
    const __m256d fv = _mm256_sub_pd(_mm256_loadu_pd(v + i), half);
    const __m256d iu = _mm256_floor_pd(fu);
    const __m256d iv = _mm256_floor_pd(fv);
    const __m256d a = _mm256_sub_pd(fu, iu);
    const __m256d b = _mm256_sub_pd(fv, iv);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(bu + i), _mm256_cvttpd_epi32(iu));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(bv + i), _mm256_cvttpd_epi32(iv));
    const __m256d na = _mm256_sub_pd(one, a);
    const __m256d nb = _mm256_sub_pd(one, b);
    const __m256d w00 = _mm256_mul_pd(na, nb);
    const __m256d w10 = _mm256_mul_pd(a, nb);
    const __m256d w01 = _mm256_mul_pd(na, b);
    const __m256d w11 = _mm256_mul_pd(a, b);
    // Transpose four weight vectors into per-sample quadruples.
    const __m256d t0 = _mm256_unpacklo_pd(w00, w10);
    const __m256d t1 = _mm256_unpackhi_pd(w00, w10);
    const __m256d t2 = _mm256_unpacklo_pd(w01, w11);
    const __m256d t3 = _mm256_unpackhi_pd(w01, w11);
    _mm256_storeu_pd(w + 4 * i + 0, _mm256_permute2f128_pd(t0, t2, 0x20));
    _mm256_storeu_pd(w + 4 * i + 4, _mm256_permute2f128_pd(t1, t3, 0x20));
    _mm256_storeu_pd(w + 4 * i + 8, _mm256_permute2f128_pd(t0, t2, 0x31));
    _mm256_storeu_pd(w + 4 * i + 12, _mm256_permute2f128_pd(t1, t3, 0x31));
  }
  if (i < n) scalar_table().bilinear_weights(u + i, v + i, n - i, bu + i, bv + i, w + 4 * i);
}

void axpy_avx2(double* acc, const double* x, double w, std::size_t n) {
  const __m256d vw = _mm256_set1_pd(w);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(x + i), vw);
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), prod));
  }
  for (; i < n; ++i) acc[i] += x[i] * w;
}

}  // namespace

const KernelTable& avx2_table_impl() {
  static const KernelTable table{"avx2", intersect_avx2, huber_avx2, bilinear_avx2, axpy_avx2};
  return table;
}

}  // namespace mld::kernels
