#pragma once

// Data-parallel inner loops with a portable scalar reference and SIMD variants
// selected at runtime. Every variant must produce bit-identical results to the
// scalar reference: same operation order, no FMA contraction.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace mld::kernels {

// Triangles in structure-of-arrays form: first vertex, the two edges, and the
// unit normal. Arrays are padded to a multiple of kTrianglePad with copies of
// a degenerate (never-hit) triangle so SIMD loops need no tail handling.
inline constexpr std::size_t kTrianglePad = 8;

struct TriangleArrays {
  const double* v0x;
  const double* v0y;
  const double* v0z;
  const double* e1x;
  const double* e1y;
  const double* e1z;
  const double* e2x;
  const double* e2y;
  const double* e2z;
  const double* nx;
  const double* ny;
  const double* nz;
};

struct RayQuery {
  double ox, oy, oz;
  double dx, dy, dz;
  double t_min;
};

struct RayHit {
  double t;
  std::uint32_t triangle;
};

// Hits with |dir . normal| below this are treated as grazing and discarded.
inline constexpr double kGrazingCosine = 1e-9;
// Barycentric slack so rays through a shared edge hit at least one side.
inline constexpr double kEdgeSlack = 1e-12;

struct KernelTable {
  const char* name;

  // Moller-Trumbore over triangles [begin, end). Appends hits with t >= t_min in
  // ascending triangle order.
  void (*intersect)(const RayQuery& ray, const TriangleArrays& tris, std::size_t begin,
                    std::size_t end, std::vector<RayHit>& out);

  // Sum over i with mask[i] != 0 of huber(pred[i] - gt[i]); accumulated in four
  // interleaved partial sums (lane i % 4) combined as (s0 + s1) + (s2 + s3).
  double (*huber_masked_sum)(const double* pred, const double* gt, const std::uint8_t* mask,
                             std::size_t n, double delta);

  // Bilinear splat footprints: for each sample, base cell (floor(u - 0.5),
  // floor(v - 0.5)) and the four corner weights ordered (00, 10, 01, 11).
  void (*bilinear_weights)(const double* u, const double* v, std::size_t n, std::int32_t* base_u,
                           std::int32_t* base_v, double* weights);

  // acc[i] += x[i] * w.
  void (*axpy)(double* acc, const double* x, double w, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when not compiled in or not supported by this CPU.
const KernelTable* avx2_table();

// Currently selected table. Defaults to the best supported variant; the
// MLD_KERNELS environment variable ("scalar", "avx2", "auto") overrides.
const KernelTable& active();

// Returns false when the requested variant is unavailable.
bool select(std::string_view name);

}  // namespace mld::kernels
