#include <cmath>

#include "kernels_internal.hpp"

namespace mld::kernels {

namespace {

void intersect_scalar(const RayQuery& r, const TriangleArrays& tr, std::size_t begin,
                      std::size_t end, std::vector<RayHit>& out) {
  for (std::size_t i = begin; i < end; ++i) {
    const double ndot = r.dx * tr.nx[i] + r.dy * tr.ny[i] + r.dz * tr.nz[i];
    if (!(std::fabs(ndot) >= kGrazingCosine)) continue;

    const double px = r.dy * tr.e2z[i] - r.dz * tr.e2y[i];
    const double py = r.dz * tr.e2x[i] - r.dx * tr.e2z[i];
    const double pz = r.dx * tr.e2y[i] - r.dy * tr.e2x[i];
    const double det = tr.e1x[i] * px + tr.e1y[i] * py + tr.e1z[i] * pz;
    const double inv = 1.0 / det;

    const double sx = r.ox - tr.v0x[i];
    const double sy = r.oy - tr.v0y[i];
    const double sz = r.oz - tr.v0z[i];
    const double u = (sx * px + sy * py + sz * pz) * inv;

    const double qx = sy * tr.e1z[i] - sz * tr.e1y[i];
    const double qy = sz * tr.e1x[i] - sx * tr.e1z[i];
    const double qz = sx * tr.e1y[i] - sy * tr.e1x[i];
    const double v = (r.dx * qx + r.dy * qy + r.dz * qz) * inv;
    const double t = (tr.e2x[i] * qx + tr.e2y[i] * qy + tr.e2z[i] * qz) * inv;

    if (u >= -kEdgeSlack && v >= -kEdgeSlack && u + v <= 1.0 + kEdgeSlack && t >= r.t_min) {
      out.push_back({t, static_cast<std::uint32_t>(i)});
    }
  }
}

double huber_scalar(const double* pred, const double* gt, const std::uint8_t* mask, std::size_t n,
                    double delta) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    acc[i % 4] += mask[i] ? huber_value(pred[i] - gt[i], delta) : 0.0;
  }
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

void bilinear_scalar(const double* u, const double* v, std::size_t n, std::int32_t* bu,
                     std::int32_t* bv, double* w) {
  for (std::size_t i = 0; i < n; ++i) {
    const double fu = u[i] - 0.5;
    const double fv = v[i] - 0.5;
    const double iu = std::floor(fu);
    const double iv = std::floor(fv);
    const double a = fu - iu;
    const double b = fv - iv;
    bu[i] = static_cast<std::int32_t>(iu);
    bv[i] = static_cast<std::int32_t>(iv);
    w[4 * i + 0] = (1.0 - a) * (1.0 - b);
    w[4 * i + 1] = a * (1.0 - b);
    w[4 * i + 2] = (1.0 - a) * b;
    w[4 * i + 3] = a * b;
  }
}

void axpy_scalar(double* acc, const double* x, double w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i] * w;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", intersect_scalar, huber_scalar, bilinear_scalar,
                                 axpy_scalar};
  return table;
}

}  // namespace mld::kernels
