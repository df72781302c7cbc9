#include "mld/bvh.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace mld {

namespace {

constexpr int kBins = 16;
constexpr std::uint32_t kLeafSize = 4;
constexpr std::uint32_t kMaxLeafSize = 16;
constexpr int kMaxDepth = 60;

double surface_area(const Vec3& lo, const Vec3& hi) {
  const Vec3 e = hi - lo;
  if (e.x < 0.0 || e.y < 0.0 || e.z < 0.0) return 0.0;
  return 2.0 * (e.x * e.y + e.y * e.z + e.z * e.x);
}

// Boxes are padded so rounding in the slab test can never reject a triangle
// lying on a box face.
void pad(Vec3& lo, Vec3& hi) {
  const Vec3 e = hi - lo;
  const double m = std::fmax(e.x, std::fmax(e.y, e.z));
  const double eps = 1e-9 + 1e-7 * m +
                     1e-12 * std::fmax(norm(lo), norm(hi));
  lo = lo - Vec3{eps, eps, eps};
  hi = hi + Vec3{eps, eps, eps};
}

bool slab_hit(const Vec3& lo, const Vec3& hi, const Vec3& o, const Vec3& inv, double t_min) {
  double t0 = t_min;
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    double ta = (lo[a] - o[a]) * inv[a];
    double tb = (hi[a] - o[a]) * inv[a];
    if (std::isnan(ta) || std::isnan(tb)) {
      // Zero direction component with the origin on a slab face.
      if (o[a] < lo[a] || o[a] > hi[a]) return false;
      continue;
    }
    if (ta > tb) std::swap(ta, tb);
    t0 = ta > t0 ? ta : t0;
    t1 = tb < t1 ? tb : t1;
    if (t0 > t1) return false;
  }
  return true;
}

double box_distance_sq(const Vec3& lo, const Vec3& hi, const Vec3& p) {
  double d = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double below = lo[a] - p[a];
    const double above = p[a] - hi[a];
    const double e = below > 0.0 ? below : (above > 0.0 ? above : 0.0);
    d += e * e;
  }
  return d;
}

}  // namespace

double point_triangle_distance_sq(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Voronoi-region walk (Ericson, Real-Time Collision Detection 5.1.5).
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return dot(ap, ap);

  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return dot(bp, bp);

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    const Vec3 q = p - (a + ab * v);
    return dot(q, q);
  }

  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return dot(cp, cp);

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    const Vec3 q = p - (a + ac * w);
    return dot(q, q);
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    const Vec3 q = p - (b + (c - b) * w);
    return dot(q, q);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  const Vec3 q = p - (a + ab * v + ac * w);
  return dot(q, q);
}

void TriangleBvh::Soa::resize(std::size_t n) {
  for (auto* v : {&v0x, &v0y, &v0z, &e1x, &e1y, &e1z, &e2x, &e2y, &e2z, &nx, &ny, &nz}) {
    v->assign(n, 0.0);
  }
}

kernels::TriangleArrays TriangleBvh::arrays() const {
  return {soa_.v0x.data(), soa_.v0y.data(), soa_.v0z.data(), soa_.e1x.data(),
          soa_.e1y.data(), soa_.e1z.data(), soa_.e2x.data(), soa_.e2y.data(),
          soa_.e2z.data(), soa_.nx.data(),  soa_.ny.data(),  soa_.nz.data()};
}

TriangleBvh::TriangleBvh(const Mesh& mesh) : count_(mesh.triangles.size()) {
  if (count_ == 0) return;
  const auto n = static_cast<std::uint32_t>(count_);
  std::vector<Vec3> centroids(n), lo(n), hi(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto& t = mesh.triangles[i];
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    lo[i] = min(a, min(b, c));
    hi[i] = max(a, max(b, c));
    centroids[i] = (a + b + c) / 3.0;
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  nodes_.reserve(2 * n);
  build(order, centroids, lo, hi, 0, n, 0);

  const std::size_t padded = (count_ + kernels::kTrianglePad - 1) / kernels::kTrianglePad *
                             kernels::kTrianglePad;
  soa_.resize(padded);
  corners_.resize(count_);
  original_ = order;
  for (std::size_t k = 0; k < count_; ++k) {
    const auto& t = mesh.triangles[order[k]];
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 cr = cross(e1, e2);
    const double len = norm(cr);
    const Vec3 nrm = len > 0.0 ? cr / len : Vec3{};
    corners_[k] = {a, b, c};
    soa_.v0x[k] = a.x; soa_.v0y[k] = a.y; soa_.v0z[k] = a.z;
    soa_.e1x[k] = e1.x; soa_.e1y[k] = e1.y; soa_.e1z[k] = e1.z;
    soa_.e2x[k] = e2.x; soa_.e2y[k] = e2.y; soa_.e2z[k] = e2.z;
    soa_.nx[k] = nrm.x; soa_.ny[k] = nrm.y; soa_.nz[k] = nrm.z;
  }
}

std::uint32_t TriangleBvh::build(std::vector<std::uint32_t>& order, std::vector<Vec3>& centroids,
                                 std::vector<Vec3>& lo, std::vector<Vec3>& hi,
                                 std::uint32_t begin, std::uint32_t end, int depth) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Vec3 blo = lo[order[begin]], bhi = hi[order[begin]];
  Vec3 clo = centroids[order[begin]], chi = clo;
  for (std::uint32_t i = begin; i < end; ++i) {
    blo = min(blo, lo[order[i]]);
    bhi = max(bhi, hi[order[i]]);
    clo = min(clo, centroids[order[i]]);
    chi = max(chi, centroids[order[i]]);
  }
  pad(blo, bhi);
  nodes_[index].lo = blo;
  nodes_[index].hi = bhi;

  const std::uint32_t count = end - begin;
  auto make_leaf = [&] {
    nodes_[index].first = begin;
    nodes_[index].count = count;
    return index;
  };
  if (count <= kLeafSize || depth >= kMaxDepth) return make_leaf();

  // Binned SAH over the widest centroid axis.
  const Vec3 ext = chi - clo;
  int axis = 0;
  if (ext.y > ext[axis]) axis = 1;
  if (ext.z > ext[axis]) axis = 2;
  if (!(ext[axis] > 0.0)) {
    if (count <= kMaxLeafSize) return make_leaf();
    const std::uint32_t mid = begin + count / 2;
    build(order, centroids, lo, hi, begin, mid, depth + 1);
    nodes_[index].first = build(order, centroids, lo, hi, mid, end, depth + 1);
    return index;
  }

  struct Bin {
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};
    std::uint32_t count = 0;
  };
  std::array<Bin, kBins> bins;
  const double scale = kBins / ext[axis];
  auto bin_of = [&](std::uint32_t tri) {
    const int b = static_cast<int>((centroids[tri][axis] - clo[axis]) * scale);
    return std::clamp(b, 0, kBins - 1);
  };
  for (std::uint32_t i = begin; i < end; ++i) {
    Bin& b = bins[bin_of(order[i])];
    b.lo = min(b.lo, lo[order[i]]);
    b.hi = max(b.hi, hi[order[i]]);
    ++b.count;
  }
  std::array<double, kBins - 1> left_cost{}, right_cost{};
  {
    Bin acc;
    for (int i = 0; i < kBins - 1; ++i) {
      acc.lo = min(acc.lo, bins[i].lo);
      acc.hi = max(acc.hi, bins[i].hi);
      acc.count += bins[i].count;
      left_cost[i] = acc.count ? acc.count * surface_area(acc.lo, acc.hi) : 0.0;
    }
  }
  {
    Bin acc;
    for (int i = kBins - 1; i > 0; --i) {
      acc.lo = min(acc.lo, bins[i].lo);
      acc.hi = max(acc.hi, bins[i].hi);
      acc.count += bins[i].count;
      right_cost[i - 1] = acc.count ? acc.count * surface_area(acc.lo, acc.hi) : 0.0;
    }
  }
  int best = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kBins - 1; ++i) {
    const double c = left_cost[i] + right_cost[i];
    if (c < best_cost) {
      best_cost = c;
      best = i;
    }
  }
  const double leaf_cost = count * surface_area(blo, bhi);
  if (count <= kMaxLeafSize && best_cost >= leaf_cost) return make_leaf();

  auto mid_ptr = std::partition(order.begin() + begin, order.begin() + end,
                                 [&](std::uint32_t tri) { return bin_of(tri) <= best; });
  auto mid = static_cast<std::uint32_t>(mid_ptr - order.begin());
  if (mid == begin || mid == end) mid = begin + count / 2;

  build(order, centroids, lo, hi, begin, mid, depth + 1);
  nodes_[index].first = build(order, centroids, lo, hi, mid, end, depth + 1);
  return index;
}

void TriangleBvh::remap(std::size_t before, std::vector<RayHit>& out) const {
  for (std::size_t k = before; k < out.size(); ++k) out[k].triangle = original_[out[k].triangle];
}

void TriangleBvh::all_hits(const Vec3& o, const Vec3& d, double t_min,
                           std::vector<RayHit>& out) const {
  if (count_ == 0) return;
  const Vec3 inv{1.0 / d.x, 1.0 / d.y, 1.0 / d.z};
  const kernels::RayQuery q{o.x, o.y, o.z, d.x, d.y, d.z, t_min};
  const kernels::TriangleArrays tris = arrays();
  const auto& kern = kernels::active();
  const std::size_t before = out.size();

  std::uint32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!slab_hit(node.lo, node.hi, o, inv, t_min)) continue;
    if (node.count > 0) {
      kern.intersect(q, tris, node.first, node.first + node.count, out);
    } else {
      const std::uint32_t self = static_cast<std::uint32_t>(&node - nodes_.data());
      stack[top++] = node.first;
      stack[top++] = self + 1;
    }
  }
  remap(before, out);
}

void TriangleBvh::all_hits_brute_force(const Vec3& o, const Vec3& d, double t_min,
                                       std::vector<RayHit>& out) const {
  if (count_ == 0) return;
  const kernels::RayQuery q{o.x, o.y, o.z, d.x, d.y, d.z, t_min};
  const std::size_t before = out.size();
  kernels::active().intersect(q, arrays(), 0, count_, out);
  remap(before, out);
}

bool TriangleBvh::any_within(const Vec3& p, double r) const {
  if (count_ == 0) return false;
  const double r2 = r * r;
  std::uint32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const std::uint32_t id = stack[--top];
    const Node& node = nodes_[id];
    if (box_distance_sq(node.lo, node.hi, p) > r2) continue;
    if (node.count > 0) {
      for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
        const auto& c = corners_[k];
        if (point_triangle_distance_sq(p, c[0], c[1], c[2]) <= r2) return true;
      }
    } else {
      stack[top++] = node.first;
      stack[top++] = id + 1;
    }
  }
  return false;
}

double TriangleBvh::nearest_distance_sq(const Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  if (count_ == 0) return best;
  std::uint32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const std::uint32_t id = stack[--top];
    const Node& node = nodes_[id];
    if (box_distance_sq(node.lo, node.hi, p) > best) continue;
    if (node.count > 0) {
      for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
        const auto& c = corners_[k];
        best = std::fmin(best, point_triangle_distance_sq(p, c[0], c[1], c[2]));
      }
    } else {
      stack[top++] = node.first;
      stack[top++] = id + 1;
    }
  }
  return best;
}

}  // namespace mld
