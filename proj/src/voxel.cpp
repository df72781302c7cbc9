#include <algorithm>
#include <cmath>

#include "mld/metrics.hpp"
#include "mld/parallel.hpp"

namespace mld {

VoxelGrid::VoxelGrid(const Vec3& o, double e, int x, int y, int z)
    : origin(o), edge(e), nx(x), ny(y), nz(z) {
  if (!(e > 0.0) || !std::isfinite(e)) fail(ErrorCode::InvalidArgument, "voxel edge must be positive");
  if (x <= 0 || y <= 0 || z <= 0) fail(ErrorCode::Dimension, "voxel resolution must be positive");
  if (!o.finite()) fail(ErrorCode::InvalidArgument, "voxel origin must be finite");
  occupancy.assign(static_cast<std::size_t>(x) * static_cast<std::size_t>(y) *
                       static_cast<std::size_t>(z),
                   0);
}

std::size_t VoxelGrid::count() const {
  return static_cast<std::size_t>(std::count_if(occupancy.begin(), occupancy.end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

bool VoxelGrid::same_geometry(const VoxelGrid& o) const {
  return origin == o.origin && edge == o.edge && nx == o.nx && ny == o.ny && nz == o.nz;
}

VoxelGrid default_voxel_grid() { return VoxelGrid({-5.0, -5.0, 0.0}, 0.025, 400, 400, 400); }

VoxelGrid voxelize_prediction(const MultiLayerDepthMap& depths, const PerspectiveCamera& cam,
                              const VoxelGrid& grid, int threads) {
  cam.validate();
  if (depths.width != cam.width || depths.height != cam.height) {
    fail(ErrorCode::Dimension, "depth map does not match the camera resolution");
  }
  VoxelGrid out = grid.empty_like();
  const DepthRaster& d1 = depths.layer(1);
  const DepthRaster& d2 = depths.layer(2);
  const DepthRaster& d3 = depths.layer(3);
  const DepthRaster& d4 = depths.layer(4);
  parallel_for(static_cast<std::size_t>(grid.nz), threads, [&](std::size_t k0, std::size_t k1) {
    for (std::size_t kk = k0; kk < k1; ++kk) {
      const int k = static_cast<int>(kk);
      for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
          const Vec3 c = grid.center(i, j, k);
          if (!(c.z > 0.0)) continue;
          const auto st = cam.project(c);
          const double fs = std::floor(st[0]);
          const double ft = std::floor(st[1]);
          if (fs < 0.0 || ft < 0.0 || fs >= cam.width || ft >= cam.height) continue;
          const int x = static_cast<int>(fs);
          const int y = static_cast<int>(ft);
          const double z = c.z;
          if ((d1(x, y) < z && z < d2(x, y)) || (d3(x, y) < z && z < d4(x, y))) {
            out.occupancy[grid.index(i, j, k)] = 1;
          }
        }
      }
    }
  });
  return out;
}

namespace {

struct Point2 {
  double b, c;
};

// Edge function of directed edge p -> q at x, evaluated with the endpoints in
// a canonical order so a shared edge gives exactly opposite values for its
// two triangles.
double edge_function(const Point2& p, const Point2& q, const Point2& x) {
  const bool swap = q.b < p.b || (q.b == p.b && q.c < p.c);
  const Point2& a = swap ? q : p;
  const Point2& b = swap ? p : q;
  const double e = (b.b - a.b) * (x.c - a.c) - (b.c - a.c) * (x.b - a.b);
  return swap ? -e : e;
}

// Top-left style tie rule: exactly one direction of every edge owns points on it.
bool owns_edge(const Point2& p, const Point2& q) {
  const double db = q.b - p.b, dc = q.c - p.c;
  return dc < 0.0 || (dc == 0.0 && db > 0.0);
}

}  // namespace

VoxelGrid voxelize_mesh_parity(const Mesh& mesh, const VoxelGrid& grid, int threads) {
  VoxelGrid out = grid.empty_like();
  std::vector<std::uint8_t> votes(out.occupancy.size(), 0);
  std::vector<std::uint8_t> surface(out.occupancy.size(), 0);
  const int dims[3] = {grid.nx, grid.ny, grid.nz};

  for (int axis = 0; axis < 3; ++axis) {
    const int ab = (axis + 1) % 3;
    const int ac = (axis + 2) % 3;
    const int nb = dims[ab], nc = dims[ac], na = dims[axis];
    const double ob = grid.origin[ab], oc = grid.origin[ac], oa = grid.origin[axis];
    const double e = grid.edge;

    // Triangles bucketed by the column rows (index along ab) their bounds touch.
    std::vector<std::vector<std::uint32_t>> rows(static_cast<std::size_t>(nb));
    for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t) {
      double lo = 1e300, hi = -1e300;
      for (auto vi : mesh.triangles[t]) {
        lo = std::min(lo, mesh.vertices[vi][ab]);
        hi = std::max(hi, mesh.vertices[vi][ab]);
      }
      const int i0 = std::max(0, static_cast<int>(std::ceil((lo - ob) / e - 0.5)));
      const int i1 = std::min(nb - 1, static_cast<int>(std::floor((hi - ob) / e - 0.5)));
      for (int i = i0; i <= i1; ++i) rows[static_cast<std::size_t>(i)].push_back(t);
    }

    auto voxel = [&](int ia, int ib, int ic) {
      int idx[3];
      idx[axis] = ia;
      idx[ab] = ib;
      idx[ac] = ic;
      return grid.index(idx[0], idx[1], idx[2]);
    };

    parallel_for(static_cast<std::size_t>(nb), threads, [&](std::size_t r0, std::size_t r1) {
      std::vector<std::vector<double>> crossings(static_cast<std::size_t>(nc));
      for (std::size_t rr = r0; rr < r1; ++rr) {
        const int ib = static_cast<int>(rr);
        for (auto& c : crossings) c.clear();
        const double xb = ob + (ib + 0.5) * e;
        for (std::uint32_t t : rows[rr]) {
          const auto& tri = mesh.triangles[t];
          Point2 p[3];
          double along[3];
          double cmin = 1e300, cmax = -1e300;
          for (int q = 0; q < 3; ++q) {
            const Vec3& v = mesh.vertices[tri[q]];
            p[q] = {v[ab], v[ac]};
            along[q] = v[axis];
            cmin = std::min(cmin, p[q].c);
            cmax = std::max(cmax, p[q].c);
          }
          const double area2 = edge_function(p[0], p[1], p[2]);
          if (area2 == 0.0) continue;
          if (area2 < 0.0) {
            std::swap(p[1], p[2]);
            std::swap(along[1], along[2]);
          }
          const int j0 = std::max(0, static_cast<int>(std::ceil((cmin - oc) / e - 0.5)));
          const int j1 = std::min(nc - 1, static_cast<int>(std::floor((cmax - oc) / e - 0.5)));
          for (int ic = j0; ic <= j1; ++ic) {
            const Point2 x{xb, oc + (ic + 0.5) * e};
            const double w0 = edge_function(p[1], p[2], x);
            const double w1 = edge_function(p[2], p[0], x);
            const double w2 = edge_function(p[0], p[1], x);
            auto inside = [](double w, const Point2& a, const Point2& b) {
              return w > 0.0 || (w == 0.0 && owns_edge(a, b));
            };
            if (!inside(w0, p[1], p[2]) || !inside(w1, p[2], p[0]) || !inside(w2, p[0], p[1])) {
              continue;
            }
            const double sum = w0 + w1 + w2;
            crossings[static_cast<std::size_t>(ic)].push_back(
                (w0 * along[0] + w1 * along[1] + w2 * along[2]) / sum);
          }
        }
        for (int ic = 0; ic < nc; ++ic) {
          auto& cs = crossings[static_cast<std::size_t>(ic)];
          if (cs.empty()) continue;
          std::sort(cs.begin(), cs.end());
          if (cs.size() % 2 == 1) {
            for (double a : cs) {
              const double f = std::floor((a - oa) / e);
              if (f >= 0.0 && f < na) surface[voxel(static_cast<int>(f), ib, ic)] = 1;
            }
            continue;
          }
          for (std::size_t q = 0; q + 1 < cs.size(); q += 2) {
            const int k0 = std::max(0, static_cast<int>(std::ceil((cs[q] - oa) / e - 0.5)));
            const int k1 = std::min(na - 1, static_cast<int>(std::ceil((cs[q + 1] - oa) / e - 0.5)) - 1);
            for (int k = k0; k <= k1; ++k) ++votes[voxel(k, ib, ic)];
          }
        }
      }
    });
  }
  for (std::size_t i = 0; i < votes.size(); ++i) {
    out.occupancy[i] = (votes[i] >= 2 || surface[i]) ? 1 : 0;
  }
  return out;
}

double voxel_iou(const VoxelGrid& a, const VoxelGrid& b) {
  if (!a.same_geometry(b) || a.occupancy.size() != b.occupancy.size()) {
    fail(ErrorCode::Dimension, "voxel grids differ in geometry");
  }
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.occupancy.size(); ++i) {
    const bool x = a.occupancy[i] != 0, y = b.occupancy[i] != 0;
    inter += (x && y);
    uni += (x || y);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace mld
