#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>

#include "mld/epipolar.hpp"
#include "mld/overhead.hpp"
#include "mld/ray_layers.hpp"
#include "mld/synth.hpp"
#include "test_support.hpp"

using namespace mld;

namespace {

PerspectiveCamera tilted(int w, int h) {
  return PerspectiveCamera::looking(w, h, 60.0, {0, 1.5, 0}, 11.0);
}

OrthographicCamera overhead_for(const PerspectiveCamera& cam, double sigma, int res,
                                double forward = 3.0) {
  // Centered over the ground point `forward` meters ahead of the camera.
  OverheadParams p;
  p.theta_deg = overhead_theta(cam);
  const Vec3 g = cam.gravity_down();
  const Vec3 ahead = normalized(Vec3{0, 0, 1} - g * dot(Vec3{0, 0, 1}, g)) * forward;
  const Vec3 t = -(overhead_rotation(p.theta_deg) * ahead);
  p.t_x = t.x;
  p.t_y = t.y;
  p.t_z = t.z;
  p.radius_sigma = sigma;
  return make_overhead_camera(p, res);
}

FeatureMap random_features(Rng& rng, int w, int h, int c, double invalid = 0.1) {
  FeatureMap f(w, h, c);
  for (auto& v : f.data) v = rng.uniform(-1, 1);
  for (auto& m : f.valid.data()) m = rng.uniform() < invalid ? 0 : 1;
  return f;
}

const GatingKind kAllKinds[] = {GatingKind::SurfaceAll, GatingKind::Volume12,
                                GatingKind::Volume34, GatingKind::Constant,
                                GatingKind::BestGuessHeight};

}  // namespace

TEST_CASE("gating names") {
  for (GatingKind k : kAllKinds) CHECK(parse_gating(to_string(k)) == k);
  CHECK_THROWS_AS(parse_gating("learned"), Error);
  CHECK(parse_camera_param("sigma") == CameraParam::Sigma);
  CHECK_THROWS_AS(parse_camera_param("theta"), Error);
}

TEST_CASE("forward_map") {
  SUBCASE("identity chain") {
    PerspectiveCamera cam = test::pinhole(4, 4, 1.0);
    cam.cx = cam.cy = 0.0;
    OrthographicCamera v;
    v.radius_sigma = 1.0;
    v.resolution = 2;  // k = 1, offset 1
    const auto uv = forward_map(cam, v, 0.5, -0.25, 2.0);
    CHECK(uv[0] == doctest::Approx(1.0 + 1.0));
    CHECK(uv[1] == doctest::Approx(-0.5 + 1.0));
  }
  SUBCASE("z = 0 collapses to the translation image") {
    const auto cam = tilted(16, 16);
    const auto v = overhead_for(cam, 3.0, 32);
    const auto expect = v.image_of(v.translation);
    for (double s : {0.0, 7.5, 16.0}) {
      const auto uv = forward_map(cam, v, s, 3.0, 0.0);
      CHECK(uv[0] == expect[0]);
      CHECK(uv[1] == expect[1]);
    }
  }
  SUBCASE("random configurations against matrix arithmetic") {
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
      PerspectiveCamera cam = test::pinhole(64, 48, rng.uniform(20, 80));
      cam.cx = rng.uniform(10, 50);
      cam.cy = rng.uniform(10, 40);
      cam.fy = rng.uniform(20, 80);
      OrthographicCamera v;
      v.theta_deg = rng.uniform(1, 89);
      v.rotation = overhead_rotation(v.theta_deg);
      v.translation = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
      v.radius_sigma = rng.uniform(0.5, 5);
      v.resolution = rng.uniform_int(8, 256);
      const double s = rng.uniform(0, 64), t = rng.uniform(0, 48), z = rng.uniform(0.1, 9);
      // K_V (R z K_I^-1 [s t 1] + t), written out with explicit matrices.
      const double kinv[3][3] = {{1 / cam.fx, 0, -cam.cx / cam.fx},
                                 {0, 1 / cam.fy, -cam.cy / cam.fy},
                                 {0, 0, 1}};
      double p[3], q[3];
      for (int r = 0; r < 3; ++r) p[r] = z * (kinv[r][0] * s + kinv[r][1] * t + kinv[r][2]);
      for (int r = 0; r < 3; ++r) {
        q[r] = v.rotation(r, 0) * p[0] + v.rotation(r, 1) * p[1] + v.rotation(r, 2) * p[2] +
               v.translation[r];
      }
      const double k = v.resolution / (2 * v.radius_sigma);
      const auto uv = forward_map(cam, v, s, t, z);
      CHECK(std::fabs(uv[0] - (k * q[0] + 0.5 * v.resolution)) < 1e-12 * (1 + std::fabs(uv[0])));
      CHECK(std::fabs(uv[1] - (k * q[1] + 0.5 * v.resolution)) < 1e-12 * (1 + std::fabs(uv[1])));
    }
  }
}

TEST_CASE("transfer equals the naive triple-loop oracle bit for bit") {
  Rng rng(100);
  for (int trial = 0; trial < 12; ++trial) {
    const int w = trial % 3 == 0 ? 32 : 16;
    const auto cam = tilted(w, w);
    const auto vcam = overhead_for(cam, rng.uniform(1.5, 4.0), rng.uniform_int(12, 40));
    const auto depths = test::random_depths(rng, w, w);
    const auto f = random_features(rng, w, w, 4);
    for (GatingKind kind : kAllKinds) {
      GatingSpec g;
      g.kind = kind;
      if (kind == GatingKind::Constant) g.z_max = 6.0;
      for (bool infill : {false, true}) {
        TransferOptions opts;
        opts.infill = infill;
        opts.threads = 1 + trial % 4;
        const FeatureMap fast = transfer_features(f, g, depths, cam, vcam, opts);
        const FeatureMap slow = test::naive_transfer(f, g, depths, cam, vcam, infill);
        CHECK_MESSAGE(fast == slow, "gating " << to_string(kind) << " infill " << infill);
      }
    }
  }
}

TEST_CASE("transfer properties") {
  Rng rng(7);
  const auto cam = tilted(24, 24);
  const auto vcam = overhead_for(cam, 3.0, 32);
  const auto depths = test::random_depths(rng, 24, 24);
  const auto f = random_features(rng, 24, 24, 3);

  for (GatingKind kind : kAllKinds) {
    GatingSpec g;
    g.kind = kind;
    CAPTURE(to_string(kind));

    {  // channel permutation
      FeatureMap perm = f;
      for (int y = 0; y < 24; ++y) {
        for (int x = 0; x < 24; ++x) {
          perm.at(x, y, 0) = f.at(x, y, 2);
          perm.at(x, y, 1) = f.at(x, y, 0);
          perm.at(x, y, 2) = f.at(x, y, 1);
        }
      }
      const auto a = transfer_features(f, g, depths, cam, vcam);
      const auto b = transfer_features(perm, g, depths, cam, vcam);
      CHECK(a.valid == b.valid);
      bool same = true;
      for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
          same = same && b.at(x, y, 0) == a.at(x, y, 2) && b.at(x, y, 1) == a.at(x, y, 0) &&
                 b.at(x, y, 2) == a.at(x, y, 1);
        }
      }
      CHECK(same);
    }

    {  // linearity
      const auto f2 = [&] {
        FeatureMap m = random_features(rng, 24, 24, 3);
        m.valid = f.valid;
        return m;
      }();
      FeatureMap mix = f;
      for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = 2.5 * f.data[i] - 0.75 * f2.data[i];
      const auto a = transfer_features(f, g, depths, cam, vcam);
      const auto b = transfer_features(f2, g, depths, cam, vcam);
      const auto m = transfer_features(mix, g, depths, cam, vcam);
      double worst = 0.0;
      for (std::size_t i = 0; i < m.data.size(); ++i) {
        worst = std::max(worst, std::fabs(m.data[i] - (2.5 * a.data[i] - 0.75 * b.data[i])));
      }
      CHECK(worst < 1e-12);
    }

    {  // constant preservation
      for (double c : {2.0, 0.1}) {
        FeatureMap k(24, 24, 1, c);
        const auto out = transfer_features(k, g, depths, cam, vcam);
        for (int y = 0; y < 32; ++y) {
          for (int x = 0; x < 32; ++x) {
            if (!out.valid(x, y)) continue;
            // Powers of two survive the weighted mean exactly.
            if (c == 2.0) {
              CHECK(out.at(x, y, 0) == c);
            } else {
              CHECK(std::fabs(out.at(x, y, 0) - c) < 1e-12);
            }
          }
        }
      }
    }

    {  // support inside the frustum mask
      TransferOptions opts;
      opts.infill = false;
      const auto out = transfer_features(f, g, depths, cam, vcam, opts);
      const auto mask = frustum_mask(cam, vcam, default_z_max(depths));
      for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
          if (out.valid(x, y)) CHECK(mask.at(x, y, 0) == 1.0);
          if (!out.valid(x, y)) CHECK(out.at(x, y, 0) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("constant gating with a single depth is indicator transport") {
  const auto cam = tilted(20, 20);
  const auto vcam = overhead_for(cam, 2.5, 24);
  MultiLayerDepthMap d(20, 20);
  for (auto& v : d.layer(1).data()) v = 3.0;
  for (auto& v : d.layer(2).data()) v = 3.0;
  d.rebuild_masks();
  GatingSpec g;
  g.kind = GatingKind::Constant;
  g.z_min = 3.0;
  g.z_max = 3.0;
  TransferOptions opts;
  opts.infill = false;
  const auto out = transfer_features(FeatureMap(20, 20, 1, 1.0), g, d, cam, vcam, opts);
  int covered = 0;
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < 24; ++x) {
      CHECK(out.at(x, y, 0) == (out.valid(x, y) ? 1.0 : 0.0));
      covered += out.valid(x, y);
    }
  }
  CHECK(covered > 0);
  CHECK(covered < 24 * 24);
}

TEST_CASE("volume gating spreads a cube pixel between its front and back") {
  const auto cam = tilted(48, 48);
  const Scene world = [] {
    Scene s;
    s.objects.push_back(test::box_object({-0.3, 0.0, -3.3}, {0.3, 0.6, -2.7}, 6));
    return s;
  }();
  const auto view = test::prepare_view(world, cam);
  const auto depths = trace_layers(view.scene, cam).depths;
  const auto vcam = overhead_for(cam, 2.0, 64);
  GatingSpec g;
  g.kind = GatingKind::Volume12;
  TransferOptions opts;
  opts.infill = false;
  const auto out = transfer_features(FeatureMap(48, 48, 1, 1.0), g, depths, cam, vcam, opts);

  // Cube footprint in overhead cells, padded by the splat reach.
  double umin = 1e9, umax = -1e9, vmin = 1e9, vmax = -1e9;
  for (const auto& p : view.scene.objects[0].mesh.vertices) {
    const auto uv = vcam.image_of(vcam.to_virtual(p));
    umin = std::min(umin, uv[0]);
    umax = std::max(umax, uv[0]);
    vmin = std::min(vmin, uv[1]);
    vmax = std::max(vmax, uv[1]);
  }
  int inside = 0;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (!out.valid(x, y)) continue;
      CHECK(x + 0.5 >= umin - 1.0);
      CHECK(x + 0.5 <= umax + 1.0);
      CHECK(y + 0.5 >= vmin - 1.0);
      CHECK(y + 0.5 <= vmax + 1.0);
      ++inside;
    }
  }
  // The cube spans several cells along the viewing direction.
  CHECK(inside > 0.5 * (umax - umin) * (vmax - vmin));
}

TEST_CASE("gating_surface") {
  const auto cam = tilted(16, 16);
  const auto vcam = overhead_for(cam, 4.0, 8);

  SUBCASE("lone pixel survives") {
    MultiLayerDepthMap d(16, 16);
    d.layer(1)(5, 9) = 3.0;
    d.layer(2)(5, 9) = 3.2;
    d.rebuild_masks();
    const auto g = gating_surface(d, cam, vcam, 5, 9, 1);
    REQUIRE(g.size() == 1);
    CHECK(g[0].z == 3.0);
    CHECK(g[0].weight == 1.0);
    CHECK(gating_surface(d, cam, vcam, 5, 2, 1).empty());
  }

  SUBCASE("tall surface hides the floor pixel in the same cell") {
    // Floor point on the center column, and a point 1 m above it seen higher up
    // the same column.
    const int col = 8, floor_row = 13;
    const Vec3 floor_pt = [&] {
      const Vec3 dir = cam.ray(col + 0.5, floor_row + 0.5);
      // Solve height_of(dir * z) = 0: height is affine in z.
      const double h0 = cam.height_of(Vec3{}), h1 = cam.height_of(dir);
      return dir * (h0 / (h0 - h1));
    }();
    const Vec3 up = -cam.gravity_down();
    const auto top_st = cam.project(floor_pt + up * 0.8);
    const int top_row = static_cast<int>(std::floor(top_st[1]));
    REQUIRE(top_row < floor_row);
    const double top_z = (floor_pt + up * 0.8).z;

    MultiLayerDepthMap d(16, 16);
    d.layer(1)(col, floor_row) = floor_pt.z;
    d.layer(2)(col, floor_row) = floor_pt.z;
    d.layer(1)(col, top_row) = top_z;
    d.layer(2)(col, top_row) = top_z;
    d.rebuild_masks();
    const auto a = forward_map(cam, vcam, col + 0.5, floor_row + 0.5, floor_pt.z);
    const auto b = forward_map(cam, vcam, col + 0.5, top_row + 0.5, top_z);
    REQUIRE(std::floor(a[0]) == std::floor(b[0]));
    REQUIRE(std::floor(a[1]) == std::floor(b[1]));
    CHECK(gating_surface(d, cam, vcam, col, floor_row, 1)[0].weight == 0.0);
    CHECK(gating_surface(d, cam, vcam, col, top_row, 1)[0].weight == 1.0);
  }

  SUBCASE("SurfaceAll is the max over per-layer gates") {
    Rng rng(4);
    const auto d = test::random_depths(rng, 16, 16);
    GatingSpec all;
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        std::set<double> expect;
        for (int l = 1; l <= 4; ++l) {
          for (const auto& s : gating_surface(d, cam, vcam, x, y, l)) {
            if (s.weight > 0.0) expect.insert(s.z);
          }
        }
        std::set<double> got;
        for (const auto& s : gate_samples(all, d, cam, vcam, x, y)) {
          CHECK(s.weight == 1.0);
          got.insert(s.z);
        }
        CHECK(got == expect);
      }
    }
  }

  SUBCASE("exactly one survivor per overhead cell and column") {
    Rng rng(6);
    const auto d = test::random_depths(rng, 16, 16);
    for (int x = 0; x < 16; ++x) {
      std::map<std::pair<double, double>, int> survivors;
      for (int y = 0; y < 16; ++y) {
        const auto g = gating_surface(d, cam, vcam, x, y, 1);
        if (g.empty()) continue;
        const auto uv = forward_map(cam, vcam, x + 0.5, y + 0.5, g[0].z);
        auto& n = survivors[{std::floor(uv[0]), std::floor(uv[1])}];
        n += g[0].weight == 1.0;
      }
      for (const auto& [cell, n] : survivors) CHECK(n == 1);
    }
  }

  SUBCASE("theta of 90 degrees is unsupported") {
    OrthographicCamera v = vcam;
    v.theta_deg = 90.0;
    MultiLayerDepthMap d(16, 16);
    try {
      gating_surface(d, cam, v, 0, 0, 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Unsupported);
    }
  }
}

TEST_CASE("frustum mask") {
  const auto cam = tilted(32, 24);
  const auto vcam = overhead_for(cam, 6.0, 48, 4.0);
  const double zmax = 8.0;
  const auto mask = frustum_mask(cam, vcam, zmax);

  // Oracle: splat targets of a dense sampling of the frustum volume.
  std::vector<std::uint8_t> hit(48 * 48, 0);
  const int n = 60;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      for (int k = 0; k <= 4 * n; ++k) {
        const double s = 32.0 * i / n, t = 24.0 * j / n;
        const double z = cam.near + (zmax - cam.near) * k / (4.0 * n);
        const auto uv = forward_map(cam, vcam, s, t, z);
        const double bu = std::floor(uv[0] - 0.5), bv = std::floor(uv[1] - 0.5);
        for (int q = 0; q < 4; ++q) {
          const int cx = static_cast<int>(bu) + (q & 1), cy = static_cast<int>(bv) + (q >> 1);
          if (cx >= 0 && cy >= 0 && cx < 48 && cy < 48) hit[static_cast<std::size_t>(cy * 48 + cx)] = 1;
        }
      }
    }
  }
  int ones = 0;
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 48; ++x) {
      const bool m = mask.at(x, y, 0) == 1.0;
      ones += m;
      if (hit[static_cast<std::size_t>(y * 48 + x)]) CHECK(m);
      if (!m) continue;
      bool near_hit = false;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx >= 0 && yy >= 0 && xx < 48 && yy < 48 && hit[static_cast<std::size_t>(yy * 48 + xx)]) near_hit = true;
        }
      }
      CHECK(near_hit);
    }
  }
  CHECK(ones > 100);
  CHECK(ones < 48 * 48);

  OrthographicCamera away = vcam;
  away.translation.x += 100.0;
  const auto none = frustum_mask(cam, away, zmax);
  for (double v : none.data) CHECK(v == 0.0);
}

TEST_CASE("best-guess height") {
  const auto cam = tilted(64, 64);
  const auto vcam = overhead_for(cam, 2.5, 48);
  auto traced = [&](const Scene& world) {
    const auto view = test::prepare_view(world, cam);
    return trace_layers(view.scene, cam).depths;
  };
  Scene floor_only;
  {
    SceneObject f;
    f.mesh.vertices = {{-6, 0, 0}, {6, 0, 0}, {6, 0, -10}, {-6, 0, -10}};
    f.mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
    f.instance_id = 6;
    floor_only.objects.push_back(f);
  }
  SUBCASE("flat floor") {
    const auto h = best_guess_height(traced(floor_only), cam, vcam);
    int n = 0;
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 48; ++x) {
        if (!h.valid(x, y)) {
          CHECK(std::isnan(h.at(x, y, 0)));
          continue;
        }
        CHECK(std::fabs(h.at(x, y, 0)) < 1e-9);
        ++n;
      }
    }
    CHECK(n > 200);
  }
  SUBCASE("one meter box") {
    Scene s = floor_only;
    s.objects.push_back(test::box_object({-0.4, 0.0, -3.4}, {0.4, 1.0, -2.6}, 7));
    const auto depths = traced(s);
    const auto h = best_guess_height(depths, cam, vcam);
    // Cells whose center lies well inside the box footprint read the top.
    int top = 0;
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 48; ++x) {
        if (!h.valid(x, y)) continue;
        const Vec3 c = vcam.from_virtual({(x + 0.5 - 24) / vcam.scale(), (y + 0.5 - 24) / vcam.scale(), 0.0});
        const Vec3 w = cam.to_world(c);
        const bool in_box = std::fabs(w.x) < 0.3 && std::fabs(w.z + 3.0) < 0.3;
        const bool clear = std::fabs(w.x) > 0.6 || std::fabs(w.z + 3.0) > 0.6;
        if (in_box) {
          CHECK(h.at(x, y, 0) == doctest::Approx(1.0).epsilon(1e-6));
          ++top;
        } else if (clear && w.z > -2.4) {
          CHECK(std::fabs(h.at(x, y, 0)) < 1e-6);
        }
      }
    }
    CHECK(top > 10);

    // Literal unnormalized gating with F = height: same picture on flat regions.
    FeatureMap f(64, 64, 1, 0.0);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        const double z = depths.layer(1)(x, y);
        if (std::isfinite(z)) f.at(x, y, 0) = cam.height_of(cam.unproject(x + 0.5, y + 0.5, z));
      }
    }
    GatingSpec g;
    g.kind = GatingKind::BestGuessHeight;
    TransferOptions opts;
    opts.infill = false;
    const auto lit = transfer_features(f, g, depths, cam, vcam, opts);
    std::vector<double> diffs;
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 48; ++x) {
        if (h.valid(x, y) && lit.valid(x, y)) diffs.push_back(std::fabs(h.at(x, y, 0) - lit.at(x, y, 0)));
      }
    }
    REQUIRE(diffs.size() > 100);
    std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
    CHECK(diffs[diffs.size() / 2] < 0.02);
  }
}

namespace {

struct FdSetup {
  PerspectiveCamera cam;
  OrthographicCamera vcam;
  MultiLayerDepthMap depths;
  FeatureMap f;
};

FdSetup fd_setup(std::uint64_t seed, bool constant) {
  Rng rng(seed);
  FdSetup s{tilted(8, 8), {}, {}, FeatureMap(8, 8, 2)};
  s.vcam = overhead_for(s.cam, rng.uniform(3.0, 5.0), 16);
  s.depths = test::random_depths(rng, 8, 8);
  const double a = rng.uniform(0.1, 0.5), b = rng.uniform(0.1, 0.5);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      s.f.at(x, y, 0) = constant ? 1.5 : std::sin(a * x) + std::cos(b * y);
      s.f.at(x, y, 1) = constant ? 1.5 : 0.1 * x * y - 0.3 * y;
    }
  }
  return s;
}

// First configuration from seed upward where no sample crosses a cell boundary.
template <class Fn>
void with_nondegenerate(std::uint64_t seed, Fn&& fn) {
  for (std::uint64_t k = seed; k < seed + 200; ++k) {
    try {
      fn(k);
      return;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Degenerate) throw;
    }
  }
  FAIL("no non-degenerate configuration found");
}

}  // namespace

TEST_CASE("finite-difference check") {
  GatingSpec surface;
  GatingSpec constant;
  constant.kind = GatingKind::Constant;
  constant.z_max = 5.0;
  constant.z_step = 0.25;  // below the smallest footprint 2 * 3 / 16

  SUBCASE("constant field has zero derivative") {
    with_nondegenerate(1, [&](std::uint64_t k) {
      const auto s = fd_setup(k, true);
      std::vector<double> err;
      for (CameraParam p : {CameraParam::TranslationX, CameraParam::TranslationY, CameraParam::Sigma}) {
        err.push_back(finite_diff_check(s.f, constant, s.depths, s.cam, s.vcam, p, 1e-5, 1e-3));
      }
      for (double e : err) CHECK(e < 1e-3);
    });
  }
  SUBCASE("smooth field, relative error below 1e-3") {
    int done = 0;
    for (std::uint64_t base : {10u, 400u, 800u}) {
      with_nondegenerate(base, [&](std::uint64_t k) {
        const auto s = fd_setup(k, false);
        std::vector<double> err;
        for (CameraParam p : {CameraParam::TranslationX, CameraParam::TranslationY, CameraParam::Sigma}) {
          err.push_back(finite_diff_check(s.f, surface, s.depths, s.cam, s.vcam, p, 1e-4, 1e-3));
        }
        for (double e : err) CHECK(e < 1e-3);
        ++done;
      });
    }
    CHECK(done == 3);
  }
  SUBCASE("error shrinks with the step") {
    with_nondegenerate(900, [&](std::uint64_t k) {
      const auto s = fd_setup(k, false);
      const double coarse = finite_diff_check(s.f, surface, s.depths, s.cam, s.vcam,
                                              CameraParam::Sigma, 1e-3, 1e-3);
      const double fine = finite_diff_check(s.f, surface, s.depths, s.cam, s.vcam,
                                            CameraParam::Sigma, 1e-4, 1e-3);
      CHECK(fine <= coarse);
    });
  }
  SUBCASE("invalid step") {
    const auto s = fd_setup(1, false);
    CHECK_THROWS_AS(finite_diff_check(s.f, surface, s.depths, s.cam, s.vcam,
                                      CameraParam::TranslationX, 0.0),
                    Error);
  }
}
