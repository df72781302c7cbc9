#include "mld/synth.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <vector>

namespace mld {

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

int Rng::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
  return lo + static_cast<int>(next_u64() % span);
}

ShapeFamily parse_shape_family(const std::string& name) {
  if (name == "boxes") return ShapeFamily::Boxes;
  if (name == "lshapes") return ShapeFamily::LShapes;
  if (name == "stacked") return ShapeFamily::StackedPairs;
  if (name == "tables") return ShapeFamily::Tables;
  if (name == "mixed") return ShapeFamily::Mixed;
  fail(ErrorCode::InvalidArgument, "unknown shape family '" + name + "'");
}

const char* to_string(ShapeFamily family) {
  switch (family) {
    case ShapeFamily::Boxes: return "boxes";
    case ShapeFamily::LShapes: return "lshapes";
    case ShapeFamily::StackedPairs: return "stacked";
    case ShapeFamily::Tables: return "tables";
    case ShapeFamily::Mixed: return "mixed";
  }
  return "boxes";
}

void SynthSpec::validate() const {
  if (!(room_width > 0.0 && room_depth > 0.0 && room_height > 0.0)) {
    fail(ErrorCode::InvalidArgument, "room extents must be positive");
  }
  if (min_objects < 0 || max_objects < min_objects) {
    fail(ErrorCode::InvalidArgument, "object count range is invalid");
  }
  if (!(min_size > 0.0 && max_size >= min_size && min_height > 0.0 && max_height >= min_height)) {
    fail(ErrorCode::InvalidArgument, "object size ranges are invalid");
  }
  if (!(camera_height > 0.0 && camera_height < room_height)) {
    fail(ErrorCode::InvalidArgument, "camera must stand inside the room");
  }
  if (max_retries < 1) fail(ErrorCode::InvalidArgument, "max_retries must be >= 1");
}

PerspectiveCamera synth_camera(const SynthSpec& spec, int width) {
  const int height = std::max(1, static_cast<int>(std::lround(width / spec.camera_aspect)));
  return PerspectiveCamera::looking(width, height, spec.camera_hfov_deg,
                                    Vec3{0.0, spec.camera_height, 0.0}, spec.camera_tilt_deg);
}

Mesh box_mesh(const Vec3& lo, const Vec3& hi) {
  Mesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back({(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z});
  }
  // Each face as a quad, counter-clockwise seen from outside.
  static constexpr std::array<std::array<std::uint32_t, 4>, 6> faces{{
      {0, 4, 6, 2},  // -x
      {1, 3, 7, 5},  // +x
      {0, 1, 5, 4},  // -y
      {2, 6, 7, 3},  // +y
      {0, 2, 3, 1},  // -z
      {4, 5, 7, 6},  // +z
  }};
  for (const auto& f : faces) {
    m.triangles.push_back({f[0], f[1], f[2]});
    m.triangles.push_back({f[0], f[2], f[3]});
  }
  return m;
}

namespace {

// Axis-aligned rectangle given by four corners, with triangles facing `inward`.
SceneObject envelope_quad(std::string name, int id, const std::array<Vec3, 4>& c,
                          const Vec3& inward) {
  SceneObject o;
  o.name = std::move(name);
  o.instance_id = id;
  o.category_id = 0;
  o.is_envelope = true;
  o.mesh.vertices.assign(c.begin(), c.end());
  const Vec3 n = cross(c[1] - c[0], c[2] - c[0]);
  if (dot(n, inward) > 0.0) {
    o.mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
  } else {
    o.mesh.triangles = {{0, 2, 1}, {0, 3, 2}};
  }
  return o;
}

struct Footprint {
  double cx, cz;  // center
  double hx, hz;  // half extents in the local frame
  double yaw;     // rotation about +y

  std::array<std::array<double, 2>, 4> corners() const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    std::array<std::array<double, 2>, 4> out{};
    const double sx[4] = {-1, 1, 1, -1};
    const double sz[4] = {-1, -1, 1, 1};
    for (int i = 0; i < 4; ++i) {
      const double lx = sx[i] * hx, lz = sz[i] * hz;
      // rotation_y: x' = c x + s z, z' = -s x + c z
      out[i] = {cx + c * lx + s * lz, cz - s * lx + c * lz};
    }
    return out;
  }
};

bool separated_on(const std::array<std::array<double, 2>, 4>& a,
                  const std::array<std::array<double, 2>, 4>& b, double ax, double az,
                  double gap) {
  double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
  for (int i = 0; i < 4; ++i) {
    const double pa = a[i][0] * ax + a[i][1] * az;
    const double pb = b[i][0] * ax + b[i][1] * az;
    amin = std::min(amin, pa);
    amax = std::max(amax, pa);
    bmin = std::min(bmin, pb);
    bmax = std::max(bmax, pb);
  }
  return amax + gap <= bmin || bmax + gap <= amin;
}

bool overlaps(const Footprint& a, const Footprint& b, double gap) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  for (const Footprint* f : {&a, &b}) {
    const double c = std::cos(f->yaw), s = std::sin(f->yaw);
    if (separated_on(ca, cb, c, -s, gap) || separated_on(ca, cb, s, c, gap)) return false;
  }
  return true;
}

class Generator {
 public:
  Generator(std::uint64_t seed, const SynthSpec& spec)
      : spec_(spec), rng_(seed), camera_(synth_camera(spec, 64)) {}

  Scene run() {
    spec_.validate();
    Scene scene;
    scene.frame = Frame::World;
    build_envelope(scene);
    next_id_ = 6;

    if (spec_.tabletop) place(scene, ShapeFamily::Tables, 1);
    const int n = rng_.uniform_int(spec_.min_objects, spec_.max_objects);
    int placed = 0;
    while (placed < n) {
      ShapeFamily kind = spec_.family;
      if (kind == ShapeFamily::Mixed) {
        static constexpr ShapeFamily kinds[] = {ShapeFamily::Boxes, ShapeFamily::LShapes,
                                                ShapeFamily::StackedPairs, ShapeFamily::Tables};
        kind = kinds[rng_.uniform_int(0, 3)];
      }
      placed += place(scene, kind, n - placed);
    }
    return scene;
  }

 private:
  void build_envelope(Scene& s) {
    const double w = 0.5 * spec_.room_width, d = spec_.room_depth, h = spec_.room_height;
    s.objects.push_back(envelope_quad("floor", 1, {{{-w, 0, 0}, {w, 0, 0}, {w, 0, -d}, {-w, 0, -d}}},
                                      {0, 1, 0}));
    s.objects.push_back(envelope_quad("ceiling", 2,
                                      {{{-w, h, 0}, {w, h, 0}, {w, h, -d}, {-w, h, -d}}},
                                      {0, -1, 0}));
    s.objects.push_back(envelope_quad("wall_left", 3,
                                      {{{-w, 0, 0}, {-w, 0, -d}, {-w, h, -d}, {-w, h, 0}}},
                                      {1, 0, 0}));
    s.objects.push_back(envelope_quad("wall_right", 4,
                                      {{{w, 0, 0}, {w, 0, -d}, {w, h, -d}, {w, h, 0}}},
                                      {-1, 0, 0}));
    s.objects.push_back(envelope_quad("wall_back", 5,
                                      {{{-w, 0, -d}, {w, 0, -d}, {w, h, -d}, {-w, h, -d}}},
                                      {0, 0, 1}));
  }

  // Places one shape; returns how many scene objects it produced.
  int place(Scene& scene, ShapeFamily kind, int budget) {
    for (int attempt = 0; attempt < spec_.max_retries; ++attempt) {
      std::vector<SceneObject> made;
      Footprint fp{};
      double top = 0.0;
      propose(kind, budget, made, fp, top);
      if (!fits(fp, top)) continue;
      footprints_.push_back(fp);
      for (auto& o : made) scene.objects.push_back(std::move(o));
      return static_cast<int>(made.size());
    }
    fail(ErrorCode::Generation, std::string("could not place a '") + to_string(kind) +
                                    "' object after " + std::to_string(spec_.max_retries) +
                                    " attempts");
  }

  SceneObject make_object(const std::string& kind, Mesh mesh, const Footprint& fp) {
    const Mat3 rot = rotation_y(fp.yaw);
    for (auto& v : mesh.vertices) v = rot * v + Vec3{fp.cx, 0.0, fp.cz};
    SceneObject o;
    o.instance_id = next_id_++;
    o.name = kind + "_" + std::to_string(o.instance_id);
    o.category_id = rng_.uniform_int(1, 40);
    o.is_envelope = false;
    o.mesh = std::move(mesh);
    return o;
  }

  void propose(ShapeFamily kind, int budget, std::vector<SceneObject>& made, Footprint& fp,
               double& top) {
    const double w = 0.5 * spec_.room_width;
    const double max_h = std::min(spec_.max_height, spec_.room_height - 0.1);
    const double min_h = std::min(spec_.min_height, max_h);
    fp.yaw = rng_.uniform(0.0, 0.5 * kPi);
    if (kind == ShapeFamily::Tables) {
      fp.hx = 0.5 * rng_.uniform(0.8, 1.4);
      fp.hz = 0.5 * rng_.uniform(0.6, 1.0);
    } else {
      fp.hx = 0.5 * rng_.uniform(spec_.min_size, spec_.max_size);
      fp.hz = 0.5 * rng_.uniform(spec_.min_size, spec_.max_size);
    }
    fp.cx = rng_.uniform(-w, w);
    fp.cz = rng_.uniform(-spec_.room_depth, -spec_.front_clearance);

    const int base_id = next_id_;
    switch (kind) {
      case ShapeFamily::Boxes:
      case ShapeFamily::Mixed: {
        top = rng_.uniform(min_h, max_h);
        made.push_back(make_object("box", box_mesh({-fp.hx, 0, -fp.hz}, {fp.hx, top, fp.hz}), fp));
        break;
      }
      case ShapeFamily::LShapes: {
        const double h1 = rng_.uniform(min_h, std::max(min_h, 0.6 * max_h));
        const double h2 = rng_.uniform(0.2, 0.6);
        top = h1 + h2;
        Mesh m = box_mesh({-fp.hx, 0, -fp.hz}, {fp.hx, h1, fp.hz});
        m.append(box_mesh({-fp.hx, h1, -fp.hz}, {0.0, top, fp.hz}));
        made.push_back(make_object("lshape", std::move(m), fp));
        break;
      }
      case ShapeFamily::StackedPairs: {
        const double h1 = rng_.uniform(min_h, std::max(min_h, 0.6 * max_h));
        made.push_back(
            make_object("stack_base", box_mesh({-fp.hx, 0, -fp.hz}, {fp.hx, h1, fp.hz}), fp));
        top = h1;
        if (budget >= 2) {
          const double sx = fp.hx * rng_.uniform(0.5, 0.8);
          const double sz = fp.hz * rng_.uniform(0.5, 0.8);
          const double ox = rng_.uniform(-(fp.hx - sx), fp.hx - sx);
          const double oz = rng_.uniform(-(fp.hz - sz), fp.hz - sz);
          const double h2 = rng_.uniform(0.2, 0.5);
          top = h1 + h2;
          made.push_back(make_object(
              "stack_top", box_mesh({ox - sx, h1, oz - sz}, {ox + sx, top, oz + sz}), fp));
        }
        break;
      }
      case ShapeFamily::Tables: {
        top = rng_.uniform(spec_.camera_height - 0.35, spec_.camera_height - 0.15);
        constexpr double kSlab = 0.04;
        constexpr double kLeg = 0.05;
        constexpr double kInset = 0.03;
        Mesh m = box_mesh({-fp.hx, top - kSlab, -fp.hz}, {fp.hx, top, fp.hz});
        for (int i = 0; i < 4; ++i) {
          const double lx = (i & 1) ? fp.hx - kInset - kLeg : -fp.hx + kInset;
          const double lz = (i & 2) ? fp.hz - kInset - kLeg : -fp.hz + kInset;
          m.append(box_mesh({lx, 0.0, lz}, {lx + kLeg, top - kSlab, lz + kLeg}));
        }
        made.push_back(make_object("table", std::move(m), fp));
        break;
      }
    }
    // Ids are reassigned only when the proposal is accepted.
    if (!fits(fp, top)) next_id_ = base_id;
  }

  bool fits(const Footprint& fp, double top) const {
    const double w = 0.5 * spec_.room_width - spec_.wall_margin;
    const double zmin = -spec_.room_depth + spec_.wall_margin;
    const double zmax = -spec_.front_clearance;
    if (top >= spec_.room_height) return false;
    const auto corners = fp.corners();
    for (const auto& c : corners) {
      if (c[0] < -w || c[0] > w || c[1] < zmin || c[1] > zmax) return false;
    }
    if (!spec_.allow_overlap) {
      for (const auto& other : footprints_) {
        if (overlaps(fp, other, 0.05)) return false;
      }
    }
    if (spec_.keep_in_view) {
      const auto planes = camera_.frustum_planes();
      for (const auto& c : corners) {
        for (double y : {0.0, top}) {
          const Vec3 p = camera_.to_camera(Vec3{c[0], y, c[1]});
          for (const auto& pl : planes) {
            if (pl.signed_distance(p) < 0.0) return false;
          }
        }
      }
    }
    return true;
  }

  SynthSpec spec_;
  Rng rng_;
  PerspectiveCamera camera_;
  std::vector<Footprint> footprints_;
  int next_id_ = 6;
};

}  // namespace

Scene generate_synthetic_scene(std::uint64_t seed, const SynthSpec& spec) {
  return Generator(seed, spec).run();
}

}  // namespace mld
