#include "mld/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mld {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written with native little-endian layout");

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::Io, "read error on '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, "write error on '" + path + "'");
}

namespace {

class Writer {
 public:
  template <class T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    bytes_.append(buf, sizeof(T));
  }
  void raw(const char* s, std::size_t n) { bytes_.append(s, n); }
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  Reader(std::string bytes, std::string path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void magic(const char* m) {
    need(4);
    if (bytes_.compare(pos_, 4, m) != 0) bad(std::string("missing magic ") + m);
    pos_ += 4;
  }
  void finish() const {
    if (pos_ != bytes_.size()) bad("trailing bytes");
  }
  [[noreturn]] void bad(const std::string& what) const {
    fail(ErrorCode::Format, "'" + path_ + "': " + what);
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) bad("truncated file");
  }

  std::string bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_dim(Reader& r, std::uint32_t limit = 1u << 16) {
  const auto v = r.get<std::uint32_t>();
  if (v == 0 || v > limit) r.bad("dimension out of range");
  return v;
}

}  // namespace

void write_mld(const std::string& path, const MultiLayerDepthMap& d, const SemanticLayerMap& s) {
  if (s.width != d.width || s.height != d.height) {
    fail(ErrorCode::Dimension, "semantic layers do not match the depth map");
  }
  Writer w;
  w.raw("MLD1", 4);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(d.width));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(d.height));
  w.put<std::uint32_t>(kLayerCount);
  for (const auto& layer : d.layers) {
    for (double v : layer.data()) w.put<float>(static_cast<float>(v));
  }
  for (auto v : d.object_mask.data()) w.put<std::uint8_t>(v);
  for (auto v : d.occluded_mask.data()) w.put<std::uint8_t>(v);
  for (auto v : s.sem1.data()) w.put<std::uint16_t>(v);
  for (auto v : s.sem3.data()) w.put<std::uint16_t>(v);
  write_file(path, w.bytes());
}

std::pair<MultiLayerDepthMap, SemanticLayerMap> read_mld(const std::string& path) {
  Reader r(read_file(path), path);
  r.magic("MLD1");
  const auto width = static_cast<int>(checked_dim(r));
  const auto height = static_cast<int>(checked_dim(r));
  if (r.get<std::uint32_t>() != kLayerCount) r.bad("expected 5 layers");
  MultiLayerDepthMap d(width, height);
  SemanticLayerMap s(width, height);
  for (auto& layer : d.layers) {
    for (double& v : layer.data()) v = static_cast<double>(r.get<float>());
  }
  for (auto& v : d.object_mask.data()) v = r.get<std::uint8_t>();
  for (auto& v : d.occluded_mask.data()) v = r.get<std::uint8_t>();
  for (auto& v : s.sem1.data()) v = r.get<std::uint16_t>();
  for (auto& v : s.sem3.data()) v = r.get<std::uint16_t>();
  r.finish();
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      d.envelope_mask(x, y) = std::isfinite(d.layer(5)(x, y)) ? 1 : 0;
    }
  }
  return {std::move(d), std::move(s)};
}

void write_pfm(const std::string& path, const DepthRaster& raster) {
  Writer w;
  const std::string header = "Pf\n" + std::to_string(raster.width()) + " " +
                             std::to_string(raster.height()) + "\n-1.0\n";
  w.raw(header.data(), header.size());
  for (int y = raster.height() - 1; y >= 0; --y) {
    for (int x = 0; x < raster.width(); ++x) w.put<float>(static_cast<float>(raster(x, y)));
  }
  write_file(path, w.bytes());
}

DepthRaster read_pfm(const std::string& path) {
  const std::string bytes = read_file(path);
  std::istringstream hs(bytes);
  std::string magic;
  long long width = 0, height = 0;
  double scale = 0.0;
  if (!(hs >> magic >> width >> height >> scale) || magic != "Pf") {
    fail(ErrorCode::Format, "'" + path + "': not a grayscale PFM");
  }
  if (scale >= 0.0) fail(ErrorCode::Format, "'" + path + "': big-endian PFM is not supported");
  if (width <= 0 || height <= 0 || width > (1 << 16) || height > (1 << 16)) {
    fail(ErrorCode::Format, "'" + path + "': dimension out of range");
  }
  hs.get();  // single whitespace after the scale
  const auto offset = static_cast<std::size_t>(hs.tellg());
  Reader r(bytes.substr(offset), path);
  DepthRaster out(static_cast<int>(width), static_cast<int>(height), 0.0);
  for (int y = out.height() - 1; y >= 0; --y) {
    for (int x = 0; x < out.width(); ++x) out(x, y) = static_cast<double>(r.get<float>());
  }
  r.finish();
  return out;
}

void write_feature_map(const std::string& path, const FeatureMap& m) {
  Writer w;
  w.raw("FMP1", 4);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.width));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.height));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.channels));
  for (int c = 0; c < m.channels; ++c) {
    for (int y = 0; y < m.height; ++y) {
      for (int x = 0; x < m.width; ++x) w.put<float>(static_cast<float>(m.at(x, y, c)));
    }
  }
  for (auto v : m.valid.data()) w.put<std::uint8_t>(v);
  write_file(path, w.bytes());
}

FeatureMap read_feature_map(const std::string& path) {
  Reader r(read_file(path), path);
  r.magic("FMP1");
  const auto width = static_cast<int>(checked_dim(r));
  const auto height = static_cast<int>(checked_dim(r));
  const auto channels = static_cast<int>(checked_dim(r, 4096));
  FeatureMap m(width, height, channels, 0.0, 0);
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) m.at(x, y, c) = static_cast<double>(r.get<float>());
    }
  }
  for (auto& v : m.valid.data()) v = r.get<std::uint8_t>();
  r.finish();
  return m;
}

void write_voxels(const std::string& path, const VoxelGrid& g) {
  Writer w;
  w.raw("VOX1", 4);
  for (int i = 0; i < 3; ++i) w.put<float>(static_cast<float>(g.origin[i]));
  w.put<float>(static_cast<float>(g.edge));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.nx));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.ny));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.nz));
  std::uint8_t byte = 0;
  std::size_t bit = 0;
  for (auto v : g.occupancy) {
    if (v) byte = static_cast<std::uint8_t>(byte | (1u << bit));
    if (++bit == 8) {
      w.put<std::uint8_t>(byte);
      byte = 0;
      bit = 0;
    }
  }
  if (bit != 0) w.put<std::uint8_t>(byte);
  write_file(path, w.bytes());
}

VoxelGrid read_voxels(const std::string& path) {
  Reader r(read_file(path), path);
  r.magic("VOX1");
  Vec3 origin;
  for (int i = 0; i < 3; ++i) origin[i] = static_cast<double>(r.get<float>());
  const auto edge = static_cast<double>(r.get<float>());
  const auto nx = static_cast<int>(checked_dim(r, 4096));
  const auto ny = static_cast<int>(checked_dim(r, 4096));
  const auto nz = static_cast<int>(checked_dim(r, 4096));
  if (!(edge > 0.0)) r.bad("voxel edge must be positive");
  VoxelGrid g(origin, edge, nx, ny, nz);
  std::uint8_t byte = 0;
  for (std::size_t i = 0; i < g.occupancy.size(); ++i) {
    if (i % 8 == 0) byte = r.get<std::uint8_t>();
    g.occupancy[i] = (byte >> (i % 8)) & 1u;
  }
  r.finish();
  return g;
}

std::string sidecar_path(const std::string& obj_path) {
  const auto slash = obj_path.find_last_of('/');
  const auto dot = obj_path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return obj_path + ".json";
  }
  return obj_path.substr(0, dot) + ".json";
}

void write_obj(const std::string& path, const Scene& scene) {
  std::string text;
  json meta;
  meta["frame"] = scene.frame == Frame::World ? "world" : "camera";
  meta["gravity_axis"] = {scene.gravity_axis.x, scene.gravity_axis.y, scene.gravity_axis.z};
  json groups = json::array();
  std::set<std::string> used;
  std::size_t base = 1;
  char line[128];
  for (const auto& o : scene.objects) {
    std::string name = o.name.empty() ? "object_" + std::to_string(o.instance_id) : o.name;
    for (char& ch : name) {
      if (ch == ' ' || ch == '\t') ch = '_';
    }
    while (used.count(name)) name += "_" + std::to_string(o.instance_id);
    used.insert(name);
    text += "g " + name + "\n";
    for (const auto& v : o.mesh.vertices) {
      std::snprintf(line, sizeof line, "v %.9g %.9g %.9g\n", v.x, v.y, v.z);
      text += line;
    }
    for (const auto& t : o.mesh.triangles) {
      std::snprintf(line, sizeof line, "f %zu %zu %zu\n", base + t[0], base + t[1], base + t[2]);
      text += line;
    }
    base += o.mesh.vertices.size();
    groups.push_back({{"name", name},
                      {"instance_id", o.instance_id},
                      {"category_id", o.category_id},
                      {"is_envelope", o.is_envelope}});
  }
  meta["objects"] = groups;
  write_file(path, text);
  write_file(sidecar_path(path), meta.dump(2) + "\n");
}

Scene read_obj(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<Vec3> vertices;
  struct Group {
    std::string name;
    std::vector<std::array<long long, 3>> faces;
    std::size_t first_vertex = 0;
    std::size_t end_vertex = 0;
  };
  std::vector<Group> groups;
  std::string line;
  std::size_t lineno = 0;
  auto bad = [&](const std::string& what) {
    fail(ErrorCode::Format, "'" + path + "' line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z)) bad("malformed vertex");
      vertices.push_back(v);
      if (!groups.empty()) groups.back().end_vertex = vertices.size();
    } else if (tag == "g" || tag == "o") {
      std::string name;
      ls >> name;
      groups.push_back({name.empty() ? "group_" + std::to_string(groups.size()) : name, {},
                        vertices.size(), vertices.size()});
    } else if (tag == "f") {
      if (groups.empty()) groups.push_back({"default", {}, 0, vertices.size()});
      std::vector<long long> idx;
      std::string tok;
      while (ls >> tok) {
        long long i = 0;
        try {
          i = std::stoll(tok.substr(0, tok.find('/')));
        } catch (const std::exception&) {
          bad("malformed face index");
        }
        if (i < 0) i = static_cast<long long>(vertices.size()) + 1 + i;
        if (i < 1 || i > static_cast<long long>(vertices.size())) bad("face index out of range");
        idx.push_back(i - 1);
      }
      if (idx.size() < 3) bad("face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
        groups.back().faces.push_back({idx[0], idx[k], idx[k + 1]});
      }
    }
  }

  std::map<std::string, json> meta_of;
  Scene scene;
  const std::string side = sidecar_path(path);
  if (std::ifstream(side).good()) {
    json meta;
    try {
      meta = json::parse(read_file(side));
      const std::string frame = meta.at("frame").get<std::string>();
      if (frame != "world" && frame != "camera") bad("unknown frame in sidecar");
      scene.frame = frame == "world" ? Frame::World : Frame::Camera;
      if (meta.contains("gravity_axis")) {
        const auto g = meta.at("gravity_axis").get<std::vector<double>>();
        if (g.size() != 3) bad("gravity_axis needs 3 components");
        scene.gravity_axis = {g[0], g[1], g[2]};
      }
      for (const auto& o : meta.at("objects")) meta_of[o.at("name").get<std::string>()] = o;
    } catch (const json::exception& e) {
      fail(ErrorCode::Format, "'" + side + "': " + e.what());
    }
  }

  int next_id = 1;
  for (const auto& g : groups) {
    SceneObject o;
    o.name = g.name;
    // A group that only references its own vertex block keeps it verbatim.
    bool local = true;
    for (const auto& f : g.faces) {
      for (long long i : f) {
        local = local && i >= static_cast<long long>(g.first_vertex) &&
                i < static_cast<long long>(g.end_vertex);
      }
    }
    std::map<long long, std::uint32_t> remap;
    if (local) {
      o.mesh.vertices.assign(vertices.begin() + static_cast<std::ptrdiff_t>(g.first_vertex),
                             vertices.begin() + static_cast<std::ptrdiff_t>(g.end_vertex));
      for (std::size_t i = g.first_vertex; i < g.end_vertex; ++i) {
        remap[static_cast<long long>(i)] = static_cast<std::uint32_t>(i - g.first_vertex);
      }
    }
    for (const auto& f : g.faces) {
      TriangleIndices t{};
      for (int k = 0; k < 3; ++k) {
        auto it = remap.find(f[k]);
        if (it == remap.end()) {
          it = remap.emplace(f[k], static_cast<std::uint32_t>(o.mesh.vertices.size())).first;
          o.mesh.vertices.push_back(vertices[static_cast<std::size_t>(f[k])]);
        }
        t[k] = it->second;
      }
      o.mesh.triangles.push_back(t);
    }
    auto m = meta_of.find(g.name);
    if (m != meta_of.end()) {
      try {
        o.instance_id = m->second.at("instance_id").get<int>();
        o.category_id = m->second.at("category_id").get<int>();
        o.is_envelope = m->second.at("is_envelope").get<bool>();
      } catch (const json::exception& e) {
        fail(ErrorCode::Format, "'" + side + "': " + e.what());
      }
    } else {
      o.instance_id = next_id;
      o.category_id = 1;
      o.is_envelope = false;
    }
    next_id = std::max(next_id, o.instance_id) + 1;
    scene.objects.push_back(std::move(o));
  }
  return scene;
}

namespace {

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json mat_json(const Mat3& m) { return json(std::vector<double>(m.m.begin(), m.m.end())); }

Vec3 vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw std::invalid_argument("expected 3 components");
  return {v[0], v[1], v[2]};
}

Mat3 mat_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 9) throw std::invalid_argument("expected 9 row-major entries");
  Mat3 m;
  std::copy(v.begin(), v.end(), m.m.begin());
  return m;
}

template <class Fn>
auto parse_json_file(const std::string& path, Fn&& fn) {
  const std::string text = read_file(path);
  try {
    return fn(json::parse(text));
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, "'" + path + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    fail(ErrorCode::Format, "'" + path + "': " + e.what());
  }
}

}  // namespace

void write_camera(const std::string& path, const PerspectiveCamera& c) {
  json j{{"fx", c.fx},
         {"fy", c.fy},
         {"cx", c.cx},
         {"cy", c.cy},
         {"width", c.width},
         {"height", c.height},
         {"rotation", mat_json(c.rotation)},
         {"translation", vec_json(c.translation)},
         {"near", c.near},
         {"tilt_deg", c.tilt_deg}};
  write_file(path, j.dump(2) + "\n");
}

PerspectiveCamera read_camera(const std::string& path) {
  PerspectiveCamera c = parse_json_file(path, [](const json& j) {
    PerspectiveCamera c;
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    c.rotation = mat_from(j.at("rotation"));
    c.translation = vec_from(j.at("translation"));
    c.near = j.at("near").get<double>();
    c.tilt_deg = j.at("tilt_deg").get<double>();
    return c;
  });
  c.validate();
  return c;
}

void write_overhead(const std::string& path, const OrthographicCamera& v) {
  json j{{"radius_sigma", v.radius_sigma},
         {"resolution", v.resolution},
         {"rotation", mat_json(v.rotation)},
         {"translation", vec_json(v.translation)},
         {"theta_deg", v.theta_deg}};
  write_file(path, j.dump(2) + "\n");
}

OrthographicCamera read_overhead(const std::string& path) {
  OrthographicCamera v = parse_json_file(path, [](const json& j) {
    OrthographicCamera v;
    v.radius_sigma = j.at("radius_sigma").get<double>();
    v.resolution = j.at("resolution").get<int>();
    v.rotation = mat_from(j.at("rotation"));
    v.translation = vec_from(j.at("translation"));
    v.theta_deg = j.at("theta_deg").get<double>();
    return v;
  });
  v.validate();
  return v;
}

void write_overhead_params(const std::string& path, const OverheadParams& p) {
  json j{{"t_x", p.t_x},
         {"t_y", p.t_y},
         {"t_z", p.t_z},
         {"theta_deg", p.theta_deg},
         {"radius_sigma", p.radius_sigma}};
  write_file(path, j.dump(2) + "\n");
}

OverheadParams read_overhead_params(const std::string& path) {
  OverheadParams p = parse_json_file(path, [](const json& j) {
    OverheadParams p;
    p.t_x = j.at("t_x").get<double>();
    p.t_y = j.at("t_y").get<double>();
    p.t_z = j.at("t_z").get<double>();
    p.theta_deg = j.at("theta_deg").get<double>();
    p.radius_sigma = j.at("radius_sigma").get<double>();
    return p;
  });
  p.validate();
  return p;
}

}  // namespace mld
