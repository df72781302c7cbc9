#pragma once

#include <string>
#include <utility>

#include "mld/camera.hpp"
#include "mld/epipolar.hpp"
#include "mld/metrics.hpp"
#include "mld/overhead.hpp"
#include "mld/ray_layers.hpp"
#include "mld/scene.hpp"

namespace mld {

// All binary formats are little-endian. Open failures raise Io, malformed
// content raises Format.

// "MLD1", u32 width, height, layer count (5), five f32 depth planes (NaN where
// unsupported), u8 planes M1 and M3, u16 semantic planes for layers 1 and 3.
void write_mld(const std::string& path, const MultiLayerDepthMap& depths,
               const SemanticLayerMap& semantics);
std::pair<MultiLayerDepthMap, SemanticLayerMap> read_mld(const std::string& path);

// Portable float map, grayscale ("Pf"), scale -1 (little-endian), rows stored
// bottom to top.
void write_pfm(const std::string& path, const DepthRaster& raster);
DepthRaster read_pfm(const std::string& path);

// "FMP1", u32 width, height, channels, f32 planes (one per channel), u8 validity.
void write_feature_map(const std::string& path, const FeatureMap& map);
FeatureMap read_feature_map(const std::string& path);

// "VOX1", f32 origin[3], f32 edge, u32 resolution[3], occupancy bits packed
// LSB first in x-fastest order.
void write_voxels(const std::string& path, const VoxelGrid& grid);
VoxelGrid read_voxels(const std::string& path);

// Wavefront OBJ with one "g" group per object and a JSON sidecar (same path,
// extension .json) holding the frame and per-group ids and flags.
void write_obj(const std::string& path, const Scene& scene);
Scene read_obj(const std::string& path);
std::string sidecar_path(const std::string& obj_path);

void write_camera(const std::string& path, const PerspectiveCamera& cam);
PerspectiveCamera read_camera(const std::string& path);
void write_overhead(const std::string& path, const OrthographicCamera& vcam);
OrthographicCamera read_overhead(const std::string& path);
void write_overhead_params(const std::string& path, const OverheadParams& params);
OverheadParams read_overhead_params(const std::string& path);

// Whole file as bytes; Io on failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace mld
