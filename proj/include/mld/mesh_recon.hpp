#pragma once

#include <vector>

#include "mld/camera.hpp"
#include "mld/epipolar.hpp"
#include "mld/ray_layers.hpp"
#include "mld/scene.hpp"

namespace mld {

inline constexpr double kEdgeFactor = 7.0;
inline constexpr double kFloorCutoff = 0.05;

// Camera-frame mesh of one depth layer. Each supported pixel center becomes a
// vertex; every 2x2 block is split along the diagonal with the smaller depth
// difference and a triangle is kept only if each edge satisfies
// |dz| <= a * z_near * max(1/fx, 1/fy), z_near being the nearer endpoint.
// Triangles face the camera.
SceneObject depth_layer_to_mesh(const DepthRaster& layer, const MaskRaster& mask,
                                const PerspectiveCamera& cam, double a = kEdgeFactor);

// Camera-frame mesh of an overhead height map: cells with height above
// floor_cutoff become vertices at their height, triangulated like a depth
// layer with the overhead footprint as the edge scale. camera_height is the
// input camera's height above the floor.
SceneObject heightmap_to_mesh(const FeatureMap& height, const OrthographicCamera& vcam,
                              double camera_height, double floor_cutoff = kFloorCutoff,
                              double a = kEdgeFactor);

struct AssembleOptions {
  double a = kEdgeFactor;
  double floor_cutoff = kFloorCutoff;
  bool include_envelope = true;
};

// Meshes of D1..D5 (named "D1".."D5") and, when a height map is given, the
// overhead mesh ("overhead"), all in the camera frame. Empty meshes are
// omitted. D5 is tagged as envelope.
std::vector<SceneObject> assemble_scene_mesh(const MultiLayerDepthMap& depths,
                                             const PerspectiveCamera& cam,
                                             const FeatureMap* height = nullptr,
                                             const OrthographicCamera* vcam = nullptr,
                                             const AssembleOptions& options = {});

}  // namespace mld
