// Copyright 2026 The spr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPR_ENCODER_HPP
#define SPR_ENCODER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "repr.hpp"
#include "skeleton.hpp"

namespace spr {

enum class MapMode { vanilla, hierarchical };

std::string map_mode_name(MapMode mode);
MapMode map_mode_from_name(const std::string& name);  // throws Error(data)

struct EncoderConfig {
  double sigma = 7.0;  // Gaussian spread, in map cells
  double tau = 7.0;    // neighborhood size, in map cells
  // The neighborhood test is squared_distance <= tau by default, matching
  // the construction formula literally. With tau_as_radius the test becomes
  // distance <= tau.
  bool tau_as_radius = false;
  int stride = 1;  // input pixels per map cell
  // Map dims in cells; 0 means "derive from the scene" (ceil(image/stride)).
  int map_height = 0;
  int map_width = 0;
  // Depth normalizer for the auxiliary root-depth channel (3D only).
  double depth_norm = 10000.0;
};

// Throws Error(data) on an invalid configuration.
void validate_config(const EncoderConfig& cfg);

struct ConfidenceMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;  // row-major [height][width]

  double at(int y, int x) const { return values[size_t(y) * width + x]; }
  double& at(int y, int x) { return values[size_t(y) * width + x]; }
};

// Dense displacement targets. values holds, per joint channel, d planes of
// normalized components; contributors counts how many persons wrote into a
// cell (the defined mask is contributors > 0, and a zero vector still
// counts). For 3D stacks an auxiliary root-depth plane carries z_root /
// depth_norm inside root neighborhoods, with its own contributor counts.
struct DisplacementMapStack {
  int height = 0;
  int width = 0;
  int dim = 2;
  int k = 0;
  MapMode mode = MapMode::vanilla;
  std::vector<double> values;          // [k][dim][height][width]
  std::vector<uint16_t> contributors;  // [k][height][width]

  bool has_root_depth = false;
  double depth_norm = 10000.0;
  std::vector<double> root_depth;        // [height][width], empty in 2D
  std::vector<uint16_t> depth_contrib;   // [height][width], empty in 2D

  // Geometry the maps were built from, needed to invert the encoding.
  int image_height = 0;
  int image_width = 0;
  int stride = 1;

  size_t plane() const { return size_t(height) * width; }
  size_t value_index(int j, int c, int y, int x) const {
    return ((size_t(j) * dim + c) * height + y) * width + x;
  }
  double value(int j, int c, int y, int x) const {
    return values[value_index(j, c, y, x)];
  }
  uint16_t contrib(int j, int y, int x) const {
    return contributors[(size_t(j) * height + y) * width + x];
  }
  bool defined(int j, int y, int x) const { return contrib(j, y, x) > 0; }
  bool depth_defined(int y, int x) const {
    return has_root_depth && depth_contrib[size_t(y) * width + x] > 0;
  }
};

// Z = sqrt(H^2 + W^2) in input pixels. Throws Error(data) on non-positive
// dims.
double normalization_factor(int image_height, int image_width);

// Per-cell maximum over persons of exp(-||cell - root||^2 / sigma^2),
// planar components only. Roots are in input pixels; the grid lives at
// cfg.stride pixels per cell. An empty scene yields an all-zero map.
ConfidenceMap encode_root_confidence(const Scene& scene,
                                     const std::vector<Vec>& roots,
                                     const EncoderConfig& cfg);

// Root-anchored displacement targets: inside each person's root
// neighborhood, channel j stores (joint_j - cell) / Z averaged over
// contributing persons. Invisible joints contribute nothing.
DisplacementMapStack encode_displacements(
    const Scene& scene, const std::vector<StructuredPose>& structured,
    const EncoderConfig& cfg);

// Same construction with channel j anchored at joint j's adjacent-hierarchy
// parent instead of the root.
DisplacementMapStack encode_hier_displacements(
    const Scene& scene, const std::vector<HierStructuredPose>& hier,
    const EncoderConfig& cfg);

struct EncodedScene {
  ConfidenceMap confidence;
  DisplacementMapStack displacements;
  std::vector<Vec> roots;
};

// Full target construction: centroid roots, confidence map, displacement
// stack in the requested mode, and (for 3D scenes) the root-depth channel.
// Throws Error(data) when a person has no visible joints or the scene does
// not match the skeleton.
EncodedScene encode_scene(const Scene& scene, const SkeletonSpec& spec,
                          MapMode mode, const EncoderConfig& cfg);

}  // namespace spr

#endif  // SPR_ENCODER_HPP
