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

#include "encoder.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace spr {

namespace {

struct CellBox {
  int y0, y1, x0, x1;  // inclusive
};

// Conservative bounding box of the neighborhood; the exact membership test
// runs per cell, so one extra ring costs nothing and removes rounding
// worries at the boundary.
CellBox neighborhood_box(double cy, double cx, double radius, int height,
                         int width) {
  CellBox b;
  b.y0 = std::max(0, static_cast<int>(std::floor(cy - radius)) - 1);
  b.y1 = std::min(height - 1, static_cast<int>(std::ceil(cy + radius)) + 1);
  b.x0 = std::max(0, static_cast<int>(std::floor(cx - radius)) - 1);
  b.x1 = std::min(width - 1, static_cast<int>(std::ceil(cx + radius)) + 1);
  return b;
}

bool in_neighborhood(double d2, const EncoderConfig& cfg) {
  if (cfg.tau_as_radius) return d2 <= cfg.tau * cfg.tau;
  return d2 <= cfg.tau;
}

double neighborhood_radius_cells(const EncoderConfig& cfg) {
  return cfg.tau_as_radius ? cfg.tau : std::sqrt(cfg.tau);
}

int resolved_dim(const EncoderConfig& cfg, int image_extent, int configured) {
  if (configured > 0) return configured;
  return (image_extent + cfg.stride - 1) / cfg.stride;
}

void resolve_map_dims(const Scene& scene, const EncoderConfig& cfg,
                      int& height, int& width) {
  height = resolved_dim(cfg, scene.image_height, cfg.map_height);
  width = resolved_dim(cfg, scene.image_width, cfg.map_width);
  if (height < 1 || width < 1) {
    throw Error::data("encoder: resolved map dims must be at least 1x1");
  }
}

void add_root_depth(DisplacementMapStack& stack, const Vec& root,
                    const EncoderConfig& cfg) {
  const double rcy = root.y / cfg.stride;
  const double rcx = root.x / cfg.stride;
  const CellBox box = neighborhood_box(rcy, rcx, neighborhood_radius_cells(cfg),
                                       stack.height, stack.width);
  for (int y = box.y0; y <= box.y1; ++y) {
    for (int x = box.x0; x <= box.x1; ++x) {
      const double dy = y - rcy;
      const double dx = x - rcx;
      if (!in_neighborhood(dx * dx + dy * dy, cfg)) continue;
      const size_t idx = size_t(y) * stack.width + x;
      stack.root_depth[idx] += root.z / cfg.depth_norm;
      ++stack.depth_contrib[idx];
    }
  }
}

void finalize_averages(DisplacementMapStack& stack) {
  for (int j = 0; j < stack.k; ++j) {
    for (int y = 0; y < stack.height; ++y) {
      for (int x = 0; x < stack.width; ++x) {
        const uint16_t m = stack.contrib(j, y, x);
        if (m <= 1) continue;
        for (int c = 0; c < stack.dim; ++c) {
          stack.values[stack.value_index(j, c, y, x)] /= m;
        }
      }
    }
  }
  if (stack.has_root_depth) {
    for (size_t i = 0; i < stack.root_depth.size(); ++i) {
      if (stack.depth_contrib[i] > 1) stack.root_depth[i] /= stack.depth_contrib[i];
    }
  }
}

DisplacementMapStack make_stack(const Scene& scene, int k, MapMode mode,
                                const EncoderConfig& cfg) {
  DisplacementMapStack stack;
  resolve_map_dims(scene, cfg, stack.height, stack.width);
  stack.dim = scene.dim;
  stack.k = k;
  stack.mode = mode;
  stack.values.assign(size_t(k) * scene.dim * stack.height * stack.width, 0.0);
  stack.contributors.assign(size_t(k) * stack.height * stack.width, 0);
  stack.image_height = scene.image_height;
  stack.image_width = scene.image_width;
  stack.stride = cfg.stride;
  if (scene.dim == 3) {
    stack.has_root_depth = true;
    stack.depth_norm = cfg.depth_norm;
    stack.root_depth.assign(stack.plane(), 0.0);
    stack.depth_contrib.assign(stack.plane(), 0);
  }
  return stack;
}

// Accumulate one person's contribution to channel j: the neighborhood is
// centered at `anchor`, the stored vector points from the cell to `target`,
// and the z component is taken relative to the anchor's z.
void accumulate_channel(DisplacementMapStack& stack, int j, const Vec& anchor,
                        const Vec& target, double z_norm,
                        const EncoderConfig& cfg) {
  const double acy = anchor.y / cfg.stride;
  const double acx = anchor.x / cfg.stride;
  const CellBox box = neighborhood_box(acy, acx, neighborhood_radius_cells(cfg),
                                       stack.height, stack.width);
  for (int y = box.y0; y <= box.y1; ++y) {
    for (int x = box.x0; x <= box.x1; ++x) {
      const double dy = y - acy;
      const double dx = x - acx;
      if (!in_neighborhood(dx * dx + dy * dy, cfg)) continue;
      const double cell_px_x = double(x) * cfg.stride;
      const double cell_px_y = double(y) * cfg.stride;
      stack.values[stack.value_index(j, 0, y, x)] +=
          (target.x - cell_px_x) / z_norm;
      stack.values[stack.value_index(j, 1, y, x)] +=
          (target.y - cell_px_y) / z_norm;
      if (stack.dim == 3) {
        stack.values[stack.value_index(j, 2, y, x)] +=
            (target.z - anchor.z) / z_norm;
      }
      ++stack.contributors[(size_t(j) * stack.height + y) * stack.width + x];
    }
  }
}

}  // namespace

std::string map_mode_name(MapMode mode) {
  return mode == MapMode::vanilla ? "vanilla" : "hierarchical";
}

MapMode map_mode_from_name(const std::string& name) {
  if (name == "vanilla") return MapMode::vanilla;
  if (name == "hierarchical" || name == "hier") return MapMode::hierarchical;
  throw Error::data("unknown map mode '" + name + "'");
}

void validate_config(const EncoderConfig& cfg) {
  if (!(cfg.sigma > 0.0)) throw Error::data("encoder config: sigma must be > 0");
  if (!(cfg.tau >= 0.0)) throw Error::data("encoder config: tau must be >= 0");
  if (cfg.stride < 1) throw Error::data("encoder config: stride must be >= 1");
  if (cfg.map_height < 0 || cfg.map_width < 0)
    throw Error::data("encoder config: map dims must not be negative");
  if (!(cfg.depth_norm > 0.0))
    throw Error::data("encoder config: depth_norm must be > 0");
}

double normalization_factor(int image_height, int image_width) {
  if (image_height <= 0 || image_width <= 0) {
    throw Error::data("normalization_factor: dims must be positive, got " +
                      std::to_string(image_height) + "x" +
                      std::to_string(image_width));
  }
  const double h = image_height;
  const double w = image_width;
  return std::sqrt(h * h + w * w);
}

ConfidenceMap encode_root_confidence(const Scene& scene,
                                     const std::vector<Vec>& roots,
                                     const EncoderConfig& cfg) {
  validate_config(cfg);
  ConfidenceMap map;
  resolve_map_dims(scene, cfg, map.height, map.width);
  map.values.assign(size_t(map.height) * map.width, 0.0);
  const double inv_s2 = 1.0 / (cfg.sigma * cfg.sigma);
  for (const Vec& root : roots) {
    const double rcy = root.y / cfg.stride;
    const double rcx = root.x / cfg.stride;
    for (int y = 0; y < map.height; ++y) {
      const double dy = y - rcy;
      for (int x = 0; x < map.width; ++x) {
        const double dx = x - rcx;
        const double v = std::exp(-(dx * dx + dy * dy) * inv_s2);
        double& cell = map.at(y, x);
        if (v > cell) cell = v;
      }
    }
  }
  return map;
}

DisplacementMapStack encode_displacements(
    const Scene& scene, const std::vector<StructuredPose>& structured,
    const EncoderConfig& cfg) {
  validate_config(cfg);
  if (static_cast<int>(structured.size()) != scene.person_count()) {
    throw Error::data("encode_displacements: persons/structured length mismatch");
  }
  const int k = structured.empty() ? 0 : structured[0].joint_count();
  DisplacementMapStack stack = make_stack(scene, k, MapMode::vanilla, cfg);
  const double z = normalization_factor(scene.image_height, scene.image_width);
  for (const StructuredPose& sp : structured) {
    for (int j = 0; j < sp.joint_count(); ++j) {
      if (!sp.displacements[j]) continue;
      const Vec target = sp.root + *sp.displacements[j];
      accumulate_channel(stack, j, sp.root, target, z, cfg);
    }
    if (stack.has_root_depth) add_root_depth(stack, sp.root, cfg);
  }
  finalize_averages(stack);
  return stack;
}

DisplacementMapStack encode_hier_displacements(
    const Scene& scene, const std::vector<HierStructuredPose>& hier,
    const EncoderConfig& cfg) {
  validate_config(cfg);
  if (static_cast<int>(hier.size()) != scene.person_count()) {
    throw Error::data("encode_hier_displacements: persons/hier length mismatch");
  }
  const int k = hier.empty() ? 0 : hier[0].joint_count();
  DisplacementMapStack stack = make_stack(scene, k, MapMode::hierarchical, cfg);
  const double z = normalization_factor(scene.image_height, scene.image_width);
  for (size_t i = 0; i < hier.size(); ++i) {
    const HierStructuredPose& hp = hier[i];
    if (hp.skeleton == nullptr) {
      throw Error::data("encode_hier_displacements: pose has no skeleton");
    }
    const SkeletonSpec& spec = *hp.skeleton;
    // Joint geometry comes from the scene pose (exact coordinates); the hier
    // pose only gates which channels the person contributes to.
    const Pose& pose = scene.persons[i];
    if (pose.joint_count() != hp.joint_count()) {
      throw Error::data("encode_hier_displacements: pose/hier joint mismatch");
    }
    for (int j = 0; j < hp.joint_count(); ++j) {
      if (!hp.hier_displacements[j]) continue;
      const int par = spec.parent[j];
      const Vec anchor = (par == kRootParent) ? hp.root : pose.joints[par].p;
      accumulate_channel(stack, j, anchor, pose.joints[j].p, z, cfg);
    }
    if (stack.has_root_depth) add_root_depth(stack, hp.root, cfg);
  }
  finalize_averages(stack);
  return stack;
}

EncodedScene encode_scene(const Scene& scene, const SkeletonSpec& spec,
                          MapMode mode, const EncoderConfig& cfg) {
  validate_config(cfg);
  {
    const std::vector<std::string> report = validate(spec);
    if (!report.empty()) {
      throw Error::data("encode_scene: invalid skeleton: " + report.front());
    }
  }
  if (scene.dim != spec.dim) {
    throw Error::data("encode_scene: scene dim does not match skeleton dim");
  }
  for (const Pose& pose : scene.persons) {
    if (pose.joint_count() != spec.joint_count()) {
      throw Error::data("encode_scene: pose joint count does not match skeleton");
    }
  }

  EncodedScene out;
  out.roots.reserve(scene.persons.size());
  for (const Pose& pose : scene.persons) {
    out.roots.push_back(centroid_root(pose));
  }
  out.confidence = encode_root_confidence(scene, out.roots, cfg);
  if (mode == MapMode::vanilla) {
    std::vector<StructuredPose> structured;
    structured.reserve(scene.persons.size());
    for (size_t i = 0; i < scene.persons.size(); ++i) {
      structured.push_back(encode_spr(scene.persons[i], out.roots[i]));
    }
    out.displacements = encode_displacements(scene, structured, cfg);
  } else {
    std::vector<HierStructuredPose> hier;
    hier.reserve(scene.persons.size());
    for (size_t i = 0; i < scene.persons.size(); ++i) {
      hier.push_back(encode_hier(scene.persons[i], out.roots[i], spec));
    }
    out.displacements = encode_hier_displacements(scene, hier, cfg);
  }
  if (scene.persons.empty()) {
    // An empty scene still produces a stack shaped for the skeleton.
    out.displacements.k = spec.joint_count();
    out.displacements.values.assign(size_t(spec.joint_count()) * scene.dim *
                                        out.displacements.height *
                                        out.displacements.width,
                                    0.0);
    out.displacements.contributors.assign(
        size_t(spec.joint_count()) * out.displacements.height *
            out.displacements.width,
        0);
  }
  return out;
}

}  // namespace spr
