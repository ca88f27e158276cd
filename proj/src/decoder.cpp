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

#include "decoder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "error.hpp"

namespace spr {

namespace {

void check_decode_inputs(const ConfidenceMap& cmap,
                         const DisplacementMapStack& stack,
                         const EncoderConfig& cfg, const SkeletonSpec& spec,
                         MapMode want) {
  if (cmap.height != stack.height || cmap.width != stack.width) {
    throw Error::data("decode: confidence and displacement map dims differ");
  }
  if (stack.mode != want) {
    throw Error::data("decode: displacement stack mode is " +
                      map_mode_name(stack.mode) + ", expected " +
                      map_mode_name(want));
  }
  if (spec.joint_count() != stack.k) {
    throw Error::data("decode: skeleton K=" +
                      std::to_string(spec.joint_count()) +
                      " does not match stack K=" + std::to_string(stack.k));
  }
  if (spec.dim != stack.dim) {
    throw Error::data("decode: skeleton dim does not match stack dim");
  }
  if (cfg.stride != stack.stride) {
    throw Error::data("decode: config stride " + std::to_string(cfg.stride) +
                      " does not match stack stride " +
                      std::to_string(stack.stride));
  }
}

int nearest_cell(double position_px, int stride, int limit) {
  const long long c = std::llround(position_px / stride);
  if (c < 0) return 0;
  if (c >= limit) return limit - 1;
  return static_cast<int>(c);
}

// Order: level-2 joints first, then 3, then 4, so parents are decoded
// before their children.
std::vector<int> level_order(const SkeletonSpec& spec) {
  std::vector<int> order(spec.joint_count());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&spec](int a, int b) {
    return spec.hierarchy_level[a] < spec.hierarchy_level[b];
  });
  return order;
}

// Root z for a peak: read the depth channel at the peak cell. Returns false
// when the stack is 3D but the channel is undefined there (no anchor, so no
// joint can be placed).
bool root_z_at(const DisplacementMapStack& stack, int cy, int cx,
               double& z_out) {
  if (!stack.has_root_depth) {
    z_out = 0.0;
    return true;
  }
  if (!stack.depth_defined(cy, cx)) return false;
  z_out = stack.root_depth[size_t(cy) * stack.width + cx] * stack.depth_norm;
  return true;
}

}  // namespace

std::vector<Peak> nms_peaks(const ConfidenceMap& cmap, int window,
                            double threshold, int max_peaks) {
  if (window < 1 || window % 2 == 0) {
    throw Error::usage("nms_peaks: window must be odd and >= 1, got " +
                       std::to_string(window));
  }
  const int half = window / 2;
  std::vector<Peak> peaks;
  for (int y = 0; y < cmap.height; ++y) {
    for (int x = 0; x < cmap.width; ++x) {
      const double center = cmap.at(y, x);
      if (center < threshold) continue;
      bool is_peak = true;
      for (int ny = std::max(0, y - half);
           is_peak && ny <= std::min(cmap.height - 1, y + half); ++ny) {
        for (int nx = std::max(0, x - half);
             nx <= std::min(cmap.width - 1, x + half); ++nx) {
          if (ny == y && nx == x) continue;
          const double v = cmap.at(ny, nx);
          // Plateaus: only the row-major-first cell survives.
          if (v > center || (v == center && (ny < y || (ny == y && nx < x)))) {
            is_peak = false;
            break;
          }
        }
      }
      if (is_peak) {
        peaks.push_back(
            Peak{y, x, static_cast<double>(y), static_cast<double>(x), center});
      }
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.score > b.score; });
  if (max_peaks >= 0 && static_cast<int>(peaks.size()) > max_peaks) {
    peaks.resize(max_peaks);
  }
  return peaks;
}

std::vector<Peak> nms_peaks(const ConfidenceMap& cmap, const NmsParams& nms) {
  std::vector<Peak> peaks =
      nms_peaks(cmap, nms.window, nms.threshold, nms.max_peaks);
  if (!nms.refine) return peaks;
  for (Peak& p : peaks) {
    if (p.cell_x > 0 && p.cell_x + 1 < cmap.width) {
      const double d =
          cmap.at(p.cell_y, p.cell_x + 1) - cmap.at(p.cell_y, p.cell_x - 1);
      if (d > 0) p.x += 0.25;
      else if (d < 0) p.x -= 0.25;
    }
    if (p.cell_y > 0 && p.cell_y + 1 < cmap.height) {
      const double d =
          cmap.at(p.cell_y + 1, p.cell_x) - cmap.at(p.cell_y - 1, p.cell_x);
      if (d > 0) p.y += 0.25;
      else if (d < 0) p.y -= 0.25;
    }
  }
  return peaks;
}

std::vector<DecodedPose> decode_vanilla(const ConfidenceMap& cmap,
                                        const DisplacementMapStack& stack,
                                        const EncoderConfig& cfg,
                                        const SkeletonSpec& spec,
                                        const NmsParams& nms) {
  check_decode_inputs(cmap, stack, cfg, spec, MapMode::vanilla);
  const double z = normalization_factor(stack.image_height, stack.image_width);
  const int stride = stack.stride;
  const int k = stack.k;

  std::vector<DecodedPose> out;
  for (const Peak& peak : nms_peaks(cmap, nms)) {
    DecodedPose dp;
    dp.score = peak.score;
    dp.root = Vec{peak.x * stride, peak.y * stride, 0.0};
    double root_z = 0.0;
    const bool anchor_ok =
        root_z_at(stack, peak.cell_y, peak.cell_x, root_z);
    dp.root.z = root_z;
    dp.pose.dim = stack.dim;
    dp.pose.joints.resize(k);
    dp.per_joint_scores.assign(k, 0.0);
    if (anchor_ok) {
      for (int j = 0; j < k; ++j) {
        if (!stack.defined(j, peak.cell_y, peak.cell_x)) continue;
        Joint& joint = dp.pose.joints[j];
        joint.p.x =
            dp.root.x + z * stack.value(j, 0, peak.cell_y, peak.cell_x);
        joint.p.y =
            dp.root.y + z * stack.value(j, 1, peak.cell_y, peak.cell_x);
        if (stack.dim == 3) {
          joint.p.z = root_z + z * stack.value(j, 2, peak.cell_y, peak.cell_x);
        }
        joint.visible = true;
        dp.per_joint_scores[j] = 1.0;
      }
    }
    out.push_back(std::move(dp));
  }
  return out;
}

std::vector<DecodedPose> decode_hierarchical(const ConfidenceMap& cmap,
                                             const DisplacementMapStack& stack,
                                             const EncoderConfig& cfg,
                                             const SkeletonSpec& spec,
                                             const NmsParams& nms) {
  check_decode_inputs(cmap, stack, cfg, spec, MapMode::hierarchical);
  const double z = normalization_factor(stack.image_height, stack.image_width);
  const int stride = stack.stride;
  const int k = stack.k;
  const std::vector<int> order = level_order(spec);

  std::vector<DecodedPose> out;
  for (const Peak& peak : nms_peaks(cmap, nms)) {
    DecodedPose dp;
    dp.score = peak.score;
    dp.root = Vec{peak.x * stride, peak.y * stride, 0.0};
    double root_z = 0.0;
    const bool root_ok = root_z_at(stack, peak.cell_y, peak.cell_x, root_z);
    dp.root.z = root_z;
    dp.pose.dim = stack.dim;
    dp.pose.joints.resize(k);
    dp.per_joint_scores.assign(k, 0.0);
    for (int j : order) {
      const int par = spec.parent[j];
      int cy, cx;
      double anchor_z;
      if (par == kRootParent) {
        if (!root_ok) continue;
        cy = peak.cell_y;
        cx = peak.cell_x;
        anchor_z = root_z;
      } else {
        const Joint& parent = dp.pose.joints[par];
        if (!parent.visible) continue;  // descendants stay invisible
        cy = nearest_cell(parent.p.y, stride, stack.height);
        cx = nearest_cell(parent.p.x, stride, stack.width);
        anchor_z = parent.p.z;
      }
      if (!stack.defined(j, cy, cx)) continue;
      Joint& joint = dp.pose.joints[j];
      // The stored vector points from the read cell to the joint, so the
      // planar base is the cell itself; z has no grid and accumulates from
      // the parent.
      joint.p.x = double(cx) * stride + z * stack.value(j, 0, cy, cx);
      joint.p.y = double(cy) * stride + z * stack.value(j, 1, cy, cx);
      if (stack.dim == 3) {
        joint.p.z = anchor_z + z * stack.value(j, 2, cy, cx);
      }
      joint.visible = true;
      dp.per_joint_scores[j] = 1.0;
    }
    out.push_back(std::move(dp));
  }
  return out;
}

std::vector<DecodedPose> decode(const ConfidenceMap& cmap,
                                const DisplacementMapStack& stack,
                                const EncoderConfig& cfg,
                                const SkeletonSpec& spec,
                                const NmsParams& nms) {
  return stack.mode == MapMode::vanilla
             ? decode_vanilla(cmap, stack, cfg, spec, nms)
             : decode_hierarchical(cmap, stack, cfg, spec, nms);
}

BenchFixture make_bench_fixture(int height, int width, int k, int n) {
  if (height < 8 || width < 8 || k < 1 || n < 1) {
    throw Error::usage("bench fixture: need dims >= 8, k >= 1, n >= 1");
  }
  BenchFixture fx;
  fx.spec.name = "bench";
  fx.spec.dim = 2;
  for (int j = 0; j < k; ++j) {
    fx.spec.joint_names.push_back("j" + std::to_string(j));
    const int phase = j % 3;
    fx.spec.hierarchy_level.push_back(2 + phase);
    fx.spec.parent.push_back(phase == 0 ? kRootParent : j - 1);
  }

  fx.cfg.sigma = 7.0;
  fx.cfg.tau = 7.0;
  fx.cfg.stride = 1;
  fx.cfg.map_height = height;
  fx.cfg.map_width = width;

  Scene scene;
  scene.image_height = height;
  scene.image_width = width;
  scene.dim = 2;

  // Roots on a coarse grid, far enough apart that every one survives NMS.
  const int cols = static_cast<int>(std::ceil(std::sqrt(double(n))));
  const int rows = (n + cols - 1) / cols;
  const double sx = double(width) / (cols + 1);
  const double sy = double(height) / (rows + 1);
  std::vector<Vec> roots;
  for (int i = 0; i < n; ++i) {
    const int r = i / cols;
    const int c = i % cols;
    roots.push_back(Vec{sx * (c + 1), sy * (r + 1), 0.0});
  }

  std::vector<StructuredPose> structured;
  for (int i = 0; i < n; ++i) {
    StructuredPose sp;
    sp.dim = 2;
    sp.root = roots[i];
    for (int j = 0; j < k; ++j) {
      // Fixed small offsets; the decode cost does not depend on the values.
      const double a = 1.0 + (j % 5);
      sp.displacements.push_back(Vec{a, ((j % 2) ? -a : a) * 0.5, 0.0});
    }
    structured.push_back(std::move(sp));
  }

  fx.cmap = encode_root_confidence(scene, roots, fx.cfg);
  fx.stack = encode_displacements(scene, structured, fx.cfg);
  return fx;
}

BenchStats benchmark_decode(int height, int width, int k, int n,
                            int repetitions) {
  if (repetitions < 1) {
    throw Error::usage("benchmark_decode: repetitions must be >= 1");
  }
  const BenchFixture fx = make_bench_fixture(height, width, k, n);
  const NmsParams nms;  // defaults

  // One untimed warm round, also the determinism/person-count reference.
  const std::vector<DecodedPose> reference =
      decode_vanilla(fx.cmap, fx.stack, fx.cfg, fx.spec, nms);

  std::vector<double> ms(repetitions);
  size_t sink = 0;
  for (int r = 0; r < repetitions; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<DecodedPose> decoded =
        decode_vanilla(fx.cmap, fx.stack, fx.cfg, fx.spec, nms);
    const auto t1 = std::chrono::steady_clock::now();
    sink += decoded.size();
    ms[r] = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  if (sink != size_t(repetitions) * reference.size()) {
    throw Error::data("benchmark_decode: decode result count varied");
  }

  std::vector<double> sorted = ms;
  std::sort(sorted.begin(), sorted.end());
  BenchStats stats;
  stats.repetitions = repetitions;
  stats.peaks = static_cast<int>(reference.size());
  stats.min_ms = sorted.front();
  stats.median_ms = (repetitions % 2 == 1)
                        ? sorted[repetitions / 2]
                        : 0.5 * (sorted[repetitions / 2 - 1] +
                                 sorted[repetitions / 2]);
  const double mean =
      std::accumulate(sorted.begin(), sorted.end(), 0.0) / repetitions;
  stats.mean_ms = mean;
  double var = 0.0;
  for (double v : sorted) var += (v - mean) * (v - mean);
  var /= repetitions;
  stats.cv = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
  return stats;
}

}  // namespace spr
