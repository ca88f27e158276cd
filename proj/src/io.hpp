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

#ifndef SPR_IO_HPP
#define SPR_IO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "encoder.hpp"
#include "model.hpp"
#include "repr.hpp"
#include "skeleton.hpp"
#include "synth.hpp"

namespace spr {

// Error discipline for everything in this header: filesystem failures
// (missing file, unwritable path) raise Error(io); malformed content (bad
// magic, checksum mismatch, schema violations) raises Error(data).

// ---------------------------------------------------------------------------
// Map tensor container: magic "SPMT", u32 LE version (1), u32 rank, rank u32
// dims, u8 dtype tag (1 = f32 LE), row-major payload, trailing u32 CRC-32 of
// the payload bytes. Values are stored little-endian on every platform.

struct TensorData {
  std::vector<uint32_t> dims;
  std::vector<float> values;
};

std::vector<uint8_t> tensor_to_bytes(const TensorData& t);
TensorData tensor_from_bytes(const uint8_t* data, size_t size,
                             const std::string& origin);

void write_tensor(const std::string& path, const TensorData& t);
TensorData read_tensor(const std::string& path);

// Writes bytes to a temporary file in the same directory, then renames, so
// readers never observe partial content.
void atomic_write_file(const std::string& path,
                       const std::vector<uint8_t>& bytes);
void atomic_write_text(const std::string& path, const std::string& text);
std::vector<uint8_t> read_file_bytes(const std::string& path);

// ---------------------------------------------------------------------------
// Skeleton JSON. Unknown fields are rejected to catch typos. Parent links
// use joint indices with -1 for the root.

nlohmann::json skeleton_to_json(const SkeletonSpec& spec);
SkeletonSpec skeleton_from_json(const nlohmann::json& j,
                                const std::string& origin);

// ---------------------------------------------------------------------------
// Pose dataset file (ground truth or predictions).

struct DatasetPerson {
  Pose pose;
  std::optional<Vec> root;
  double score = -1.0;      // < 0 when absent
  double ref_length = 0.0;  // 0 when absent
};

struct DatasetImage {
  std::string id;
  int width = 0;
  int height = 0;
  std::vector<DatasetPerson> persons;
};

struct PoseDataset {
  int version = 1;
  SkeletonSpec skeleton;
  int dim = 2;
  double ref_length = 0.0;  // dataset-level default, 0 when absent
  std::vector<DatasetImage> images;
};

PoseDataset dataset_from_json(const nlohmann::json& j,
                              const std::string& origin);
nlohmann::json dataset_to_json(const PoseDataset& ds);
PoseDataset load_dataset(const std::string& path);
void save_dataset(const PoseDataset& ds, const std::string& path);

// Reference length for one ground-truth person, resolving the per-person,
// per-dataset, and head-segment conventions.
double resolve_ref_length(const PoseDataset& ds, const DatasetPerson& person);

// ---------------------------------------------------------------------------
// Encoded-map directory layout: per image "<id>_conf.spmt" ([H,W]) and
// "<id>_disp.spmt" ([K, d+1, H, W]; the final component plane carries the
// contributor counts), plus "<id>_depth.spmt" ([2, H, W]) for 3D stacks, and
// a manifest.json written last.

struct ManifestImage {
  std::string id;
  int width = 0;
  int height = 0;
  int map_height = 0;
  int map_width = 0;
  int n_persons = 0;
  std::string conf_file;
  std::string disp_file;
  std::string depth_file;  // empty in 2D
};

struct EncodeManifest {
  int version = 1;
  MapMode mode = MapMode::vanilla;
  int dim = 2;
  double sigma = 7.0;
  double tau = 7.0;
  bool tau_as_radius = false;
  int stride = 1;
  double depth_norm = 10000.0;
  SkeletonSpec skeleton;
  std::vector<ManifestImage> images;
};

void save_manifest(const EncodeManifest& m, const std::string& dir);
EncodeManifest load_manifest(const std::string& dir);

void write_confidence_tensor(const std::string& path, const ConfidenceMap& c);
ConfidenceMap read_confidence_tensor(const std::string& path);

// The stack tensor holds values and contributor counts; mode, geometry, and
// the depth channel are restored from the manifest by the caller.
void write_stack_tensor(const std::string& path,
                        const DisplacementMapStack& s);
void read_stack_tensor(const std::string& path, DisplacementMapStack& s);
void write_depth_tensor(const std::string& path,
                        const DisplacementMapStack& s);
void read_depth_tensor(const std::string& path, DisplacementMapStack& s);

// ---------------------------------------------------------------------------
// Model checkpoint: magic "SPMC", u32 version, u32 JSON header length, the
// header, then named parameter tensors as embedded map tensor blobs.

struct CheckpointMeta {
  int version = 1;
  int t = 2;
  int k = 0;
  int dim = 2;
  int in_channels = 3;
  uint64_t seed = 0;
  int epoch = 0;
  nlohmann::json extra;  // free-form provenance (training params etc.)
};

void save_checkpoint(const std::string& path, const ToyRegressor<float>& m,
                     const CheckpointMeta& meta);
ToyRegressor<float> load_checkpoint(const std::string& path,
                                    CheckpointMeta* meta_out);

// ---------------------------------------------------------------------------
// Binary PPM (P6) image writer.
void write_ppm(const std::string& path, const RenderedImage& img);

// SPR_THREADS environment variable, default 1; values are clamped to [1,256].
int default_thread_count();

}  // namespace spr

#endif  // SPR_IO_HPP
