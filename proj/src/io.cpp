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

#include "io.hpp"

#include <zlib.h>

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "error.hpp"
#include "eval.hpp"

namespace spr {
namespace {

using nlohmann::json;

// --------------------------------------------------------------------------
// Byte-level primitives. All multi-byte fields are little-endian on disk;
// assembling values byte by byte keeps the code host-endian independent.

void put_u32le(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(uint8_t(v & 0xff));
  out.push_back(uint8_t((v >> 8) & 0xff));
  out.push_back(uint8_t((v >> 16) & 0xff));
  out.push_back(uint8_t((v >> 24) & 0xff));
}

uint32_t get_u32le(const uint8_t* p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) |
         (uint32_t(p[3]) << 24);
}

void put_f32le(std::vector<uint8_t>& out, float v) {
  put_u32le(out, std::bit_cast<uint32_t>(v));
}

float get_f32le(const uint8_t* p) {
  return std::bit_cast<float>(get_u32le(p));
}

uint32_t crc32_of(const uint8_t* data, size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (size > 0) {
    const size_t chunk = std::min<size_t>(size, size_t(1) << 30);
    crc = crc32(crc, data, uInt(chunk));
    data += chunk;
    size -= chunk;
  }
  return uint32_t(crc);
}

constexpr char kTensorMagic[4] = {'S', 'P', 'M', 'T'};
constexpr char kCheckpointMagic[4] = {'S', 'P', 'M', 'C'};
constexpr uint32_t kTensorVersion = 1;
constexpr uint32_t kCheckpointVersion = 1;
constexpr uint8_t kDtypeF32 = 1;
constexpr uint32_t kMaxRank = 8;

// A bounds-checked forward reader over a byte buffer.
struct ByteReader {
  const uint8_t* data;
  size_t size;
  size_t pos = 0;
  const std::string& origin;

  void need(size_t n, const char* what) const {
    if (pos + n > size) {
      throw Error::data(origin + ": truncated file while reading " +
                        std::string(what));
    }
  }
  uint32_t u32(const char* what) {
    need(4, what);
    const uint32_t v = get_u32le(data + pos);
    pos += 4;
    return v;
  }
  uint8_t u8(const char* what) {
    need(1, what);
    return data[pos++];
  }
  const uint8_t* bytes(size_t n, const char* what) {
    need(n, what);
    const uint8_t* p = data + pos;
    pos += n;
    return p;
  }
};

// --------------------------------------------------------------------------
// JSON schema helpers. Every object is checked against an allowlist so a
// misspelled key fails loudly instead of silently using a default.

void reject_unknown_fields(const json& j,
                           std::initializer_list<const char*> allowed,
                           const std::string& where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (item.key() == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw Error::data("unknown field '" + item.key() + "' in " + where);
    }
  }
}

const json& need_field(const json& j, const char* key,
                       const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error::data("missing field '" + std::string(key) + "' in " + where);
  }
  return *it;
}

double need_number(const json& j, const char* key, const std::string& where) {
  const json& v = need_field(j, key, where);
  if (!v.is_number()) {
    throw Error::data("field '" + std::string(key) + "' in " + where +
                      " must be a number");
  }
  return v.get<double>();
}

int need_int(const json& j, const char* key, const std::string& where) {
  const json& v = need_field(j, key, where);
  if (!v.is_number_integer()) {
    throw Error::data("field '" + std::string(key) + "' in " + where +
                      " must be an integer");
  }
  return v.get<int>();
}

bool need_bool(const json& j, const char* key, const std::string& where) {
  const json& v = need_field(j, key, where);
  if (!v.is_boolean()) {
    throw Error::data("field '" + std::string(key) + "' in " + where +
                      " must be a boolean");
  }
  return v.get<bool>();
}

std::string need_string(const json& j, const char* key,
                        const std::string& where) {
  const json& v = need_field(j, key, where);
  if (!v.is_string()) {
    throw Error::data("field '" + std::string(key) + "' in " + where +
                      " must be a string");
  }
  return v.get<std::string>();
}

const json& need_array(const json& j, const char* key,
                       const std::string& where) {
  const json& v = need_field(j, key, where);
  if (!v.is_array()) {
    throw Error::data("field '" + std::string(key) + "' in " + where +
                      " must be an array");
  }
  return v;
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error::data(origin + ": invalid JSON: " + e.what());
  }
}

std::string read_file_text(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

Vec vec_from_json(const json& arr, int dim, const std::string& where) {
  if (!arr.is_array() || int(arr.size()) != dim) {
    throw Error::data(where + " must be an array of " + std::to_string(dim) +
                      " numbers");
  }
  for (const json& v : arr) {
    if (!v.is_number()) {
      throw Error::data(where + " must contain only numbers");
    }
  }
  Vec v;
  v.x = arr[0].get<double>();
  v.y = arr[1].get<double>();
  if (dim == 3) v.z = arr[2].get<double>();
  return v;
}

json vec_to_json(const Vec& v, int dim) {
  json arr = json::array({v.x, v.y});
  if (dim == 3) arr.push_back(v.z);
  return arr;
}

}  // namespace

// --------------------------------------------------------------------------
// Map tensor container.

std::vector<uint8_t> tensor_to_bytes(const TensorData& t) {
  if (t.dims.empty() || t.dims.size() > kMaxRank) {
    throw Error::data("tensor write: rank must be between 1 and " +
                      std::to_string(kMaxRank));
  }
  size_t count = 1;
  for (uint32_t d : t.dims) {
    if (d == 0) throw Error::data("tensor write: zero-sized dimension");
    count *= d;
  }
  if (count != t.values.size()) {
    throw Error::data("tensor write: dims describe " + std::to_string(count) +
                      " elements but payload has " +
                      std::to_string(t.values.size()));
  }
  std::vector<uint8_t> out;
  out.reserve(16 + 4 * t.dims.size() + 4 * count);
  out.insert(out.end(), kTensorMagic, kTensorMagic + 4);
  put_u32le(out, kTensorVersion);
  put_u32le(out, uint32_t(t.dims.size()));
  for (uint32_t d : t.dims) put_u32le(out, d);
  out.push_back(kDtypeF32);
  const size_t payload_start = out.size();
  for (float v : t.values) put_f32le(out, v);
  const uint32_t crc =
      crc32_of(out.data() + payload_start, out.size() - payload_start);
  put_u32le(out, crc);
  return out;
}

TensorData tensor_from_bytes(const uint8_t* data, size_t size,
                             const std::string& origin) {
  ByteReader r{data, size, 0, origin};
  const uint8_t* magic = r.bytes(4, "magic");
  if (std::memcmp(magic, kTensorMagic, 4) != 0) {
    throw Error::data(origin + ": not a map tensor file (bad magic)");
  }
  const uint32_t version = r.u32("version");
  if (version != kTensorVersion) {
    throw Error::data(origin + ": unsupported tensor version " +
                      std::to_string(version));
  }
  const uint32_t rank = r.u32("rank");
  if (rank == 0 || rank > kMaxRank) {
    throw Error::data(origin + ": bad tensor rank " + std::to_string(rank));
  }
  TensorData t;
  t.dims.resize(rank);
  uint64_t count = 1;
  for (uint32_t i = 0; i < rank; ++i) {
    t.dims[i] = r.u32("dims");
    if (t.dims[i] == 0) {
      throw Error::data(origin + ": zero-sized tensor dimension");
    }
    count *= t.dims[i];
    if (count > (uint64_t(1) << 32)) {
      throw Error::data(origin + ": tensor too large");
    }
  }
  const uint8_t dtype = r.u8("dtype");
  if (dtype != kDtypeF32) {
    throw Error::data(origin + ": unsupported dtype tag " +
                      std::to_string(int(dtype)));
  }
  const uint8_t* payload = r.bytes(size_t(count) * 4, "payload");
  const uint32_t stored_crc = r.u32("checksum");
  if (r.pos != size) {
    throw Error::data(origin + ": trailing bytes after checksum");
  }
  const uint32_t actual_crc = crc32_of(payload, size_t(count) * 4);
  if (actual_crc != stored_crc) {
    throw Error::data(origin + ": checksum mismatch (file corrupt)");
  }
  t.values.resize(size_t(count));
  for (size_t i = 0; i < t.values.size(); ++i) {
    t.values[i] = get_f32le(payload + i * 4);
  }
  return t;
}

void write_tensor(const std::string& path, const TensorData& t) {
  atomic_write_file(path, tensor_to_bytes(t));
}

TensorData read_tensor(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  return tensor_from_bytes(bytes.data(), bytes.size(), path);
}

// --------------------------------------------------------------------------
// Filesystem helpers.

void atomic_write_file(const std::string& path,
                       const std::vector<uint8_t>& bytes) {
  static std::atomic<uint64_t> counter{0};
  const std::string tmp =
      path + ".tmp." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error::io("cannot open '" + tmp + "' for writing");
    if (!bytes.empty()) {
      out.write(reinterpret_cast<const char*>(bytes.data()),
                std::streamsize(bytes.size()));
    }
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw Error::io("write failed for '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw Error::io("cannot rename '" + tmp + "' to '" + path +
                    "': " + ec.message());
  }
}

void atomic_write_text(const std::string& path, const std::string& text) {
  atomic_write_file(path, std::vector<uint8_t>(text.begin(), text.end()));
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::io("cannot open '" + path + "' for reading");
  in.seekg(0, std::ios::end);
  const std::streamoff len = in.tellg();
  if (len < 0) throw Error::io("cannot determine size of '" + path + "'");
  in.seekg(0, std::ios::beg);
  std::vector<uint8_t> bytes(static_cast<size_t>(len));
  if (len > 0) {
    in.read(reinterpret_cast<char*>(bytes.data()), len);
  }
  if (!in) throw Error::io("read failed for '" + path + "'");
  return bytes;
}

// --------------------------------------------------------------------------
// Skeleton JSON.

json skeleton_to_json(const SkeletonSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["dim"] = spec.dim;
  j["joint_names"] = spec.joint_names;
  j["hierarchy_level"] = spec.hierarchy_level;
  j["parent"] = spec.parent;
  return j;
}

SkeletonSpec skeleton_from_json(const json& j, const std::string& origin) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (!is_skeleton_preset(name)) {
      throw Error::data(origin + ": unknown skeleton preset '" + name + "'");
    }
    return skeleton_preset(name);
  }
  if (!j.is_object()) {
    throw Error::data(origin +
                      ": skeleton must be a preset name or an object");
  }
  const std::string where = origin + " skeleton";
  reject_unknown_fields(
      j, {"name", "dim", "joint_names", "hierarchy_level", "parent"}, where);
  SkeletonSpec spec;
  spec.name = need_string(j, "name", where);
  spec.dim = need_int(j, "dim", where);
  for (const json& v : need_array(j, "joint_names", where)) {
    if (!v.is_string()) {
      throw Error::data(where + ": joint_names must contain strings");
    }
    spec.joint_names.push_back(v.get<std::string>());
  }
  for (const json& v : need_array(j, "hierarchy_level", where)) {
    if (!v.is_number_integer()) {
      throw Error::data(where + ": hierarchy_level must contain integers");
    }
    spec.hierarchy_level.push_back(v.get<int>());
  }
  for (const json& v : need_array(j, "parent", where)) {
    if (!v.is_number_integer()) {
      throw Error::data(where + ": parent must contain integers");
    }
    spec.parent.push_back(v.get<int>());
  }
  const std::vector<std::string> issues = validate(spec);
  if (!issues.empty()) {
    throw Error::data(where + ": " + issues.front());
  }
  return spec;
}

// --------------------------------------------------------------------------
// Pose dataset file.

namespace {

DatasetPerson person_from_json(const json& j, const SkeletonSpec& skeleton,
                               const std::string& where) {
  reject_unknown_fields(j, {"joints", "root", "score", "ref_length"}, where);
  const int dim = skeleton.dim;
  const int k = skeleton.joint_count();

  DatasetPerson person;
  person.pose.dim = dim;
  person.pose.joints.assign(size_t(k), Joint{});

  std::vector<bool> seen(size_t(k), false);
  const json& joints = need_array(j, "joints", where);
  for (const json& je : joints) {
    if (!je.is_object()) {
      throw Error::data(where + ": joints must contain objects");
    }
    const std::string jwhere = where + " joint";
    reject_unknown_fields(je, {"name", "x", "y", "z", "visible"}, jwhere);
    const std::string name = need_string(je, "name", jwhere);
    const int idx = skeleton.joint_index(name);
    if (idx < 0) {
      throw Error::data(where + ": joint '" + name +
                        "' is not in the skeleton");
    }
    if (seen[size_t(idx)]) {
      throw Error::data(where + ": duplicate joint '" + name + "'");
    }
    seen[size_t(idx)] = true;
    Joint& joint = person.pose.joints[size_t(idx)];
    joint.p.x = need_number(je, "x", jwhere + " '" + name + "'");
    joint.p.y = need_number(je, "y", jwhere + " '" + name + "'");
    if (dim == 3) {
      joint.p.z = need_number(je, "z", jwhere + " '" + name + "'");
    } else if (je.contains("z")) {
      throw Error::data(where + ": joint '" + name +
                        "' has a z coordinate in a 2D dataset");
    }
    joint.visible = need_bool(je, "visible", jwhere + " '" + name + "'");
  }
  for (int i = 0; i < k; ++i) {
    if (!seen[size_t(i)]) {
      throw Error::data(where + ": missing joint '" +
                        skeleton.joint_names[size_t(i)] + "'");
    }
  }

  if (j.contains("root")) {
    person.root = vec_from_json(j["root"], dim, where + " root");
  }
  if (j.contains("score")) {
    const json& s = j["score"];
    if (!s.is_number()) {
      throw Error::data(where + ": score must be a number");
    }
    person.score = s.get<double>();
    if (person.score < 0) {
      throw Error::data(where + ": score must be non-negative");
    }
  }
  if (j.contains("ref_length")) {
    const json& r = j["ref_length"];
    if (!r.is_number() || r.get<double>() <= 0) {
      throw Error::data(where + ": ref_length must be a positive number");
    }
    person.ref_length = r.get<double>();
  }
  return person;
}

json person_to_json(const DatasetPerson& person,
                    const SkeletonSpec& skeleton) {
  json j;
  json joints = json::array();
  const int dim = skeleton.dim;
  for (size_t i = 0; i < person.pose.joints.size(); ++i) {
    const Joint& joint = person.pose.joints[i];
    json je;
    je["name"] = skeleton.joint_names[i];
    je["x"] = joint.p.x;
    je["y"] = joint.p.y;
    if (dim == 3) je["z"] = joint.p.z;
    je["visible"] = joint.visible;
    joints.push_back(std::move(je));
  }
  j["joints"] = std::move(joints);
  if (person.root.has_value()) {
    j["root"] = vec_to_json(*person.root, dim);
  }
  if (person.score >= 0) j["score"] = person.score;
  if (person.ref_length > 0) j["ref_length"] = person.ref_length;
  return j;
}

}  // namespace

PoseDataset dataset_from_json(const json& j, const std::string& origin) {
  if (!j.is_object()) {
    throw Error::data(origin + ": dataset must be a JSON object");
  }
  reject_unknown_fields(
      j, {"version", "skeleton", "dim", "ref_length", "images"}, origin);
  PoseDataset ds;
  ds.version = need_int(j, "version", origin);
  if (ds.version != 1) {
    throw Error::data(origin + ": unsupported dataset version " +
                      std::to_string(ds.version));
  }
  ds.skeleton = skeleton_from_json(need_field(j, "skeleton", origin), origin);
  ds.dim = ds.skeleton.dim;
  if (j.contains("dim")) {
    const int dim = need_int(j, "dim", origin);
    if (dim != ds.skeleton.dim) {
      throw Error::data(origin + ": dim " + std::to_string(dim) +
                        " does not match the skeleton's dim " +
                        std::to_string(ds.skeleton.dim));
    }
  }
  if (j.contains("ref_length")) {
    const double r = need_number(j, "ref_length", origin);
    if (r <= 0) {
      throw Error::data(origin + ": ref_length must be positive");
    }
    ds.ref_length = r;
  }
  const json& images = need_array(j, "images", origin);
  size_t image_idx = 0;
  std::set<std::string> ids;
  for (const json& ji : images) {
    const std::string where =
        origin + " images[" + std::to_string(image_idx) + "]";
    if (!ji.is_object()) {
      throw Error::data(where + ": image entries must be objects");
    }
    reject_unknown_fields(ji, {"id", "width", "height", "persons"}, where);
    DatasetImage img;
    img.id = need_string(ji, "id", where);
    if (img.id.empty()) throw Error::data(where + ": empty image id");
    if (!ids.insert(img.id).second) {
      throw Error::data(origin + ": duplicate image id '" + img.id + "'");
    }
    img.width = need_int(ji, "width", where);
    img.height = need_int(ji, "height", where);
    if (img.width <= 0 || img.height <= 0) {
      throw Error::data(where + ": width and height must be positive");
    }
    const json& persons = need_array(ji, "persons", where);
    size_t person_idx = 0;
    for (const json& jp : persons) {
      const std::string pwhere =
          where + ".persons[" + std::to_string(person_idx) + "]";
      if (!jp.is_object()) {
        throw Error::data(pwhere + ": person entries must be objects");
      }
      img.persons.push_back(person_from_json(jp, ds.skeleton, pwhere));
      ++person_idx;
    }
    ds.images.push_back(std::move(img));
    ++image_idx;
  }
  return ds;
}

json dataset_to_json(const PoseDataset& ds) {
  json j;
  j["version"] = ds.version;
  j["skeleton"] = skeleton_to_json(ds.skeleton);
  j["dim"] = ds.skeleton.dim;
  if (ds.ref_length > 0) j["ref_length"] = ds.ref_length;
  json images = json::array();
  for (const DatasetImage& img : ds.images) {
    json ji;
    ji["id"] = img.id;
    ji["width"] = img.width;
    ji["height"] = img.height;
    json persons = json::array();
    for (const DatasetPerson& p : img.persons) {
      persons.push_back(person_to_json(p, ds.skeleton));
    }
    ji["persons"] = std::move(persons);
    images.push_back(std::move(ji));
  }
  j["images"] = std::move(images);
  return j;
}

PoseDataset load_dataset(const std::string& path) {
  return dataset_from_json(parse_json_text(read_file_text(path), path), path);
}

void save_dataset(const PoseDataset& ds, const std::string& path) {
  atomic_write_text(path, dataset_to_json(ds).dump(2) + "\n");
}

double resolve_ref_length(const PoseDataset& ds, const DatasetPerson& person) {
  const double recorded =
      person.ref_length > 0 ? person.ref_length : ds.ref_length;
  return head_size(person.pose, ds.skeleton, recorded);
}

// --------------------------------------------------------------------------
// Encode manifest.

void save_manifest(const EncodeManifest& m, const std::string& dir) {
  json j;
  j["version"] = m.version;
  j["mode"] = map_mode_name(m.mode);
  j["dim"] = m.dim;
  j["sigma"] = m.sigma;
  j["tau"] = m.tau;
  j["tau_semantics"] = m.tau_as_radius ? "radius" : "squared";
  j["stride"] = m.stride;
  j["depth_norm"] = m.depth_norm;
  j["skeleton"] = skeleton_to_json(m.skeleton);
  json images = json::array();
  for (const ManifestImage& img : m.images) {
    json ji;
    ji["id"] = img.id;
    ji["width"] = img.width;
    ji["height"] = img.height;
    ji["map_height"] = img.map_height;
    ji["map_width"] = img.map_width;
    ji["n_persons"] = img.n_persons;
    ji["conf_file"] = img.conf_file;
    ji["disp_file"] = img.disp_file;
    if (!img.depth_file.empty()) ji["depth_file"] = img.depth_file;
    images.push_back(std::move(ji));
  }
  j["images"] = std::move(images);
  atomic_write_text(dir + "/manifest.json", j.dump(2) + "\n");
}

EncodeManifest load_manifest(const std::string& dir) {
  const std::string path = dir + "/manifest.json";
  const json j = parse_json_text(read_file_text(path), path);
  if (!j.is_object()) {
    throw Error::data(path + ": manifest must be a JSON object");
  }
  reject_unknown_fields(j,
                        {"version", "mode", "dim", "sigma", "tau",
                         "tau_semantics", "stride", "depth_norm", "skeleton",
                         "images"},
                        path);
  EncodeManifest m;
  m.version = need_int(j, "version", path);
  if (m.version != 1) {
    throw Error::data(path + ": unsupported manifest version " +
                      std::to_string(m.version));
  }
  m.mode = map_mode_from_name(need_string(j, "mode", path));
  m.dim = need_int(j, "dim", path);
  m.sigma = need_number(j, "sigma", path);
  m.tau = need_number(j, "tau", path);
  const std::string sem = need_string(j, "tau_semantics", path);
  if (sem == "radius") {
    m.tau_as_radius = true;
  } else if (sem == "squared") {
    m.tau_as_radius = false;
  } else {
    throw Error::data(path + ": tau_semantics must be 'squared' or 'radius'");
  }
  m.stride = need_int(j, "stride", path);
  m.depth_norm = need_number(j, "depth_norm", path);
  m.skeleton = skeleton_from_json(need_field(j, "skeleton", path), path);
  if (m.dim != m.skeleton.dim) {
    throw Error::data(path + ": manifest dim does not match the skeleton");
  }
  for (const json& ji : need_array(j, "images", path)) {
    const std::string where = path + " image entry";
    if (!ji.is_object()) {
      throw Error::data(where + " must be an object");
    }
    reject_unknown_fields(ji,
                          {"id", "width", "height", "map_height", "map_width",
                           "n_persons", "conf_file", "disp_file",
                           "depth_file"},
                          where);
    ManifestImage img;
    img.id = need_string(ji, "id", where);
    img.width = need_int(ji, "width", where);
    img.height = need_int(ji, "height", where);
    img.map_height = need_int(ji, "map_height", where);
    img.map_width = need_int(ji, "map_width", where);
    img.n_persons = need_int(ji, "n_persons", where);
    img.conf_file = need_string(ji, "conf_file", where);
    img.disp_file = need_string(ji, "disp_file", where);
    if (ji.contains("depth_file")) {
      img.depth_file = need_string(ji, "depth_file", where);
    }
    if (img.width <= 0 || img.height <= 0 || img.map_height <= 0 ||
        img.map_width <= 0 || img.n_persons < 0) {
      throw Error::data(where + " for '" + img.id + "' has invalid geometry");
    }
    if ((m.dim == 3) != !img.depth_file.empty()) {
      throw Error::data(where + " for '" + img.id +
                        "': depth_file must be present exactly for 3D maps");
    }
    m.images.push_back(std::move(img));
  }
  return m;
}

// --------------------------------------------------------------------------
// Map tensors for confidence, displacement stacks, and the depth channel.

void write_confidence_tensor(const std::string& path, const ConfidenceMap& c) {
  TensorData t;
  t.dims = {uint32_t(c.height), uint32_t(c.width)};
  t.values.reserve(c.values.size());
  for (double v : c.values) t.values.push_back(float(v));
  write_tensor(path, t);
}

ConfidenceMap read_confidence_tensor(const std::string& path) {
  const TensorData t = read_tensor(path);
  if (t.dims.size() != 2) {
    throw Error::data(path + ": confidence tensor must have rank 2");
  }
  ConfidenceMap c;
  c.height = int(t.dims[0]);
  c.width = int(t.dims[1]);
  c.values.assign(t.values.begin(), t.values.end());
  return c;
}

void write_stack_tensor(const std::string& path,
                        const DisplacementMapStack& s) {
  // Layout [K, dim + 1, H, W]: the displacement component planes followed by
  // one plane of contributor counts, stored as exact small floats.
  TensorData t;
  t.dims = {uint32_t(s.k), uint32_t(s.dim + 1), uint32_t(s.height),
            uint32_t(s.width)};
  const size_t plane = s.plane();
  t.values.reserve(size_t(s.k) * (s.dim + 1) * plane);
  for (int j = 0; j < s.k; ++j) {
    const size_t vbase = (size_t(j) * s.dim) * plane;
    for (size_t i = 0; i < size_t(s.dim) * plane; ++i) {
      t.values.push_back(float(s.values[vbase + i]));
    }
    const size_t cbase = size_t(j) * plane;
    for (size_t i = 0; i < plane; ++i) {
      t.values.push_back(float(s.contributors[cbase + i]));
    }
  }
  write_tensor(path, t);
}

void read_stack_tensor(const std::string& path, DisplacementMapStack& s) {
  const TensorData t = read_tensor(path);
  if (t.dims.size() != 4) {
    throw Error::data(path + ": displacement tensor must have rank 4");
  }
  const int k = int(t.dims[0]);
  const int comp = int(t.dims[1]);
  const int h = int(t.dims[2]);
  const int w = int(t.dims[3]);
  if (comp != 3 && comp != 4) {
    throw Error::data(path + ": displacement tensor must carry 2 or 3 " +
                      std::string("components plus contributor counts"));
  }
  s.k = k;
  s.dim = comp - 1;
  s.height = h;
  s.width = w;
  const size_t plane = size_t(h) * w;
  s.values.assign(size_t(k) * s.dim * plane, 0.0);
  s.contributors.assign(size_t(k) * plane, 0);
  for (int j = 0; j < k; ++j) {
    const size_t tbase = size_t(j) * comp * plane;
    const size_t vbase = size_t(j) * s.dim * plane;
    for (size_t i = 0; i < size_t(s.dim) * plane; ++i) {
      s.values[vbase + i] = t.values[tbase + i];
    }
    const size_t cbase = size_t(j) * plane;
    for (size_t i = 0; i < plane; ++i) {
      const float c = t.values[tbase + size_t(s.dim) * plane + i];
      if (!(c >= 0.0f) || c != std::floor(c) || c > 65535.0f) {
        throw Error::data(path + ": contributor plane holds a non-count");
      }
      s.contributors[cbase + i] = uint16_t(c);
    }
  }
}

void write_depth_tensor(const std::string& path,
                        const DisplacementMapStack& s) {
  if (!s.has_root_depth) {
    throw Error::data("depth tensor write: stack has no root-depth channel");
  }
  TensorData t;
  t.dims = {2, uint32_t(s.height), uint32_t(s.width)};
  t.values.reserve(2 * s.plane());
  for (double v : s.root_depth) t.values.push_back(float(v));
  for (uint16_t c : s.depth_contrib) t.values.push_back(float(c));
  write_tensor(path, t);
}

void read_depth_tensor(const std::string& path, DisplacementMapStack& s) {
  const TensorData t = read_tensor(path);
  if (t.dims.size() != 3 || t.dims[0] != 2) {
    throw Error::data(path + ": depth tensor must have shape [2, H, W]");
  }
  const int h = int(t.dims[1]);
  const int w = int(t.dims[2]);
  if (h != s.height || w != s.width) {
    throw Error::data(path + ": depth tensor dims do not match the stack");
  }
  const size_t plane = size_t(h) * w;
  s.has_root_depth = true;
  s.root_depth.assign(plane, 0.0);
  s.depth_contrib.assign(plane, 0);
  for (size_t i = 0; i < plane; ++i) {
    s.root_depth[i] = t.values[i];
    const float c = t.values[plane + i];
    if (!(c >= 0.0f) || c != std::floor(c) || c > 65535.0f) {
      throw Error::data(path + ": depth contributor plane holds a non-count");
    }
    s.depth_contrib[i] = uint16_t(c);
  }
}

// --------------------------------------------------------------------------
// Checkpoints.

void save_checkpoint(const std::string& path, const ToyRegressor<float>& m,
                     const CheckpointMeta& meta) {
  json header;
  header["version"] = kCheckpointVersion;
  header["t"] = m.t;
  header["k"] = m.k;
  header["dim"] = m.dim;
  header["in_channels"] = m.in_channels;
  header["seed"] = meta.seed;
  header["epoch"] = meta.epoch;
  header["parameter_count"] = parameter_count(m);
  header["extra"] = meta.extra.is_null() ? json::object() : meta.extra;
  const std::string header_text = header.dump();

  struct Blob {
    std::string name;
    std::vector<uint8_t> bytes;
  };
  std::vector<Blob> blobs;
  for_each_tensor(const_cast<ToyRegressor<float>&>(m),
                  [&blobs](const std::string& name, std::vector<float>& v) {
                    TensorData t;
                    t.dims = {uint32_t(v.size())};
                    t.values = v;
                    blobs.push_back({name, tensor_to_bytes(t)});
                  });

  std::vector<uint8_t> out;
  out.insert(out.end(), kCheckpointMagic, kCheckpointMagic + 4);
  put_u32le(out, kCheckpointVersion);
  put_u32le(out, uint32_t(header_text.size()));
  out.insert(out.end(), header_text.begin(), header_text.end());
  put_u32le(out, crc32_of(
                     reinterpret_cast<const uint8_t*>(header_text.data()),
                     header_text.size()));
  put_u32le(out, uint32_t(blobs.size()));
  for (const Blob& b : blobs) {
    put_u32le(out, uint32_t(b.name.size()));
    out.insert(out.end(), b.name.begin(), b.name.end());
    put_u32le(out, uint32_t(b.bytes.size()));
    out.insert(out.end(), b.bytes.begin(), b.bytes.end());
  }
  atomic_write_file(path, out);
}

ToyRegressor<float> load_checkpoint(const std::string& path,
                                    CheckpointMeta* meta_out) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  ByteReader r{bytes.data(), bytes.size(), 0, path};
  const uint8_t* magic = r.bytes(4, "magic");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw Error::data(path + ": not a checkpoint file (bad magic)");
  }
  const uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw Error::data(path + ": unsupported checkpoint version " +
                      std::to_string(version));
  }
  const uint32_t header_len = r.u32("header length");
  const uint8_t* header_bytes = r.bytes(header_len, "header");
  const uint32_t header_crc = r.u32("header checksum");
  if (crc32_of(header_bytes, header_len) != header_crc) {
    throw Error::data(path + ": header checksum mismatch (file corrupt)");
  }
  const json header = parse_json_text(
      std::string(header_bytes, header_bytes + header_len), path);

  CheckpointMeta meta;
  meta.version = int(version);
  meta.t = need_int(header, "t", path);
  meta.k = need_int(header, "k", path);
  meta.dim = need_int(header, "dim", path);
  meta.in_channels = need_int(header, "in_channels", path);
  const json& seed = need_field(header, "seed", path);
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    throw Error::data(path + ": seed must be an integer");
  }
  meta.seed = seed.get<uint64_t>();
  meta.epoch = need_int(header, "epoch", path);
  meta.extra = header.contains("extra") ? header["extra"] : json::object();
  if (meta.t < 1 || meta.t > 64 || meta.k < 1 || meta.k > 1024 ||
      (meta.dim != 2 && meta.dim != 3) || meta.in_channels < 1 ||
      meta.in_channels > 64) {
    throw Error::data(path + ": implausible architecture in header");
  }

  std::map<std::string, TensorData> tensors;
  const uint32_t blob_count = r.u32("blob count");
  for (uint32_t i = 0; i < blob_count; ++i) {
    const uint32_t name_len = r.u32("tensor name length");
    const uint8_t* name_bytes = r.bytes(name_len, "tensor name");
    const std::string name(name_bytes, name_bytes + name_len);
    const uint32_t blob_len = r.u32("tensor length");
    const uint8_t* blob = r.bytes(blob_len, "tensor");
    if (tensors.count(name)) {
      throw Error::data(path + ": duplicate tensor '" + name + "'");
    }
    tensors.emplace(name,
                    tensor_from_bytes(blob, blob_len, path + ":" + name));
  }
  if (r.pos != r.size) {
    throw Error::data(path + ": trailing bytes after tensors");
  }

  ToyRegressor<float> model = make_toy_regressor<float>(
      meta.t, meta.k, meta.dim, meta.in_channels, meta.seed);
  const json& pcount = need_field(header, "parameter_count", path);
  if (!pcount.is_number_integer() ||
      pcount.get<int64_t>() != int64_t(parameter_count(model))) {
    throw Error::data(path + ": parameter_count does not match architecture");
  }
  size_t used = 0;
  for_each_tensor(model, [&](const std::string& name, std::vector<float>& v) {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
      throw Error::data(path + ": missing tensor '" + name + "'");
    }
    if (it->second.values.size() != v.size()) {
      throw Error::data(path + ": tensor '" + name + "' has wrong size");
    }
    v = it->second.values;
    ++used;
  });
  if (used != tensors.size()) {
    throw Error::data(path + ": checkpoint carries unexpected tensors");
  }
  if (meta_out) *meta_out = meta;
  return model;
}

// --------------------------------------------------------------------------
// PPM writer.

void write_ppm(const std::string& path, const RenderedImage& img) {
  if (img.height <= 0 || img.width <= 0 ||
      img.rgb.size() != size_t(3) * img.height * img.width) {
    throw Error::data("ppm write: malformed image buffer");
  }
  std::string header = "P6\n" + std::to_string(img.width) + " " +
                       std::to_string(img.height) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  const size_t plane = size_t(img.height) * img.width;
  out.reserve(out.size() + plane * 3);
  for (size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) {
      const float v = img.rgb[size_t(c) * plane + i];
      const float clamped = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
      out.push_back(uint8_t(std::lround(clamped * 255.0f)));
    }
  }
  atomic_write_file(path, out);
}

int default_thread_count() {
  const char* env = std::getenv("SPR_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) return 1;
  return int(std::min<long>(v, 256));
}

}  // namespace spr
