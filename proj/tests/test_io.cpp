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

#include <zlib.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "io.hpp"

using namespace spr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  fs::path d = fs::temp_directory_path() /
               ("spr_io_test_" + std::to_string(++counter));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<uint8_t> slurp(const fs::path& p) {
  return read_file_bytes(p.string());
}

void dump(const fs::path& p, const std::vector<uint8_t>& bytes) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          std::streamsize(bytes.size()));
}

uint32_t le32(const std::vector<uint8_t>& b, size_t off) {
  return uint32_t(b[off]) | uint32_t(b[off + 1]) << 8 |
         uint32_t(b[off + 2]) << 16 | uint32_t(b[off + 3]) << 24;
}

TensorData sample_tensor() {
  TensorData t;
  t.dims = {2, 3};
  t.values = {0.0f, 1.0f, -1.0f, 0.5f, 3.25f, -2.75f};
  return t;
}

PoseDataset sample_dataset() {
  PoseDataset ds;
  ds.skeleton = default_toy6();
  ds.dim = 2;
  ds.ref_length = 12.0;
  DatasetImage img;
  img.id = "img0";
  img.width = 32;
  img.height = 32;
  DatasetPerson a;
  a.pose.dim = 2;
  for (int j = 0; j < 6; ++j)
    a.pose.joints.push_back({{4.0 + j, 8.0 + 0.5 * j}, true});
  a.pose.joints[5].visible = false;
  a.root = Vec{6.0, 9.0};
  a.score = 0.875;
  DatasetPerson b;
  b.pose.dim = 2;
  for (int j = 0; j < 6; ++j)
    b.pose.joints.push_back({{20.0 + j, 16.0 + 0.25 * j}, true});
  b.ref_length = 10.0;
  img.persons = {a, b};
  ds.images.push_back(img);
  return ds;
}

}  // namespace

TEST_CASE("tensor bytes follow the documented layout") {
  const TensorData t = sample_tensor();
  const std::vector<uint8_t> bytes = tensor_to_bytes(t);
  // magic, version, rank, 2 dims, dtype, 6 floats, crc
  REQUIRE(bytes.size() == 4 + 4 + 4 + 8 + 1 + 24 + 4);
  CHECK(std::memcmp(bytes.data(), "SPMT", 4) == 0);
  CHECK(le32(bytes, 4) == 1);   // version
  CHECK(le32(bytes, 8) == 2);   // rank
  CHECK(le32(bytes, 12) == 2);  // dims[0]
  CHECK(le32(bytes, 16) == 3);  // dims[1]
  CHECK(bytes[20] == 1);        // dtype tag: f32 little-endian
  // Trailing checksum is CRC-32 of the payload bytes.
  const uint32_t crc = uint32_t(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data() + 21), 24));
  CHECK(le32(bytes, bytes.size() - 4) == crc);
  // Payload is little-endian IEEE floats: 1.0f = 00 00 80 3f.
  CHECK(bytes[21 + 4] == 0x00);
  CHECK(bytes[21 + 5] == 0x00);
  CHECK(bytes[21 + 6] == 0x80);
  CHECK(bytes[21 + 7] == 0x3f);
}

TEST_CASE("tensor files round-trip bit for bit") {
  const fs::path dir = temp_dir();
  const fs::path p1 = dir / "a.spmt";
  const fs::path p2 = dir / "b.spmt";
  const TensorData t = sample_tensor();
  write_tensor(p1.string(), t);
  const TensorData back = read_tensor(p1.string());
  CHECK(back.dims == t.dims);
  CHECK(back.values == t.values);
  write_tensor(p2.string(), back);
  CHECK(slurp(p1) == slurp(p2));
  fs::remove_all(dir);
}

TEST_CASE("corrupted tensors are rejected") {
  const fs::path dir = temp_dir();
  const fs::path good = dir / "good.spmt";
  write_tensor(good.string(), sample_tensor());
  const std::vector<uint8_t> bytes = slurp(good);

  SUBCASE("flipped payload byte fails the checksum") {
    std::vector<uint8_t> bad = bytes;
    bad[23] ^= 0x40;
    dump(dir / "bad.spmt", bad);
    CHECK_THROWS_AS(read_tensor((dir / "bad.spmt").string()), Error);
  }
  SUBCASE("flipped checksum byte fails the checksum") {
    std::vector<uint8_t> bad = bytes;
    bad[bytes.size() - 1] ^= 0x01;
    dump(dir / "bad.spmt", bad);
    CHECK_THROWS_AS(read_tensor((dir / "bad.spmt").string()), Error);
  }
  SUBCASE("truncation is detected") {
    std::vector<uint8_t> bad = bytes;
    bad.pop_back();
    dump(dir / "bad.spmt", bad);
    CHECK_THROWS_AS(read_tensor((dir / "bad.spmt").string()), Error);
  }
  SUBCASE("wrong magic is rejected") {
    std::vector<uint8_t> bad = bytes;
    bad[0] = 'X';
    dump(dir / "bad.spmt", bad);
    CHECK_THROWS_AS(read_tensor((dir / "bad.spmt").string()), Error);
  }
  SUBCASE("unsupported version is rejected") {
    std::vector<uint8_t> bad = bytes;
    bad[4] = 2;
    dump(dir / "bad.spmt", bad);
    CHECK_THROWS_AS(read_tensor((dir / "bad.spmt").string()), Error);
  }
  SUBCASE("unknown dtype tag is rejected") {
    std::vector<uint8_t> bad = bytes;
    bad[20] = 7;
    dump(dir / "bad.spmt", bad);
    CHECK_THROWS_AS(read_tensor((dir / "bad.spmt").string()), Error);
  }
  fs::remove_all(dir);
}

TEST_CASE("missing files raise io errors, not data errors") {
  try {
    read_tensor("/nonexistent/dir/x.spmt");
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
  try {
    read_file_bytes("/nonexistent/dir/y.bin");
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
}

TEST_CASE("golden tensor file stays stable") {
  const std::string path = std::string(SPR_GOLDEN_DIR) + "/tiny.spmt";
  const TensorData t = read_tensor(path);
  REQUIRE(t.dims == std::vector<uint32_t>{2, 3});
  REQUIRE(t.values.size() == 6);
  CHECK(t.values[0] == 0.0f);
  CHECK(t.values[1] == 1.0f);
  CHECK(t.values[2] == -1.0f);
  CHECK(t.values[3] == 0.5f);
  CHECK(t.values[4] == 3.25f);
  CHECK(t.values[5] == -2.75f);
  // Re-serializing reproduces the committed bytes exactly.
  CHECK(tensor_to_bytes(t) == slurp(path));
}

TEST_CASE("golden dataset file stays stable") {
  const std::string path = std::string(SPR_GOLDEN_DIR) + "/tiny_dataset.json";
  const PoseDataset ds = load_dataset(path);
  CHECK(ds.skeleton.name == "toy6");
  REQUIRE(ds.images.size() == 1);
  CHECK(ds.images[0].id == "img0");
  REQUIRE(ds.images[0].persons.size() == 2);
  CHECK(ds.images[0].persons[0].score == doctest::Approx(0.875));
  CHECK(!ds.images[0].persons[0].pose.joints[5].visible);
  // Save-load-save is byte stable.
  const fs::path dir = temp_dir();
  const fs::path out = dir / "again.json";
  save_dataset(ds, out.string());
  CHECK(slurp(out) == slurp(path));
  fs::remove_all(dir);
}

TEST_CASE("dataset json round trip preserves everything") {
  const PoseDataset ds = sample_dataset();
  const nlohmann::json j = dataset_to_json(ds);
  const PoseDataset back = dataset_from_json(j, "test");
  CHECK(back.skeleton.name == ds.skeleton.name);
  CHECK(back.dim == ds.dim);
  CHECK(back.ref_length == ds.ref_length);
  REQUIRE(back.images.size() == 1);
  const DatasetImage& img = back.images[0];
  CHECK(img.id == "img0");
  CHECK(img.width == 32);
  REQUIRE(img.persons.size() == 2);
  CHECK(img.persons[0].root.has_value());
  CHECK(img.persons[0].root->x == 6.0);
  CHECK(img.persons[0].score == 0.875);
  CHECK(img.persons[1].score == -1.0);  // absent stays absent
  CHECK(img.persons[1].ref_length == 10.0);
  for (int j2 = 0; j2 < 6; ++j2) {
    CHECK(img.persons[0].pose.joints[j2].p.x ==
          ds.images[0].persons[0].pose.joints[j2].p.x);
    CHECK(img.persons[0].pose.joints[j2].visible ==
          ds.images[0].persons[0].pose.joints[j2].visible);
  }
}

TEST_CASE("dataset schema violations are rejected with context") {
  const nlohmann::json base = dataset_to_json(sample_dataset());

  SUBCASE("unknown top-level field") {
    nlohmann::json j = base;
    j["extra"] = 1;
    CHECK_THROWS_AS(dataset_from_json(j, "t"), Error);
  }
  SUBCASE("unknown image field") {
    nlohmann::json j = base;
    j["images"][0]["camera"] = "left";
    CHECK_THROWS_AS(dataset_from_json(j, "t"), Error);
  }
  SUBCASE("unknown person field") {
    nlohmann::json j = base;
    j["images"][0]["persons"][0]["bbox"] = {1, 2, 3, 4};
    CHECK_THROWS_AS(dataset_from_json(j, "t"), Error);
  }
  SUBCASE("unknown joint field") {
    nlohmann::json j = base;
    j["images"][0]["persons"][0]["joints"][0]["confidence"] = 0.5;
    CHECK_THROWS_AS(dataset_from_json(j, "t"), Error);
  }
  SUBCASE("z coordinate on a planar dataset") {
    nlohmann::json j = base;
    j["images"][0]["persons"][0]["joints"][0]["z"] = 5.0;
    CHECK_THROWS_AS(dataset_from_json(j, "t"), Error);
  }
  SUBCASE("duplicate image ids") {
    nlohmann::json j = base;
    j["images"].push_back(j["images"][0]);
    CHECK_THROWS_AS(dataset_from_json(j, "t"), Error);
  }
  SUBCASE("negative score") {
    nlohmann::json j = base;
    j["images"][0]["persons"][0]["score"] = -0.25;
    CHECK_THROWS_AS(dataset_from_json(j, "t"), Error);
  }
  SUBCASE("missing joints array") {
    nlohmann::json j = base;
    j["images"][0]["persons"][0].erase("joints");
    CHECK_THROWS_AS(dataset_from_json(j, "t"), Error);
  }
  SUBCASE("duplicate joint name") {
    nlohmann::json j = base;
    j["images"][0]["persons"][0]["joints"][1]["name"] =
        j["images"][0]["persons"][0]["joints"][0]["name"];
    CHECK_THROWS_AS(dataset_from_json(j, "t"), Error);
  }
  SUBCASE("unknown joint name") {
    nlohmann::json j = base;
    j["images"][0]["persons"][0]["joints"][0]["name"] = "antenna";
    CHECK_THROWS_AS(dataset_from_json(j, "t"), Error);
  }
  SUBCASE("unsupported version") {
    nlohmann::json j = base;
    j["version"] = 3;
    CHECK_THROWS_AS(dataset_from_json(j, "t"), Error);
  }
  SUBCASE("dim conflicting with the skeleton") {
    nlohmann::json j = base;
    j["dim"] = 3;
    CHECK_THROWS_AS(dataset_from_json(j, "t"), Error);
  }
}

TEST_CASE("skeletons serialize to json and back") {
  const SkeletonSpec spec = default_mpii16();
  const nlohmann::json j = skeleton_to_json(spec);
  const SkeletonSpec back = skeleton_from_json(j, "t");
  CHECK(back.name == spec.name);
  CHECK(back.dim == spec.dim);
  CHECK(back.joint_names == spec.joint_names);
  CHECK(back.hierarchy_level == spec.hierarchy_level);
  CHECK(back.parent == spec.parent);

  // Preset names resolve directly.
  const SkeletonSpec by_name = skeleton_from_json(nlohmann::json("toy6"), "t");
  CHECK(by_name.name == "toy6");
  CHECK_THROWS_AS(skeleton_from_json(nlohmann::json("nosuch"), "t"), Error);

  nlohmann::json bad = j;
  bad["color"] = "red";
  CHECK_THROWS_AS(skeleton_from_json(bad, "t"), Error);
  bad = j;
  bad["parent"][0] = 99;
  CHECK_THROWS_AS(skeleton_from_json(bad, "t"), Error);
}

TEST_CASE("malformed dataset files report data errors") {
  const fs::path dir = temp_dir();
  const fs::path p = dir / "bad.json";
  atomic_write_text(p.string(), "{ not json");
  try {
    load_dataset(p.string());
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::data);
  }
  fs::remove_all(dir);
}

TEST_CASE("confidence maps survive the float container") {
  ConfidenceMap m;
  m.height = 3;
  m.width = 4;
  for (int i = 0; i < 12; ++i) m.values.push_back(i == 5 ? 0.875 : 0.0625 * i);
  const fs::path dir = temp_dir();
  const fs::path p = dir / "conf.spmt";
  write_confidence_tensor(p.string(), m);
  const ConfidenceMap back = read_confidence_tensor(p.string());
  CHECK(back.height == 3);
  CHECK(back.width == 4);
  for (int i = 0; i < 12; ++i) CHECK(back.values[i] == m.values[i]);
  fs::remove_all(dir);
}

TEST_CASE("displacement stacks store counts in the last plane") {
  // Hand-built 2-joint stack; all values chosen float-exact.
  DisplacementMapStack s;
  s.height = 2;
  s.width = 2;
  s.dim = 2;
  s.k = 2;
  s.image_height = 2;
  s.image_width = 2;
  s.values.assign(size_t(2) * 2 * 2 * 2, 0.0);
  s.contributors.assign(size_t(2) * 2 * 2, 0);
  s.values[s.value_index(0, 0, 0, 0)] = 0.25;
  s.values[s.value_index(1, 1, 1, 1)] = -0.5;
  s.contributors[0] = 1;
  s.contributors[7] = 3;

  const fs::path dir = temp_dir();
  const fs::path p = dir / "disp.spmt";
  write_stack_tensor(p.string(), s);

  const TensorData raw = read_tensor(p.string());
  REQUIRE(raw.dims == std::vector<uint32_t>{2, 3, 2, 2});

  DisplacementMapStack back;
  read_stack_tensor(p.string(), back);
  CHECK(back.k == 2);
  CHECK(back.dim == 2);
  CHECK(back.values == s.values);
  CHECK(back.contributors == s.contributors);
  CHECK(back.defined(0, 0, 0));
  CHECK(!back.defined(0, 0, 1));
  fs::remove_all(dir);
}

TEST_CASE("count planes must hold small non-negative integers") {
  const fs::path dir = temp_dir();
  TensorData t;
  t.dims = {1, 3, 1, 1};

  SUBCASE("fractional count") {
    t.values = {0.5f, 0.5f, 1.5f};
    write_tensor((dir / "x.spmt").string(), t);
    DisplacementMapStack s;
    CHECK_THROWS_AS(read_stack_tensor((dir / "x.spmt").string(), s), Error);
  }
  SUBCASE("negative count") {
    t.values = {0.5f, 0.5f, -1.0f};
    write_tensor((dir / "x.spmt").string(), t);
    DisplacementMapStack s;
    CHECK_THROWS_AS(read_stack_tensor((dir / "x.spmt").string(), s), Error);
  }
  SUBCASE("count beyond the u16 range") {
    t.values = {0.5f, 0.5f, 70000.0f};
    write_tensor((dir / "x.spmt").string(), t);
    DisplacementMapStack s;
    CHECK_THROWS_AS(read_stack_tensor((dir / "x.spmt").string(), s), Error);
  }
  fs::remove_all(dir);
}

TEST_CASE("depth planes round-trip alongside 3d stacks") {
  DisplacementMapStack s;
  s.height = 2;
  s.width = 2;
  s.dim = 3;
  s.k = 1;
  s.image_height = 2;
  s.image_width = 2;
  s.values.assign(size_t(1) * 3 * 2 * 2, 0.125);
  s.contributors.assign(4, 1);
  s.has_root_depth = true;
  s.root_depth = {0.25, 0.5, 0.0, 0.75};
  s.depth_contrib = {1, 2, 0, 1};

  const fs::path dir = temp_dir();
  const fs::path p = dir / "depth.spmt";
  write_depth_tensor(p.string(), s);
  const TensorData raw = read_tensor(p.string());
  REQUIRE(raw.dims == std::vector<uint32_t>{2, 2, 2});

  DisplacementMapStack back;
  back.height = 2;
  back.width = 2;
  read_depth_tensor(p.string(), back);
  CHECK(back.has_root_depth);
  CHECK(back.root_depth == s.root_depth);
  CHECK(back.depth_contrib == s.depth_contrib);
  fs::remove_all(dir);
}

TEST_CASE("manifests record every encoding parameter") {
  const fs::path dir = temp_dir();
  EncodeManifest m;
  m.mode = MapMode::hierarchical;
  m.dim = 3;
  m.sigma = 5.5;
  m.tau = 4.0;
  m.tau_as_radius = true;
  m.stride = 2;
  m.depth_norm = 9000.0;
  m.skeleton = default_panoptic15_3d();
  ManifestImage img;
  img.id = "scene0";
  img.width = 64;
  img.height = 48;
  img.map_height = 24;
  img.map_width = 32;
  img.n_persons = 2;
  img.conf_file = "scene0_conf.spmt";
  img.disp_file = "scene0_disp.spmt";
  img.depth_file = "scene0_depth.spmt";
  m.images.push_back(img);

  save_manifest(m, dir.string());
  const EncodeManifest back = load_manifest(dir.string());
  CHECK(back.mode == MapMode::hierarchical);
  CHECK(back.dim == 3);
  CHECK(back.sigma == 5.5);
  CHECK(back.tau == 4.0);
  CHECK(back.tau_as_radius);
  CHECK(back.stride == 2);
  CHECK(back.depth_norm == 9000.0);
  CHECK(back.skeleton.name == "panoptic15-3d");
  REQUIRE(back.images.size() == 1);
  CHECK(back.images[0].map_width == 32);
  CHECK(back.images[0].depth_file == "scene0_depth.spmt");

  // Unknown manifest fields are typos, not extensions.
  nlohmann::json j;
  {
    std::ifstream f(dir / "manifest.json");
    f >> j;
  }
  j["compression"] = "zstd";
  atomic_write_text((dir / "manifest.json").string(), j.dump(2));
  CHECK_THROWS_AS(load_manifest(dir.string()), Error);
  fs::remove_all(dir);
}

TEST_CASE("checkpoint corruption and oversized headers are rejected") {
  const fs::path dir = temp_dir();
  const fs::path p = dir / "m.spmc";
  auto model = make_toy_regressor<float>(1, 2, 2, 3, 7);
  CheckpointMeta meta;
  meta.t = 1;
  meta.k = 2;
  meta.dim = 2;
  meta.in_channels = 3;
  save_checkpoint(p.string(), model, meta);

  SUBCASE("bit flip inside a parameter blob") {
    std::vector<uint8_t> bytes = slurp(p);
    bytes[bytes.size() / 2] ^= 0x10;
    dump(p, bytes);
    CHECK_THROWS_AS(load_checkpoint(p.string(), nullptr), Error);
  }
  SUBCASE("truncated file") {
    std::vector<uint8_t> bytes = slurp(p);
    bytes.resize(bytes.size() - 10);
    dump(p, bytes);
    CHECK_THROWS_AS(load_checkpoint(p.string(), nullptr), Error);
  }
  SUBCASE("architecture beyond the documented caps") {
    auto wide = make_toy_regressor<float>(1, 1025, 2, 3, 7);
    CheckpointMeta wmeta;
    wmeta.t = 1;
    wmeta.k = 1025;
    wmeta.dim = 2;
    wmeta.in_channels = 3;
    save_checkpoint(p.string(), wide, wmeta);
    CHECK_THROWS_AS(load_checkpoint(p.string(), nullptr), Error);
  }
  fs::remove_all(dir);
}

TEST_CASE("atomic writes leave no temporaries behind") {
  const fs::path dir = temp_dir();
  const fs::path p = dir / "out.bin";
  const std::vector<uint8_t> payload = {1, 2, 3, 4, 5};
  atomic_write_file(p.string(), payload);
  CHECK(slurp(p) == payload);
  int entries = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
  CHECK_THROWS_AS(
      atomic_write_file("/nonexistent/dir/file.bin", payload), Error);
  fs::remove_all(dir);
}

TEST_CASE("ppm files carry the exact header and rounded bytes") {
  RenderedImage img;
  img.height = 1;
  img.width = 2;
  // Planar [3][h][w]: r = {0, 1}, g = {0.5, 2 -> clamps to 1}, b = {0.25, -1}.
  img.rgb = {0.0f, 1.0f, 0.5f, 2.0f, 0.25f, -1.0f};
  const fs::path dir = temp_dir();
  const fs::path p = dir / "img.ppm";
  write_ppm(p.string(), img);
  const std::vector<uint8_t> bytes = slurp(p);
  const std::string header = "P6\n2 1\n255\n";
  REQUIRE(bytes.size() == header.size() + 6);
  CHECK(std::memcmp(bytes.data(), header.data(), header.size()) == 0);
  const uint8_t* px = bytes.data() + header.size();
  CHECK(px[0] == 0);    // r(0,0)
  CHECK(px[1] == 128);  // g 0.5 rounds to 128
  CHECK(px[2] == 64);   // b 0.25 rounds to 64
  CHECK(px[3] == 255);  // r 1.0
  CHECK(px[4] == 255);  // g clamped
  CHECK(px[5] == 0);    // b clamped

  RenderedImage bad;
  bad.height = 2;
  bad.width = 2;
  bad.rgb = {0.0f};
  CHECK_THROWS_AS(write_ppm((dir / "bad.ppm").string(), bad), Error);
  fs::remove_all(dir);
}

TEST_CASE("thread count env parsing clamps and defaults") {
  const char* saved = std::getenv("SPR_THREADS");
  const std::string saved_copy = saved ? saved : "";

  unsetenv("SPR_THREADS");
  CHECK(default_thread_count() == 1);
  setenv("SPR_THREADS", "8", 1);
  CHECK(default_thread_count() == 8);
  setenv("SPR_THREADS", "0", 1);
  CHECK(default_thread_count() == 1);
  setenv("SPR_THREADS", "-3", 1);
  CHECK(default_thread_count() == 1);
  setenv("SPR_THREADS", "9999", 1);
  CHECK(default_thread_count() == 256);
  setenv("SPR_THREADS", "abc", 1);
  CHECK(default_thread_count() == 1);

  if (saved) {
    setenv("SPR_THREADS", saved_copy.c_str(), 1);
  } else {
    unsetenv("SPR_THREADS");
  }
}

TEST_CASE("reference lengths resolve person, dataset, then head segment") {
  PoseDataset ds = sample_dataset();
  // Person override wins.
  CHECK(resolve_ref_length(ds, ds.images[0].persons[1]) == 10.0);
  // Dataset default next.
  CHECK(resolve_ref_length(ds, ds.images[0].persons[0]) == 12.0);
  // Head segment when nothing else is recorded.
  PoseDataset mp;
  mp.skeleton = default_mpii16();
  mp.dim = 2;
  DatasetPerson person;
  person.pose.dim = 2;
  person.pose.joints.assign(16, Joint{{0, 0}, false});
  person.pose.joints[mp.skeleton.joint_index("upper_neck")] = {{0, 0}, true};
  person.pose.joints[mp.skeleton.joint_index("head_top")] = {{0, 10}, true};
  CHECK(resolve_ref_length(mp, person) == doctest::Approx(6.0));
  // Nothing available at all.
  PoseDataset bare;
  bare.skeleton = default_toy6();
  bare.dim = 2;
  DatasetPerson nobody;
  nobody.pose.dim = 2;
  nobody.pose.joints.assign(6, Joint{{1, 1}, true});
  CHECK_THROWS_AS(resolve_ref_length(bare, nobody), Error);
}
