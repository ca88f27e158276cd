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

#ifndef SPR_DRIVERS_HPP
#define SPR_DRIVERS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "decoder.hpp"
#include "encoder.hpp"
#include "io.hpp"
#include "model.hpp"
#include "synth.hpp"

namespace spr {

// Experiment drivers behind the command-line surface. Each returns a JSON
// report and, where an output path is given, writes files atomically with
// the manifest or report last. Every driver is deterministic for fixed
// options and seeds, except for the wall-clock fields of the benchmarks.

struct EncodeOptions {
  std::string dataset_path;
  std::string out_dir;
  MapMode mode = MapMode::vanilla;
  EncoderConfig encoder;
  int threads = 0;  // 0 reads SPR_THREADS, default 1
};
nlohmann::json run_encode(const EncodeOptions& opt);

struct DecodeOptions {
  std::string maps_dir;
  std::string out_path;
  // When non-empty, decoding refuses maps whose manifest records the other
  // mode instead of silently reinterpreting them.
  std::string expect_mode;
  NmsParams nms;
  int threads = 0;
};
nlohmann::json run_decode(const DecodeOptions& opt);

struct RoundTripOptions {
  uint64_t seed = 7;
  int scenes = 50;
  MapMode mode = MapMode::vanilla;
  SynthConfig synth;
  EncoderConfig encoder;
  NmsParams nms;
  std::string report_path;  // optional
  int threads = 0;
};
nlohmann::json run_roundtrip(const RoundTripOptions& opt);

// Sweep fixture: a 64x64 dataset with 2..3 persons allowed close enough
// that large neighborhoods actually collide.
SynthConfig tau_sweep_synth_defaults();

struct TauSweepOptions {
  int tau_from = 1;
  int tau_to = 20;
  uint64_t seed = 5;
  int scenes = 24;
  MapMode mode = MapMode::vanilla;
  SynthConfig synth = tau_sweep_synth_defaults();
  NmsParams nms;
  std::string report_path;  // optional
  int threads = 0;
};
nlohmann::json run_tau_sweep(const TauSweepOptions& opt);

// Training defaults for the toy fixture: 500 epoch budget at the stock
// learning rate, masked displacement supervision.
TrainConfig train_toy_defaults();

struct TrainToyOptions {
  uint64_t seed = 11;
  int scenes = 5;
  int image_size = 64;
  int stages = 2;
  MapMode mode = MapMode::vanilla;
  TrainConfig train = train_toy_defaults();
  EncoderConfig encoder;
  NmsParams nms;
  // Stop once decoded train-set PCKh@alpha reaches this value (checked every
  // eval_every epochs); 0 disables early stopping.
  double stop_at_pckh = 0.0;
  int eval_every = 10;
  double alpha = 0.5;
  std::string checkpoint_path;  // optional
  std::string history_path;     // optional, one mean loss per row
};
nlohmann::json run_train_toy(const TrainToyOptions& opt);

struct EvalOptions {
  std::string pred_path;
  std::string gt_path;
  std::string metric = "map";  // "map" or "pck3d"
  double alpha = 0.5;          // PCKh fraction for map
  double radius = 150.0;       // pck3d correctness radius, depth units
  double root_gate = 500.0;    // pck3d match gate, depth units
};
nlohmann::json run_eval(const EvalOptions& opt);

struct BenchOptions {
  int height = 96;
  int width = 96;
  int k = 16;
  int persons = 8;
  int repetitions = 100;
};
nlohmann::json run_bench(const BenchOptions& opt);

struct ScalingOptions {
  std::vector<std::pair<int, int>> resolutions = {{64, 64}, {96, 96}};
  std::vector<int> persons = {1, 2, 4, 8, 16};
  std::vector<int> k_sweep = {8, 16, 32};  // measured at the last resolution
  int k = 16;
  int k_sweep_persons = 8;
  int repetitions = 200;
  std::string report_path;  // optional
};
nlohmann::json run_scaling_study(const ScalingOptions& opt);

struct SynthOptions {
  SynthConfig synth;
  int scenes = 8;
  std::string out_dataset;
  std::string render_dir;  // optional, PPM per scene
};
nlohmann::json run_synth(const SynthOptions& opt);

// Shared helpers, exposed for tests.

// Runs fn(0..n-1) on up to `threads` workers; exceptions are collected and
// the first one rethrown after all workers finish.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// Least-squares line fit returning slope, intercept, and R^2. R^2 is 1 for
// a perfect fit and 0 when the fit explains nothing; a constant y yields 1
// if the fit is exact. Throws Error(data) on fewer than two points.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Decoded train-set PCKh of a model against the scenes it was trained on.
double decoded_train_pckh(const ToyRegressor<float>& model,
                          const std::vector<TrainSample<float>>& samples,
                          const std::vector<Scene>& scenes,
                          const SkeletonSpec& spec, const EncoderConfig& cfg,
                          const NmsParams& nms, double alpha,
                          double ref_length);

}  // namespace spr

#endif  // SPR_DRIVERS_HPP
