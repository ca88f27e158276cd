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

#include "spr/spr.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "json.hpp"

#include "drivers.hpp"
#include "encoder.hpp"
#include "error.hpp"
#include "io.hpp"
#include "skeleton.hpp"

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Runs fn under the error-code contract: exceptions become status codes and
// the thread-local message.
template <typename Fn>
spr_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SPR_OK;
  } catch (const spr::Error& e) {
    g_last_error = e.what();
    return static_cast<spr_status>(static_cast<int>(e.code()));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SPR_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return SPR_ERROR_INTERNAL;
  }
}

json parse_options(const char* options_json) {
  if (!options_json || !*options_json) return json::object();
  json j;
  try {
    j = json::parse(options_json);
  } catch (const json::exception& e) {
    throw spr::Error::usage(std::string("options are not valid JSON: ") +
                            e.what());
  }
  if (!j.is_object()) throw spr::Error::usage("options must be a JSON object");
  return j;
}

// Option readers. A present field must have the right type; a missing one
// keeps the default. Every driver checks its allowlist first so misspelled
// options fail instead of silently defaulting.
void allow_only(const json& j, std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (item.key() == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw spr::Error::usage("unknown option '" + item.key() + "'");
    }
  }
}

void opt_int(const json& j, const char* key, int& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_number_integer()) {
    throw spr::Error::usage(std::string("option '") + key +
                            "' must be an integer");
  }
  out = j[key].get<int>();
}

void opt_u64(const json& j, const char* key, uint64_t& out) {
  if (!j.contains(key)) return;
  const bool ok = j[key].is_number_unsigned() ||
                  (j[key].is_number_integer() && j[key].get<int64_t>() >= 0);
  if (!ok) {
    throw spr::Error::usage(std::string("option '") + key +
                            "' must be a non-negative integer");
  }
  out = j[key].get<uint64_t>();
}

void opt_double(const json& j, const char* key, double& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_number()) {
    throw spr::Error::usage(std::string("option '") + key +
                            "' must be a number");
  }
  out = j[key].get<double>();
}

void opt_bool(const json& j, const char* key, bool& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_boolean()) {
    throw spr::Error::usage(std::string("option '") + key +
                            "' must be a boolean");
  }
  out = j[key].get<bool>();
}

void opt_string(const json& j, const char* key, std::string& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_string()) {
    throw spr::Error::usage(std::string("option '") + key +
                            "' must be a string");
  }
  out = j[key].get<std::string>();
}

spr::MapMode opt_mode(const json& j, const char* key, spr::MapMode dflt) {
  std::string name;
  opt_string(j, key, name);
  if (name.empty()) return dflt;
  try {
    return spr::map_mode_from_name(name);
  } catch (const spr::Error&) {
    throw spr::Error::usage("option '" + std::string(key) +
                            "' must be 'vanilla' or 'hier'");
  }
}

std::string need_option_string(const json& j, const char* key) {
  std::string out;
  opt_string(j, key, out);
  if (out.empty()) {
    throw spr::Error::usage(std::string("option '") + key + "' is required");
  }
  return out;
}

spr_status report_out(char** out_report, const json& report) {
  if (!out_report) throw spr::Error::usage("output pointer is null");
  char* s = dup_string(report.dump(2));
  if (!s) throw spr::Error::io("out of memory for report string");
  *out_report = s;
  return SPR_OK;
}

void read_nms(const json& j, spr::NmsParams& nms) {
  opt_int(j, "window", nms.window);
  opt_double(j, "threshold", nms.threshold);
  opt_int(j, "max_peaks", nms.max_peaks);
  opt_bool(j, "refine", nms.refine);
}

}  // namespace

extern "C" {

const char* spr_version(void) { return "1.0.0"; }

const char* spr_last_error(void) { return g_last_error.c_str(); }

void spr_string_free(char* s) { std::free(s); }

/* ------------------------------------------------------------------ */

struct spr_skeleton {
  spr::SkeletonSpec spec;
};

spr_status spr_skeleton_create(const char* name_or_json, spr_skeleton** out) {
  return guarded([&]() {
    if (!name_or_json || !out) {
      throw spr::Error::usage("skeleton spec and output pointer are required");
    }
    const std::string text = name_or_json;
    json j;
    if (!text.empty() && text[0] == '{') {
      try {
        j = json::parse(text);
      } catch (const json::exception& e) {
        throw spr::Error::data(std::string("skeleton JSON is invalid: ") +
                               e.what());
      }
    } else {
      j = json(text);  // preset name
    }
    auto* s = new spr_skeleton{spr::skeleton_from_json(j, "skeleton")};
    *out = s;
  });
}

void spr_skeleton_destroy(spr_skeleton* s) { delete s; }

int spr_skeleton_joint_count(const spr_skeleton* s) {
  return s ? s->spec.joint_count() : 0;
}

int spr_skeleton_dim(const spr_skeleton* s) { return s ? s->spec.dim : 0; }

const char* spr_skeleton_name(const spr_skeleton* s) {
  return s ? s->spec.name.c_str() : "";
}

spr_status spr_skeleton_to_json(const spr_skeleton* s, char** out_json) {
  return guarded([&]() {
    if (!s || !out_json) {
      throw spr::Error::usage("skeleton and output pointer are required");
    }
    report_out(out_json, spr::skeleton_to_json(s->spec));
  });
}

/* ------------------------------------------------------------------ */

struct spr_dataset {
  spr::PoseDataset ds;
};

spr_status spr_dataset_load(const char* path, spr_dataset** out) {
  return guarded([&]() {
    if (!path || !out) {
      throw spr::Error::usage("path and output pointer are required");
    }
    auto* d = new spr_dataset{spr::load_dataset(path)};
    *out = d;
  });
}

void spr_dataset_destroy(spr_dataset* d) { delete d; }

int spr_dataset_image_count(const spr_dataset* d) {
  return d ? int(d->ds.images.size()) : 0;
}

int spr_dataset_person_count(const spr_dataset* d) {
  if (!d) return 0;
  int n = 0;
  for (const spr::DatasetImage& img : d->ds.images) {
    n += int(img.persons.size());
  }
  return n;
}

int spr_dataset_dim(const spr_dataset* d) { return d ? d->ds.dim : 0; }

spr_status spr_dataset_save(const spr_dataset* d, const char* path) {
  return guarded([&]() {
    if (!d || !path) {
      throw spr::Error::usage("dataset and path are required");
    }
    spr::save_dataset(d->ds, path);
  });
}

/* ------------------------------------------------------------------ */

spr_status spr_normalization_factor(int height, int width, double* out) {
  return guarded([&]() {
    if (!out) throw spr::Error::usage("output pointer is required");
    *out = spr::normalization_factor(height, width);
  });
}

/* ------------------------------------------------------------------ */

spr_status spr_run_encode(const char* options_json, char** out_report) {
  return guarded([&]() {
    const json j = parse_options(options_json);
    allow_only(j, {"dataset", "out_dir", "mode", "sigma", "tau",
                   "tau_as_radius", "stride", "depth_norm", "threads"});
    spr::EncodeOptions opt;
    opt.dataset_path = need_option_string(j, "dataset");
    opt.out_dir = need_option_string(j, "out_dir");
    opt.mode = opt_mode(j, "mode", spr::MapMode::vanilla);
    opt_double(j, "sigma", opt.encoder.sigma);
    opt_double(j, "tau", opt.encoder.tau);
    opt_bool(j, "tau_as_radius", opt.encoder.tau_as_radius);
    opt_int(j, "stride", opt.encoder.stride);
    opt_double(j, "depth_norm", opt.encoder.depth_norm);
    opt_int(j, "threads", opt.threads);
    report_out(out_report, spr::run_encode(opt));
  });
}

spr_status spr_run_decode(const char* options_json, char** out_report) {
  return guarded([&]() {
    const json j = parse_options(options_json);
    allow_only(j, {"maps", "out", "mode", "window", "threshold", "max_peaks",
                   "refine", "threads"});
    spr::DecodeOptions opt;
    opt.maps_dir = need_option_string(j, "maps");
    opt.out_path = need_option_string(j, "out");
    opt_string(j, "mode", opt.expect_mode);
    read_nms(j, opt.nms);
    opt_int(j, "threads", opt.threads);
    report_out(out_report, spr::run_decode(opt));
  });
}

spr_status spr_run_roundtrip(const char* options_json, char** out_report) {
  return guarded([&]() {
    const json j = parse_options(options_json);
    allow_only(j, {"seed", "scenes", "mode", "sigma", "tau", "stride",
                   "image", "n_min", "n_max", "dim", "report", "threads"});
    spr::RoundTripOptions opt;
    opt_u64(j, "seed", opt.seed);
    opt_int(j, "scenes", opt.scenes);
    opt.mode = opt_mode(j, "mode", spr::MapMode::vanilla);
    opt_double(j, "sigma", opt.encoder.sigma);
    opt_double(j, "tau", opt.encoder.tau);
    opt_int(j, "stride", opt.encoder.stride);
    int image = 0;
    opt_int(j, "image", image);
    if (image > 0) {
      opt.synth.image_height = image;
      opt.synth.image_width = image;
    }
    opt_int(j, "n_min", opt.synth.n_min);
    opt_int(j, "n_max", opt.synth.n_max);
    opt_int(j, "dim", opt.synth.dim);
    opt.synth.sigma = opt.encoder.sigma;
    opt_string(j, "report", opt.report_path);
    opt_int(j, "threads", opt.threads);
    report_out(out_report, spr::run_roundtrip(opt));
  });
}

spr_status spr_run_tau_sweep(const char* options_json, char** out_report) {
  return guarded([&]() {
    const json j = parse_options(options_json);
    allow_only(j, {"from", "to", "seed", "scenes", "mode", "image", "overlap",
                   "report", "threads"});
    spr::TauSweepOptions opt;
    opt_int(j, "from", opt.tau_from);
    opt_int(j, "to", opt.tau_to);
    opt_u64(j, "seed", opt.seed);
    opt_int(j, "scenes", opt.scenes);
    opt.mode = opt_mode(j, "mode", spr::MapMode::vanilla);
    int image = 0;
    opt_int(j, "image", image);
    if (image > 0) {
      opt.synth.image_height = image;
      opt.synth.image_width = image;
    }
    opt_double(j, "overlap", opt.synth.overlap);
    opt_string(j, "report", opt.report_path);
    opt_int(j, "threads", opt.threads);
    report_out(out_report, spr::run_tau_sweep(opt));
  });
}

spr_status spr_run_train_toy(const char* options_json, char** out_report) {
  return guarded([&]() {
    const json j = parse_options(options_json);
    allow_only(j, {"seed", "scenes", "image_size", "stages", "mode", "epochs",
                   "learning_rate", "beta", "unmasked", "stop_at_pckh",
                   "eval_every", "alpha", "checkpoint", "history"});
    spr::TrainToyOptions opt;
    opt_u64(j, "seed", opt.seed);
    opt_int(j, "scenes", opt.scenes);
    opt_int(j, "image_size", opt.image_size);
    opt_int(j, "stages", opt.stages);
    opt.mode = opt_mode(j, "mode", spr::MapMode::vanilla);
    opt_int(j, "epochs", opt.train.epochs);
    opt_double(j, "learning_rate", opt.train.learning_rate);
    opt_double(j, "beta", opt.train.loss.beta);
    bool unmasked = false;
    opt_bool(j, "unmasked", unmasked);
    if (unmasked) opt.train.loss.mask_mode = spr::MaskMode::unmasked;
    opt_double(j, "stop_at_pckh", opt.stop_at_pckh);
    opt_int(j, "eval_every", opt.eval_every);
    opt_double(j, "alpha", opt.alpha);
    opt_string(j, "checkpoint", opt.checkpoint_path);
    opt_string(j, "history", opt.history_path);
    opt.train.seed = opt.seed;
    report_out(out_report, spr::run_train_toy(opt));
  });
}

spr_status spr_run_eval(const char* options_json, char** out_report) {
  return guarded([&]() {
    const json j = parse_options(options_json);
    allow_only(j, {"pred", "gt", "metric", "alpha", "radius", "root_gate"});
    spr::EvalOptions opt;
    opt.pred_path = need_option_string(j, "pred");
    opt.gt_path = need_option_string(j, "gt");
    opt_string(j, "metric", opt.metric);
    opt_double(j, "alpha", opt.alpha);
    opt_double(j, "radius", opt.radius);
    opt_double(j, "root_gate", opt.root_gate);
    report_out(out_report, spr::run_eval(opt));
  });
}

spr_status spr_run_bench(const char* options_json, char** out_report) {
  return guarded([&]() {
    const json j = parse_options(options_json);
    allow_only(j, {"height", "width", "k", "n", "reps"});
    spr::BenchOptions opt;
    opt_int(j, "height", opt.height);
    opt_int(j, "width", opt.width);
    opt_int(j, "k", opt.k);
    opt_int(j, "n", opt.persons);
    opt_int(j, "reps", opt.repetitions);
    report_out(out_report, spr::run_bench(opt));
  });
}

spr_status spr_run_scaling_study(const char* options_json, char** out_report) {
  return guarded([&]() {
    const json j = parse_options(options_json);
    allow_only(j, {"resolutions", "persons", "k", "reps", "k_sweep",
                   "k_sweep_persons", "report"});
    spr::ScalingOptions opt;
    if (j.contains("resolutions")) {
      if (!j["resolutions"].is_array()) {
        throw spr::Error::usage("option 'resolutions' must be an array");
      }
      opt.resolutions.clear();
      for (const json& r : j["resolutions"]) {
        if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() ||
            !r[1].is_number_integer()) {
          throw spr::Error::usage(
              "option 'resolutions' must hold [height, width] pairs");
        }
        opt.resolutions.emplace_back(r[0].get<int>(), r[1].get<int>());
      }
    }
    if (j.contains("persons")) {
      if (!j["persons"].is_array()) {
        throw spr::Error::usage("option 'persons' must be an array");
      }
      opt.persons.clear();
      for (const json& n : j["persons"]) {
        if (!n.is_number_integer()) {
          throw spr::Error::usage("option 'persons' must hold integers");
        }
        opt.persons.push_back(n.get<int>());
      }
    }
    if (j.contains("k_sweep")) {
      if (!j["k_sweep"].is_array()) {
        throw spr::Error::usage("option 'k_sweep' must be an array");
      }
      opt.k_sweep.clear();
      for (const json& n : j["k_sweep"]) {
        if (!n.is_number_integer()) {
          throw spr::Error::usage("option 'k_sweep' must hold integers");
        }
        opt.k_sweep.push_back(n.get<int>());
      }
    }
    opt_int(j, "k", opt.k);
    opt_int(j, "reps", opt.repetitions);
    opt_int(j, "k_sweep_persons", opt.k_sweep_persons);
    opt_string(j, "report", opt.report_path);
    report_out(out_report, spr::run_scaling_study(opt));
  });
}

spr_status spr_run_synth(const char* options_json, char** out_report) {
  return guarded([&]() {
    const json j = parse_options(options_json);
    allow_only(j, {"seed", "scenes", "out", "render_dir", "image_height",
                   "image_width", "n_min", "n_max", "dim", "skeleton",
                   "overlap"});
    spr::SynthOptions opt;
    opt_u64(j, "seed", opt.synth.seed);
    opt_int(j, "scenes", opt.scenes);
    opt.out_dataset = need_option_string(j, "out");
    opt_string(j, "render_dir", opt.render_dir);
    opt_int(j, "image_height", opt.synth.image_height);
    opt_int(j, "image_width", opt.synth.image_width);
    opt_int(j, "n_min", opt.synth.n_min);
    opt_int(j, "n_max", opt.synth.n_max);
    opt_int(j, "dim", opt.synth.dim);
    opt_double(j, "overlap", opt.synth.overlap);
    if (j.contains("skeleton")) {
      opt.synth.skeleton =
          spr::skeleton_from_json(j["skeleton"], "synth options");
    }
    report_out(out_report, spr::run_synth(opt));
  });
}

}  // extern "C"
