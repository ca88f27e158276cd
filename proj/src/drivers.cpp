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

#include "drivers.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "error.hpp"
#include "eval.hpp"

namespace spr {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Image ids become file name stems, so they must stay inside one directory.
void require_path_safe_id(const std::string& id) {
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) {
      throw Error::data("image id '" + id +
                        "' contains characters unusable in file names");
    }
  }
  if (id.empty() || id[0] == '.') {
    throw Error::data("image id '" + id + "' cannot name an output file");
  }
}

void create_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error::io("cannot create directory '" + dir + "': " + ec.message());
  }
}

json machine_descriptor() {
  json j;
#if defined(__linux__)
  j["os"] = "linux";
#elif defined(__APPLE__)
  j["os"] = "darwin";
#else
  j["os"] = "other";
#endif
#if defined(__VERSION__)
  j["compiler"] = __VERSION__;
#else
  j["compiler"] = "unknown";
#endif
#if defined(NDEBUG)
  j["build"] = "release";
#else
  j["build"] = "debug";
#endif
  j["hardware_threads"] = std::thread::hardware_concurrency();
  return j;
}

std::string scene_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%04d", index);
  return buf;
}

// Ground-truth poses and per-person reference lengths for a batch of
// generated scenes.
struct SynthTruth {
  std::vector<std::vector<Pose>> gts;
  std::vector<std::vector<double>> refs;
};

SynthTruth truth_of(const std::vector<Scene>& scenes,
                    const SkeletonSpec& spec, double ref_length) {
  SynthTruth t;
  t.gts.reserve(scenes.size());
  t.refs.reserve(scenes.size());
  for (const Scene& s : scenes) {
    t.gts.push_back(s.persons);
    std::vector<double> r;
    for (const Pose& p : s.persons) {
      r.push_back(head_size(p, spec, ref_length));
    }
    t.refs.push_back(std::move(r));
  }
  return t;
}

}  // namespace

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (threads <= 0) threads = default_thread_count();
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr first;
  std::vector<std::thread> pool;
  pool.reserve(size_t(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error::data("fit_line: need at least two points");
  }
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) {
    throw Error::data("fit_line: x values are all identical");
  }
  LineFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += e * e;
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  if (ss_tot == 0.0) {
    fit.r2 = ss_res == 0.0 ? 1.0 : 0.0;
  } else {
    fit.r2 = 1.0 - ss_res / ss_tot;
  }
  return fit;
}

// --------------------------------------------------------------------------
// encode

json run_encode(const EncodeOptions& opt) {
  validate_config(opt.encoder);
  if (opt.out_dir.empty()) throw Error::usage("encode: output dir required");
  const PoseDataset ds = load_dataset(opt.dataset_path);
  for (const DatasetImage& img : ds.images) require_path_safe_id(img.id);
  create_output_dir(opt.out_dir);

  EncodeManifest man;
  man.mode = opt.mode;
  man.dim = ds.dim;
  man.sigma = opt.encoder.sigma;
  man.tau = opt.encoder.tau;
  man.tau_as_radius = opt.encoder.tau_as_radius;
  man.stride = opt.encoder.stride;
  man.depth_norm = opt.encoder.depth_norm;
  man.skeleton = ds.skeleton;
  man.images.resize(ds.images.size());

  parallel_for(int(ds.images.size()), opt.threads, [&](int i) {
    const DatasetImage& img = ds.images[size_t(i)];
    Scene scene;
    scene.image_height = img.height;
    scene.image_width = img.width;
    scene.dim = ds.dim;
    for (const DatasetPerson& p : img.persons) scene.persons.push_back(p.pose);

    const EncodedScene enc =
        encode_scene(scene, ds.skeleton, opt.mode, opt.encoder);

    ManifestImage mi;
    mi.id = img.id;
    mi.width = img.width;
    mi.height = img.height;
    mi.map_height = enc.confidence.height;
    mi.map_width = enc.confidence.width;
    mi.n_persons = int(img.persons.size());
    mi.conf_file = img.id + "_conf.spmt";
    mi.disp_file = img.id + "_disp.spmt";
    write_confidence_tensor(opt.out_dir + "/" + mi.conf_file, enc.confidence);
    write_stack_tensor(opt.out_dir + "/" + mi.disp_file, enc.displacements);
    if (ds.dim == 3) {
      mi.depth_file = img.id + "_depth.spmt";
      write_depth_tensor(opt.out_dir + "/" + mi.depth_file, enc.displacements);
    }
    man.images[size_t(i)] = std::move(mi);
  });

  save_manifest(man, opt.out_dir);  // written last: presence means complete

  json out;
  out["images"] = ds.images.size();
  out["mode"] = map_mode_name(opt.mode);
  out["dim"] = ds.dim;
  out["sigma"] = opt.encoder.sigma;
  out["tau"] = opt.encoder.tau;
  out["stride"] = opt.encoder.stride;
  out["out_dir"] = opt.out_dir;
  return out;
}

// --------------------------------------------------------------------------
// decode

json run_decode(const DecodeOptions& opt) {
  if (opt.out_path.empty()) throw Error::usage("decode: output path required");
  const EncodeManifest man = load_manifest(opt.maps_dir);
  if (!opt.expect_mode.empty()) {
    const MapMode want = map_mode_from_name(opt.expect_mode);
    if (want != man.mode) {
      throw Error::data("mode mismatch: maps in '" + opt.maps_dir +
                        "' were encoded as " + map_mode_name(man.mode));
    }
  }

  PoseDataset out;
  out.skeleton = man.skeleton;
  out.dim = man.dim;
  out.images.resize(man.images.size());

  EncoderConfig cfg;
  cfg.sigma = man.sigma;
  cfg.tau = man.tau;
  cfg.tau_as_radius = man.tau_as_radius;
  cfg.stride = man.stride;
  cfg.depth_norm = man.depth_norm;

  std::atomic<long> total_persons{0};
  parallel_for(int(man.images.size()), opt.threads, [&](int i) {
    const ManifestImage& mi = man.images[size_t(i)];
    const ConfidenceMap cmap =
        read_confidence_tensor(opt.maps_dir + "/" + mi.conf_file);
    if (cmap.height != mi.map_height || cmap.width != mi.map_width) {
      throw Error::data(mi.conf_file +
                        ": map dims do not match the manifest");
    }
    DisplacementMapStack stack;
    read_stack_tensor(opt.maps_dir + "/" + mi.disp_file, stack);
    if (stack.k != man.skeleton.joint_count() || stack.dim != man.dim ||
        stack.height != mi.map_height || stack.width != mi.map_width) {
      throw Error::data(mi.disp_file +
                        ": stack shape does not match the manifest");
    }
    stack.mode = man.mode;
    stack.image_height = mi.height;
    stack.image_width = mi.width;
    stack.stride = man.stride;
    stack.depth_norm = man.depth_norm;
    if (!mi.depth_file.empty()) {
      read_depth_tensor(opt.maps_dir + "/" + mi.depth_file, stack);
    }

    const std::vector<DecodedPose> decoded =
        decode(cmap, stack, cfg, man.skeleton, opt.nms);

    DatasetImage di;
    di.id = mi.id;
    di.width = mi.width;
    di.height = mi.height;
    for (const DecodedPose& dp : decoded) {
      DatasetPerson p;
      p.pose = dp.pose;
      p.root = dp.root;
      p.score = dp.score;
      di.persons.push_back(std::move(p));
    }
    total_persons.fetch_add(long(di.persons.size()));
    out.images[size_t(i)] = std::move(di);
  });

  save_dataset(out, opt.out_path);

  json rep;
  rep["images"] = man.images.size();
  rep["persons"] = total_persons.load();
  rep["mode"] = map_mode_name(man.mode);
  rep["out"] = opt.out_path;
  return rep;
}

// --------------------------------------------------------------------------
// roundtrip

json run_roundtrip(const RoundTripOptions& opt) {
  validate_config(opt.encoder);
  if (opt.scenes < 1) throw Error::usage("roundtrip: need at least one scene");
  SynthConfig synth = opt.synth;
  synth.seed = opt.seed;
  synth.render = false;
  validate_config(synth);
  const SkeletonSpec spec = resolved_skeleton(synth);

  // A decoded root this close to the sampled root claims the person.
  const double match_radius =
      std::max(1.5, synth.sigma * (1.0 - synth.overlap));

  struct Row {
    int n = 0;
    int n_hat = 0;
    int recovered = 0;
    double max_err = 0.0;
    double max_z_err = 0.0;
  };
  std::vector<Row> rows(size_t(opt.scenes));

  const auto t0 = Clock::now();
  parallel_for(opt.scenes, opt.threads, [&](int i) {
    const GeneratedScene g = generate_scene(synth, uint64_t(i));
    const EncodedScene enc =
        encode_scene(g.scene, spec, opt.mode, opt.encoder);
    const std::vector<DecodedPose> decoded =
        decode(enc.confidence, enc.displacements, opt.encoder, spec, opt.nms);

    Row row;
    row.n = g.scene.person_count();
    row.n_hat = int(decoded.size());
    std::vector<bool> used(decoded.size(), false);
    for (size_t pi = 0; pi < g.scene.persons.size(); ++pi) {
      // Nearest unused decoded root within the separation radius.
      int best = -1;
      double best_d = match_radius;
      for (size_t di = 0; di < decoded.size(); ++di) {
        if (used[di]) continue;
        const double d = std::hypot(decoded[di].root.x - g.roots[pi].x,
                                    decoded[di].root.y - g.roots[pi].y);
        if (d <= best_d) {
          best_d = d;
          best = int(di);
        }
      }
      if (best < 0) continue;
      used[size_t(best)] = true;

      const Pose& gt = g.scene.persons[pi];
      const Pose& pred = decoded[size_t(best)].pose;
      bool all_joints = true;
      double max_err = 0.0;
      double max_z = 0.0;
      for (size_t j = 0; j < gt.joints.size(); ++j) {
        if (!gt.joints[j].visible) continue;
        if (!pred.joints[j].visible) {
          all_joints = false;
          break;
        }
        const double e = std::hypot(pred.joints[j].p.x - gt.joints[j].p.x,
                                    pred.joints[j].p.y - gt.joints[j].p.y);
        max_err = std::max(max_err, e);
        if (g.scene.dim == 3) {
          max_z = std::max(max_z,
                           std::abs(pred.joints[j].p.z - gt.joints[j].p.z));
        }
      }
      if (!all_joints) continue;
      ++row.recovered;
      row.max_err = std::max(row.max_err, max_err);
      row.max_z_err = std::max(row.max_z_err, max_z);
    }
    rows[size_t(i)] = row;
  });
  const double elapsed = seconds_since(t0);

  int persons = 0, recovered = 0, exact_scenes = 0;
  double max_err = 0.0, max_z_err = 0.0;
  json jrows = json::array();
  for (size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    persons += r.n;
    recovered += r.recovered;
    if (r.recovered == r.n && r.n_hat == r.n) ++exact_scenes;
    max_err = std::max(max_err, r.max_err);
    max_z_err = std::max(max_z_err, r.max_z_err);
    json jr;
    jr["scene"] = i;
    jr["n"] = r.n;
    jr["n_hat"] = r.n_hat;
    jr["recovered"] = r.recovered;
    jr["max_error_px"] = r.max_err;
    if (synth.dim == 3) jr["max_z_error"] = r.max_z_err;
    jrows.push_back(std::move(jr));
  }

  json rep;
  rep["mode"] = map_mode_name(opt.mode);
  rep["seed"] = opt.seed;
  rep["scenes"] = opt.scenes;
  rep["persons"] = persons;
  rep["persons_recovered"] = recovered;
  rep["scenes_exact"] = exact_scenes;
  rep["all_recovered"] = (recovered == persons) && (exact_scenes == opt.scenes);
  rep["max_error_px"] = max_err;
  if (synth.dim == 3) rep["max_z_error"] = max_z_err;
  rep["stride"] = opt.encoder.stride;
  rep["elapsed_s"] = elapsed;
  rep["rows"] = std::move(jrows);
  if (!opt.report_path.empty()) {
    atomic_write_text(opt.report_path, rep.dump(2) + "\n");
  }
  return rep;
}

// --------------------------------------------------------------------------
// tau sweep

SynthConfig tau_sweep_synth_defaults() {
  SynthConfig s;
  s.image_height = 64;
  s.image_width = 64;
  s.n_min = 2;
  s.n_max = 3;
  s.overlap = 0.8;
  return s;
}

json run_tau_sweep(const TauSweepOptions& opt) {
  if (opt.tau_from < 0 || opt.tau_to < opt.tau_from) {
    throw Error::usage("tau-sweep: need 0 <= from <= to");
  }
  if (opt.scenes < 1) throw Error::usage("tau-sweep: need at least one scene");
  SynthConfig synth = opt.synth;
  synth.seed = opt.seed;
  synth.render = false;
  validate_config(synth);
  const SkeletonSpec spec = resolved_skeleton(synth);

  std::vector<Scene> scenes(size_t(opt.scenes));
  parallel_for(opt.scenes, opt.threads, [&](int i) {
    scenes[size_t(i)] = generate_scene(synth, uint64_t(i)).scene;
  });
  const SynthTruth truth = truth_of(scenes, spec, synth.ref_length);

  const auto t0 = Clock::now();
  json rows = json::array();
  double prev_overlap = -1.0;
  bool monotone = true;
  for (int tau = opt.tau_from; tau <= opt.tau_to; ++tau) {
    EncoderConfig cfg;
    cfg.tau = double(tau);
    std::vector<std::vector<DecodedPose>> preds(scenes.size());
    std::vector<long> shared(scenes.size(), 0);
    std::vector<long> cells(scenes.size(), 0);
    parallel_for(int(scenes.size()), opt.threads, [&](int i) {
      const EncodedScene enc =
          encode_scene(scenes[size_t(i)], spec, opt.mode, cfg);
      const DisplacementMapStack& st = enc.displacements;
      long over = 0;
      for (uint16_t c : st.contributors) over += (c > 1) ? 1 : 0;
      shared[size_t(i)] = over;
      cells[size_t(i)] = long(st.contributors.size());
      preds[size_t(i)] =
          decode(enc.confidence, st, cfg, spec, opt.nms);
    });
    long over_total = 0, cell_total = 0;
    for (size_t i = 0; i < scenes.size(); ++i) {
      over_total += shared[i];
      cell_total += cells[i];
    }
    const double overlap_fraction =
        cell_total > 0 ? double(over_total) / double(cell_total) : 0.0;
    const MetricReport rep =
        mean_ap(preds, truth.gts, spec, truth.refs, 0.5);

    if (overlap_fraction < prev_overlap) monotone = false;
    prev_overlap = overlap_fraction;

    json row;
    row["tau"] = tau;
    row["overlap_fraction"] = overlap_fraction;
    row["shared_cells"] = over_total;
    row["map"] = rep.total_map;
    rows.push_back(std::move(row));
  }

  json rep;
  rep["mode"] = map_mode_name(opt.mode);
  rep["seed"] = opt.seed;
  rep["scenes"] = opt.scenes;
  rep["tau_from"] = opt.tau_from;
  rep["tau_to"] = opt.tau_to;
  rep["overlap_monotone"] = monotone;
  rep["elapsed_s"] = seconds_since(t0);
  rep["rows"] = std::move(rows);
  if (!opt.report_path.empty()) {
    atomic_write_text(opt.report_path, rep.dump(2) + "\n");
  }
  return rep;
}

// --------------------------------------------------------------------------
// train-toy

TrainConfig train_toy_defaults() {
  TrainConfig cfg;
  cfg.epochs = 500;
  return cfg;
}

double decoded_train_pckh(const ToyRegressor<float>& model,
                          const std::vector<TrainSample<float>>& samples,
                          const std::vector<Scene>& scenes,
                          const SkeletonSpec& spec, const EncoderConfig& cfg,
                          const NmsParams& nms, double alpha,
                          double ref_length) {
  if (samples.size() != scenes.size()) {
    throw Error::data("train pckh: sample and scene counts differ");
  }
  size_t correct = 0, total = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const TrainSample<float>& sample = samples[i];
    const ForwardResult<float> fr =
        forward(model, sample.image, sample.height, sample.width);
    const StagePrediction sp =
        stage_prediction(fr, model.t - 1, sample.target_disp);
    const std::vector<DecodedPose> decoded =
        decode(sp.confidence, sp.displacements, cfg, spec, nms);

    const std::vector<Pose>& gts = scenes[i].persons;
    std::vector<double> refs;
    for (const Pose& p : gts) refs.push_back(head_size(p, spec, ref_length));
    const std::vector<MatchPair> pairs =
        match_persons(decoded, gts, spec, refs, alpha);

    for (const Pose& gt : gts) {
      for (const Joint& j : gt.joints) {
        if (j.visible) ++total;
      }
    }
    for (const MatchPair& mp : pairs) {
      const Pose& gt = gts[size_t(mp.gt_index)];
      const Pose& pred = decoded[size_t(mp.pred_index)].pose;
      for (size_t j = 0; j < gt.joints.size(); ++j) {
        if (!gt.joints[j].visible || !pred.joints[j].visible) continue;
        if (pckh_correct(pred.joints[j].p, gt.joints[j].p,
                         refs[size_t(mp.gt_index)], alpha)) {
          ++correct;
        }
      }
    }
  }
  return total > 0 ? double(correct) / double(total) : 1.0;
}

json run_train_toy(const TrainToyOptions& opt) {
  validate_config(opt.train);
  validate_config(opt.encoder);
  if (opt.scenes < 1) throw Error::usage("train-toy: need at least one scene");
  if (opt.image_size < 16) throw Error::usage("train-toy: image size too small");
  if (opt.stages < 1) throw Error::usage("train-toy: need at least one stage");
  if (opt.eval_every < 1) throw Error::usage("train-toy: eval period must be >= 1");

  SynthConfig synth;
  synth.seed = opt.seed;
  synth.image_height = opt.image_size;
  synth.image_width = opt.image_size;
  synth.n_min = 1;
  synth.n_max = 2;
  synth.render = true;
  // The two-stage regressor sees a 13x13 patch per cell. Keep every limb
  // link inside that radius so displacement targets stay locally visible.
  synth.len_level2 = {3, 5};
  synth.len_level3 = {3, 5};
  synth.len_level4 = {2, 4};
  const SkeletonSpec spec = resolved_skeleton(synth);

  std::vector<TrainSample<float>> samples;
  std::vector<Scene> scenes;
  for (int i = 0; i < opt.scenes; ++i) {
    const GeneratedScene g = generate_scene(synth, uint64_t(i));
    const EncodedScene enc = encode_scene(g.scene, spec, opt.mode, opt.encoder);
    TrainSample<float> s;
    s.image = g.image.rgb;
    s.height = g.image.height;
    s.width = g.image.width;
    s.target_conf = enc.confidence;
    s.target_disp = enc.displacements;
    samples.push_back(std::move(s));
    scenes.push_back(g.scene);
  }

  ToyRegressor<float> model = make_toy_regressor<float>(
      opt.stages, spec.joint_count(), spec.dim, 3, opt.seed);

  double last_eval_pckh = -1.0;
  const EpochHook<float> hook =
      [&](int epoch, double, const ToyRegressor<float>& m) {
        if (opt.stop_at_pckh <= 0.0) return false;
        if ((epoch + 1) % opt.eval_every != 0) return false;
        last_eval_pckh = decoded_train_pckh(m, samples, scenes, spec,
                                            opt.encoder, opt.nms, opt.alpha,
                                            synth.ref_length);
        return last_eval_pckh >= opt.stop_at_pckh;
      };

  const auto t0 = Clock::now();
  const TrainResult tr = train_toy(model, samples, opt.train, hook);
  const double train_s = seconds_since(t0);
  const double pckh = decoded_train_pckh(model, samples, scenes, spec,
                                         opt.encoder, opt.nms, opt.alpha,
                                         synth.ref_length);

  if (!opt.history_path.empty()) {
    std::string text;
    for (double v : tr.loss_history) {
      text += json(v).dump();
      text += "\n";
    }
    atomic_write_text(opt.history_path, text);
  }
  if (!opt.checkpoint_path.empty()) {
    CheckpointMeta meta;
    meta.t = model.t;
    meta.k = model.k;
    meta.dim = model.dim;
    meta.in_channels = model.in_channels;
    meta.seed = opt.seed;
    meta.epoch = tr.epochs_run;
    meta.extra = json{{"learning_rate", opt.train.learning_rate},
                      {"beta", opt.train.loss.beta},
                      {"mode", map_mode_name(opt.mode)},
                      {"scenes", opt.scenes},
                      {"image_size", opt.image_size},
                      {"train_pckh", pckh}};
    save_checkpoint(opt.checkpoint_path, model, meta);
  }

  json rep;
  rep["seed"] = opt.seed;
  rep["scenes"] = opt.scenes;
  rep["image_size"] = opt.image_size;
  rep["stages"] = opt.stages;
  rep["mode"] = map_mode_name(opt.mode);
  rep["epochs_run"] = tr.epochs_run;
  rep["stopped_early"] = tr.stopped_early;
  rep["final_loss"] =
      tr.loss_history.empty() ? 0.0 : tr.loss_history.back();
  rep["first_loss"] =
      tr.loss_history.empty() ? 0.0 : tr.loss_history.front();
  rep["train_pckh"] = pckh;
  rep["alpha"] = opt.alpha;
  rep["elapsed_s"] = train_s;
  if (!opt.checkpoint_path.empty()) rep["checkpoint"] = opt.checkpoint_path;
  if (!opt.history_path.empty()) rep["history"] = opt.history_path;
  return rep;
}

// --------------------------------------------------------------------------
// eval

json run_eval(const EvalOptions& opt) {
  const PoseDataset pred = load_dataset(opt.pred_path);
  const PoseDataset gt = load_dataset(opt.gt_path);
  if (pred.skeleton.joint_names != gt.skeleton.joint_names ||
      pred.dim != gt.dim) {
    throw Error::data("eval: prediction and ground-truth skeletons differ");
  }

  std::set<std::string> gt_ids;
  for (const DatasetImage& img : gt.images) gt_ids.insert(img.id);
  std::map<std::string, const DatasetImage*> pred_by_id;
  for (const DatasetImage& img : pred.images) {
    if (!gt_ids.count(img.id)) {
      throw Error::data("eval: prediction image '" + img.id +
                        "' has no ground-truth counterpart");
    }
    pred_by_id[img.id] = &img;
  }

  std::vector<std::vector<DecodedPose>> preds;
  std::vector<std::vector<Pose>> gts;
  std::vector<std::vector<double>> refs;
  long pred_persons = 0, gt_persons = 0;
  for (const DatasetImage& gimg : gt.images) {
    std::vector<Pose> g;
    std::vector<double> r;
    for (const DatasetPerson& p : gimg.persons) {
      g.push_back(p.pose);
      r.push_back(opt.metric == "map" ? resolve_ref_length(gt, p) : 0.0);
    }
    gt_persons += long(g.size());
    gts.push_back(std::move(g));
    refs.push_back(std::move(r));

    std::vector<DecodedPose> d;
    auto it = pred_by_id.find(gimg.id);
    if (it != pred_by_id.end()) {
      for (const DatasetPerson& p : it->second->persons) {
        DecodedPose dp;
        dp.pose = p.pose;
        dp.score = p.score >= 0 ? p.score : 1.0;
        if (p.root.has_value()) {
          dp.root = *p.root;
        } else {
          bool any = false;
          for (const Joint& j : p.pose.joints) any = any || j.visible;
          dp.root = any ? centroid_root(p.pose)
                        : Vec{std::numeric_limits<double>::infinity(),
                              std::numeric_limits<double>::infinity(),
                              std::numeric_limits<double>::infinity()};
        }
        d.push_back(std::move(dp));
      }
    }
    pred_persons += long(d.size());
    preds.push_back(std::move(d));
  }

  json rep;
  rep["metric"] = opt.metric;
  rep["images"] = gt.images.size();
  rep["gt_persons"] = gt_persons;
  rep["pred_persons"] = pred_persons;
  if (opt.metric == "map") {
    const MetricReport m = mean_ap(preds, gts, gt.skeleton, refs, opt.alpha);
    rep["alpha"] = opt.alpha;
    rep["total_map"] = m.total_map;
    json per_ap = json::object();
    json per_pck = json::object();
    for (size_t j = 0; j < gt.skeleton.joint_names.size(); ++j) {
      const std::string& name = gt.skeleton.joint_names[j];
      per_ap[name] = m.per_joint_ap[j].has_value() ? json(*m.per_joint_ap[j])
                                                   : json(nullptr);
      per_pck[name] = m.per_joint_pck[j];
    }
    rep["per_joint_ap"] = std::move(per_ap);
    rep["per_joint_pck"] = std::move(per_pck);
  } else if (opt.metric == "pck3d") {
    if (gt.dim != 3) {
      throw Error::data("eval: pck3d needs 3D datasets, these are 2D");
    }
    const Pck3dReport m =
        pck3d(preds, gts, gt.skeleton, opt.radius, opt.root_gate);
    rep["radius"] = opt.radius;
    rep["root_gate"] = opt.root_gate;
    rep["total_pct"] = m.total_pct;
    json per = json::object();
    for (size_t j = 0; j < gt.skeleton.joint_names.size(); ++j) {
      per[gt.skeleton.joint_names[j]] = m.per_joint_pct[j];
    }
    rep["per_joint_pct"] = std::move(per);
  } else {
    throw Error::usage("eval: metric must be 'map' or 'pck3d'");
  }
  return rep;
}

// --------------------------------------------------------------------------
// bench and scaling study

namespace {

json bench_row(int height, int width, int k, int n, int reps) {
  const BenchStats st = benchmark_decode(height, width, k, n, reps);
  json row;
  row["height"] = height;
  row["width"] = width;
  row["k"] = k;
  row["n"] = n;
  row["peaks"] = st.peaks;
  row["nk"] = st.peaks * k;
  row["repetitions"] = st.repetitions;
  row["min_ms"] = st.min_ms;
  row["median_ms"] = st.median_ms;
  row["mean_ms"] = st.mean_ms;
  row["cv"] = st.cv;
  row["per_cell_ns"] = st.median_ms * 1.0e6 / (double(height) * width);
  return row;
}

}  // namespace

json run_bench(const BenchOptions& opt) {
  json rep = bench_row(opt.height, opt.width, opt.k, opt.persons,
                       opt.repetitions);
  rep["machine"] = machine_descriptor();
  return rep;
}

json run_scaling_study(const ScalingOptions& opt) {
  if (opt.resolutions.empty() || opt.persons.empty()) {
    throw Error::data("scaling study: empty parameter grid");
  }
  if (opt.repetitions < 1) {
    throw Error::data("scaling study: need at least one repetition");
  }

  json resolutions = json::array();
  for (const auto& [h, w] : opt.resolutions) {
    json rows = json::array();
    std::vector<double> xs, ys;
    for (int n : opt.persons) {
      json row = bench_row(h, w, opt.k, n, opt.repetitions);
      xs.push_back(row["nk"].get<double>());
      ys.push_back(row["median_ms"].get<double>());
      rows.push_back(std::move(row));
    }
    const LineFit fit = fit_line(xs, ys);
    json jr;
    jr["height"] = h;
    jr["width"] = w;
    jr["rows"] = std::move(rows);
    jr["slope_ms_per_nk"] = fit.slope;
    jr["intercept_ms"] = fit.intercept;
    jr["r2"] = fit.r2;
    resolutions.push_back(std::move(jr));
  }

  json k_rows = json::array();
  double max_doubling_ratio = 0.0;
  if (!opt.k_sweep.empty()) {
    const auto [h, w] = opt.resolutions.back();
    std::vector<double> medians;
    for (int k : opt.k_sweep) {
      json row = bench_row(h, w, k, opt.k_sweep_persons, opt.repetitions);
      medians.push_back(row["median_ms"].get<double>());
      k_rows.push_back(std::move(row));
    }
    for (size_t i = 0; i + 1 < opt.k_sweep.size(); ++i) {
      if (opt.k_sweep[i + 1] == 2 * opt.k_sweep[i] && medians[i] > 0) {
        max_doubling_ratio =
            std::max(max_doubling_ratio, medians[i + 1] / medians[i]);
      }
    }
  }

  json rep;
  rep["machine"] = machine_descriptor();
  rep["k"] = opt.k;
  rep["repetitions"] = opt.repetitions;
  rep["resolutions"] = std::move(resolutions);
  if (!opt.k_sweep.empty()) {
    json ks;
    ks["persons"] = opt.k_sweep_persons;
    ks["rows"] = std::move(k_rows);
    ks["max_doubling_ratio"] = max_doubling_ratio;
    rep["k_sweep"] = std::move(ks);
  }
  if (!opt.report_path.empty()) {
    atomic_write_text(opt.report_path, rep.dump(2) + "\n");
  }
  return rep;
}

// --------------------------------------------------------------------------
// synth

json run_synth(const SynthOptions& opt) {
  if (opt.scenes < 1) throw Error::usage("synth: need at least one scene");
  if (opt.out_dataset.empty()) {
    throw Error::usage("synth: output dataset path required");
  }
  SynthConfig synth = opt.synth;
  synth.render = !opt.render_dir.empty();
  validate_config(synth);
  const SkeletonSpec spec = resolved_skeleton(synth);
  if (!opt.render_dir.empty()) create_output_dir(opt.render_dir);

  PoseDataset ds;
  ds.skeleton = spec;
  ds.dim = spec.dim;
  ds.ref_length = synth.ref_length;

  long persons = 0;
  for (int i = 0; i < opt.scenes; ++i) {
    const GeneratedScene g = generate_scene(synth, uint64_t(i));
    DatasetImage img;
    img.id = scene_id(i);
    img.width = g.scene.image_width;
    img.height = g.scene.image_height;
    for (size_t pi = 0; pi < g.scene.persons.size(); ++pi) {
      DatasetPerson p;
      p.pose = g.scene.persons[pi];
      p.root = g.roots[pi];
      img.persons.push_back(std::move(p));
    }
    persons += long(img.persons.size());
    if (!opt.render_dir.empty()) {
      write_ppm(opt.render_dir + "/" + img.id + ".ppm", g.image);
    }
    ds.images.push_back(std::move(img));
  }
  save_dataset(ds, opt.out_dataset);

  json rep;
  rep["scenes"] = opt.scenes;
  rep["persons"] = persons;
  rep["seed"] = synth.seed;
  rep["skeleton"] = spec.name;
  rep["dim"] = spec.dim;
  rep["out"] = opt.out_dataset;
  if (!opt.render_dir.empty()) rep["render_dir"] = opt.render_dir;
  return rep;
}

}  // namespace spr
