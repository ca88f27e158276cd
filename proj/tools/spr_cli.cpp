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

// Command-line shell over the C API. All pose logic lives behind the
// library boundary; this file only parses flags, assembles option JSON, and
// maps status codes to exit codes (0 ok, 2 usage, 3 data, 4 I/O).

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "spr/spr.h"

namespace {

using nlohmann::json;

const char* status_label(spr_status st) {
  switch (st) {
    case SPR_ERROR_USAGE:
      return "usage";
    case SPR_ERROR_DATA:
      return "data";
    case SPR_ERROR_IO:
      return "io";
    default:
      return "internal";
  }
}

// Prints the report on success, else one machine-parseable stderr line.
int finish(spr_status st, char* report) {
  if (st == SPR_OK) {
    if (report) std::printf("%s\n", report);
    spr_string_free(report);
    return 0;
  }
  spr_string_free(report);
  std::fprintf(stderr, "error[%s]: %s\n", status_label(st), spr_last_error());
  return static_cast<int>(st);
}

using Runner = spr_status (*)(const char*, char**);

int run(Runner runner, const json& options) {
  char* report = nullptr;
  const spr_status st = runner(options.dump().c_str(), &report);
  return finish(st, report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose map codec, decoder, toy trainer, and evaluation tools"};
  app.require_subcommand(1);
  app.set_version_flag("--version", []() { return spr_version(); });

  const std::vector<std::string> modes = {"vanilla", "hier", "hierarchical"};

  // encode
  auto* enc = app.add_subcommand(
      "encode", "Build confidence and displacement maps from a dataset");
  std::string enc_dataset, enc_out, enc_mode = "vanilla";
  double enc_sigma = 7.0, enc_tau = 7.0, enc_depth_norm = 10000.0;
  int enc_stride = 1, enc_threads = 0;
  bool enc_tau_radius = false;
  enc->add_option("--dataset", enc_dataset, "Pose dataset JSON")->required();
  enc->add_option("--out", enc_out, "Output map directory")->required();
  enc->add_option("--mode", enc_mode, "Map anchoring: vanilla or hier")
      ->check(CLI::IsMember(modes));
  enc->add_option("--sigma", enc_sigma, "Confidence Gaussian spread (cells)");
  enc->add_option("--tau", enc_tau, "Displacement neighborhood size");
  enc->add_flag("--tau-as-radius", enc_tau_radius,
                "Treat tau as a distance rather than a squared distance");
  enc->add_option("--stride", enc_stride, "Input pixels per map cell");
  enc->add_option("--depth-norm", enc_depth_norm,
                  "Depth normalizer for 3D datasets");
  enc->add_option("--threads", enc_threads,
                  "Worker threads (0 = SPR_THREADS or 1)");

  // decode
  auto* dec = app.add_subcommand(
      "decode", "Recover poses from an encoded map directory");
  std::string dec_maps, dec_out, dec_mode;
  int dec_window = 3, dec_max_peaks = 30, dec_threads = 0;
  double dec_threshold = 0.3;
  bool dec_refine = false;
  dec->add_option("--maps", dec_maps, "Encoded map directory")->required();
  dec->add_option("--out", dec_out, "Predictions JSON path")->required();
  dec->add_option("--mode", dec_mode,
                  "Expected map mode; decoding fails if the maps differ")
      ->check(CLI::IsMember(modes));
  dec->add_option("--nms-window", dec_window, "NMS window size (odd)");
  dec->add_option("--threshold", dec_threshold, "Minimum peak confidence");
  dec->add_option("--max-peaks", dec_max_peaks, "Peak budget per image");
  dec->add_flag("--refine", dec_refine, "Quarter-cell peak refinement");
  dec->add_option("--threads", dec_threads,
                  "Worker threads (0 = SPR_THREADS or 1)");

  // roundtrip
  auto* rt = app.add_subcommand(
      "roundtrip", "Generate scenes, encode, decode, and report errors");
  uint64_t rt_seed = 7;
  int rt_n = 50, rt_image = 0, rt_nmin = 0, rt_nmax = 0, rt_dim = 2,
      rt_stride = 1, rt_threads = 0;
  double rt_sigma = 7.0, rt_tau = 7.0;
  std::string rt_mode = "vanilla", rt_report;
  rt->add_option("--synth-seed", rt_seed, "Scene generator seed");
  rt->add_option("--n", rt_n, "Number of scenes");
  rt->add_option("--mode", rt_mode, "Map anchoring: vanilla or hier")
      ->check(CLI::IsMember(modes));
  rt->add_option("--sigma", rt_sigma, "Confidence Gaussian spread");
  rt->add_option("--tau", rt_tau, "Displacement neighborhood size");
  rt->add_option("--stride", rt_stride, "Input pixels per map cell");
  rt->add_option("--image", rt_image, "Square scene size in pixels");
  rt->add_option("--n-min", rt_nmin, "Minimum persons per scene");
  rt->add_option("--n-max", rt_nmax, "Maximum persons per scene");
  rt->add_option("--dim", rt_dim, "2 for planar scenes, 3 with depth");
  rt->add_option("--report", rt_report, "Write the JSON report here too");
  rt->add_option("--threads", rt_threads, "Worker threads");

  // tau-sweep
  auto* ts = app.add_subcommand(
      "tau-sweep", "Sweep the neighborhood size and report overlap and mAP");
  int ts_from = 1, ts_to = 20, ts_scenes = 24, ts_image = 0, ts_threads = 0;
  uint64_t ts_seed = 5;
  double ts_overlap = -1.0;
  std::string ts_mode = "vanilla", ts_report;
  ts->add_option("--from", ts_from, "First tau value");
  ts->add_option("--to", ts_to, "Last tau value");
  ts->add_option("--seed", ts_seed, "Scene generator seed");
  ts->add_option("--scenes", ts_scenes, "Scenes in the fixed dataset");
  ts->add_option("--mode", ts_mode, "Map anchoring: vanilla or hier")
      ->check(CLI::IsMember(modes));
  ts->add_option("--image", ts_image, "Square scene size in pixels");
  ts->add_option("--overlap", ts_overlap,
                 "Person crowding in [0,1]; higher packs roots closer");
  ts->add_option("--report", ts_report, "Write the JSON report here too");
  ts->add_option("--threads", ts_threads, "Worker threads");

  // train-toy
  auto* tt = app.add_subcommand(
      "train-toy", "Train the small two-head regressor on rendered scenes");
  uint64_t tt_seed = 11;
  int tt_epochs = 500, tt_scenes = 5, tt_image = 64, tt_stages = 2,
      tt_eval_every = 10;
  double tt_lr = 0.003, tt_beta = 0.01, tt_stop = 0.0, tt_alpha = 0.5;
  bool tt_unmasked = false;
  std::string tt_mode = "vanilla", tt_out, tt_history;
  tt->add_option("--synth-seed", tt_seed, "Scene and init seed");
  tt->add_option("--epochs", tt_epochs, "Epoch budget");
  tt->add_option("--out", tt_out, "Checkpoint output path");
  tt->add_option("--history", tt_history, "Loss history path (one row per epoch)");
  tt->add_option("--scenes", tt_scenes, "Training scenes");
  tt->add_option("--image-size", tt_image, "Square scene size in pixels");
  tt->add_option("--stages", tt_stages, "Prediction stages");
  tt->add_option("--mode", tt_mode, "Map anchoring: vanilla or hier")
      ->check(CLI::IsMember(modes));
  tt->add_option("--learning-rate", tt_lr, "Initial step size");
  tt->add_option("--beta", tt_beta, "Displacement loss weight");
  tt->add_flag("--unmasked", tt_unmasked,
               "Supervise displacement cells outside target neighborhoods too");
  tt->add_option("--stop-at-pckh", tt_stop,
                 "Stop once decoded train PCKh reaches this (0 disables)");
  tt->add_option("--eval-every", tt_eval_every,
                 "Epochs between early-stop checks");
  tt->add_option("--alpha", tt_alpha, "PCKh fraction");

  // eval
  auto* ev = app.add_subcommand(
      "eval", "Score a predictions file against ground truth");
  std::string ev_pred, ev_gt, ev_metric = "map";
  double ev_alpha = 0.5, ev_radius = 150.0, ev_gate = 500.0;
  ev->add_option("--pred", ev_pred, "Predictions dataset JSON")->required();
  ev->add_option("--gt", ev_gt, "Ground-truth dataset JSON")->required();
  ev->add_option("--metric", ev_metric, "map or pck3d")
      ->check(CLI::IsMember({"map", "pck3d"}));
  ev->add_option("--alpha", ev_alpha, "PCKh fraction for map");
  ev->add_option("--radius", ev_radius, "pck3d correctness radius");
  ev->add_option("--root-gate", ev_gate, "pck3d root matching gate");

  // bench
  auto* be = app.add_subcommand(
      "bench", "Time decoding of a synthetic map stack");
  int be_h = 96, be_w = 96, be_k = 16, be_n = 8, be_reps = 100;
  be->add_option("--height", be_h, "Map height in cells");
  be->add_option("--width", be_w, "Map width in cells");
  be->add_option("--k", be_k, "Joint channels");
  be->add_option("--n", be_n, "Persons in the fixture");
  be->add_option("--reps", be_reps, "Timed repetitions");

  // scaling
  auto* sc = app.add_subcommand(
      "scaling", "Decode latency across person counts and resolutions");
  int sc_k = 16, sc_reps = 200, sc_kn = 8;
  std::string sc_report;
  sc->add_option("--k", sc_k, "Joint channels for the person sweep");
  sc->add_option("--reps", sc_reps, "Timed repetitions per cell");
  sc->add_option("--k-sweep-persons", sc_kn, "Persons for the channel sweep");
  sc->add_option("--report", sc_report, "Write the JSON report here too");

  // synth
  auto* sy = app.add_subcommand(
      "synth", "Generate a seeded synthetic pose dataset");
  uint64_t sy_seed = 1;
  int sy_scenes = 8, sy_h = 96, sy_w = 96, sy_nmin = 1, sy_nmax = 3,
      sy_dim = 2;
  double sy_overlap = 0.0;
  std::string sy_out, sy_render, sy_skeleton;
  sy->add_option("--seed", sy_seed, "Generator seed");
  sy->add_option("--scenes", sy_scenes, "Scene count");
  sy->add_option("--out", sy_out, "Dataset JSON output path")->required();
  sy->add_option("--render-dir", sy_render, "Write PPM renders here");
  sy->add_option("--image-height", sy_h, "Scene height in pixels");
  sy->add_option("--image-width", sy_w, "Scene width in pixels");
  sy->add_option("--n-min", sy_nmin, "Minimum persons per scene");
  sy->add_option("--n-max", sy_nmax, "Maximum persons per scene");
  sy->add_option("--dim", sy_dim, "2 for planar scenes, 3 with depth");
  sy->add_option("--skeleton", sy_skeleton, "Skeleton preset name");
  sy->add_option("--overlap", sy_overlap, "Person crowding in [0,1]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error[usage]: %s\n", e.what());
    return 2;
  }

  if (*enc) {
    json o{{"dataset", enc_dataset}, {"out_dir", enc_out},
           {"mode", enc_mode},       {"sigma", enc_sigma},
           {"tau", enc_tau},         {"tau_as_radius", enc_tau_radius},
           {"stride", enc_stride},   {"depth_norm", enc_depth_norm},
           {"threads", enc_threads}};
    return run(spr_run_encode, o);
  }
  if (*dec) {
    json o{{"maps", dec_maps},           {"out", dec_out},
           {"window", dec_window},       {"threshold", dec_threshold},
           {"max_peaks", dec_max_peaks}, {"refine", dec_refine},
           {"threads", dec_threads}};
    if (dec->count("--mode") > 0) o["mode"] = dec_mode;
    return run(spr_run_decode, o);
  }
  if (*rt) {
    json o{{"seed", rt_seed},     {"scenes", rt_n},
           {"mode", rt_mode},     {"sigma", rt_sigma},
           {"tau", rt_tau},       {"stride", rt_stride},
           {"dim", rt_dim},       {"threads", rt_threads}};
    if (rt_image > 0) o["image"] = rt_image;
    if (rt_nmin > 0) o["n_min"] = rt_nmin;
    if (rt_nmax > 0) o["n_max"] = rt_nmax;
    if (!rt_report.empty()) o["report"] = rt_report;
    return run(spr_run_roundtrip, o);
  }
  if (*ts) {
    json o{{"from", ts_from},     {"to", ts_to},
           {"seed", ts_seed},     {"scenes", ts_scenes},
           {"mode", ts_mode},     {"threads", ts_threads}};
    if (ts_image > 0) o["image"] = ts_image;
    if (ts_overlap >= 0.0) o["overlap"] = ts_overlap;
    if (!ts_report.empty()) o["report"] = ts_report;
    return run(spr_run_tau_sweep, o);
  }
  if (*tt) {
    json o{{"seed", tt_seed},
           {"epochs", tt_epochs},
           {"scenes", tt_scenes},
           {"image_size", tt_image},
           {"stages", tt_stages},
           {"mode", tt_mode},
           {"learning_rate", tt_lr},
           {"beta", tt_beta},
           {"unmasked", tt_unmasked},
           {"stop_at_pckh", tt_stop},
           {"eval_every", tt_eval_every},
           {"alpha", tt_alpha}};
    if (!tt_out.empty()) o["checkpoint"] = tt_out;
    if (!tt_history.empty()) o["history"] = tt_history;
    return run(spr_run_train_toy, o);
  }
  if (*ev) {
    json o{{"pred", ev_pred},     {"gt", ev_gt},
           {"metric", ev_metric}, {"alpha", ev_alpha},
           {"radius", ev_radius}, {"root_gate", ev_gate}};
    return run(spr_run_eval, o);
  }
  if (*be) {
    json o{{"height", be_h},
           {"width", be_w},
           {"k", be_k},
           {"n", be_n},
           {"reps", be_reps}};
    return run(spr_run_bench, o);
  }
  if (*sc) {
    json o{{"k", sc_k}, {"reps", sc_reps}, {"k_sweep_persons", sc_kn}};
    if (!sc_report.empty()) o["report"] = sc_report;
    return run(spr_run_scaling_study, o);
  }
  if (*sy) {
    json o{{"seed", sy_seed},       {"scenes", sy_scenes},
           {"out", sy_out},         {"image_height", sy_h},
           {"image_width", sy_w},   {"n_min", sy_nmin},
           {"n_max", sy_nmax},      {"dim", sy_dim},
           {"overlap", sy_overlap}};
    if (!sy_render.empty()) o["render_dir"] = sy_render;
    if (!sy_skeleton.empty()) o["skeleton"] = sy_skeleton;
    return run(spr_run_synth, o);
  }
  std::fprintf(stderr, "error[usage]: no command selected\n");
  return 2;
}
