/* Copyright 2026 The spr Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the pose codec and its experiment drivers.
 *
 * Conventions:
 *   - Every fallible call returns spr_status; SPR_OK is 0. The other codes
 *     match the CLI exit codes (2 usage, 3 data, 4 I/O; 1 is reserved for
 *     unexpected internal failures).
 *   - spr_last_error() describes the most recent failure on the calling
 *     thread. The pointer stays valid until the next call on that thread.
 *   - Strings returned through char** are heap-allocated; release them with
 *     spr_string_free. They are UTF-8 JSON documents unless noted.
 *   - Driver options are JSON documents too. NULL or "{}" selects defaults;
 *     unknown option fields are rejected with SPR_ERROR_USAGE.
 */

#ifndef SPR_SPR_H
#define SPR_SPR_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spr_status {
  SPR_OK = 0,
  SPR_ERROR_INTERNAL = 1,
  SPR_ERROR_USAGE = 2,
  SPR_ERROR_DATA = 3,
  SPR_ERROR_IO = 4
} spr_status;

/* Library semantic version, e.g. "1.0.0". Static storage; do not free. */
const char* spr_version(void);

/* Message for the most recent failure on this thread ("" when none). */
const char* spr_last_error(void);

/* Releases any string returned through a char** out-parameter. */
void spr_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Skeletons                                                           */

typedef struct spr_skeleton spr_skeleton;

/* Builds a skeleton from a preset name ("mpii16", "coco17",
 * "panoptic15-3d", "toy6") or from an inline JSON spec document. */
spr_status spr_skeleton_create(const char* name_or_json, spr_skeleton** out);
void spr_skeleton_destroy(spr_skeleton* s);
int spr_skeleton_joint_count(const spr_skeleton* s);
int spr_skeleton_dim(const spr_skeleton* s);
/* Valid until the skeleton is destroyed. */
const char* spr_skeleton_name(const spr_skeleton* s);
spr_status spr_skeleton_to_json(const spr_skeleton* s, char** out_json);

/* ------------------------------------------------------------------ */
/* Pose datasets                                                       */

typedef struct spr_dataset spr_dataset;

spr_status spr_dataset_load(const char* path, spr_dataset** out);
void spr_dataset_destroy(spr_dataset* d);
int spr_dataset_image_count(const spr_dataset* d);
int spr_dataset_person_count(const spr_dataset* d);
int spr_dataset_dim(const spr_dataset* d);
spr_status spr_dataset_save(const spr_dataset* d, const char* path);

/* ------------------------------------------------------------------ */
/* Geometry                                                            */

/* Writes sqrt(height^2 + width^2) for positive dims. */
spr_status spr_normalization_factor(int height, int width, double* out);

/* ------------------------------------------------------------------ */
/* Experiment drivers. Each takes a JSON options document and returns a
 * JSON report. Option fields mirror the CLI flags of the same command;
 * the CLI is a thin shell over these entry points. */

/* {"dataset", "out_dir", "mode", "sigma", "tau", "tau_as_radius",
 *  "stride", "depth_norm", "threads"} */
spr_status spr_run_encode(const char* options_json, char** out_report);

/* {"maps", "out", "mode", "window", "threshold", "max_peaks", "refine",
 *  "threads"} */
spr_status spr_run_decode(const char* options_json, char** out_report);

/* {"seed", "scenes", "mode", "sigma", "tau", "stride", "image", "n_min",
 *  "n_max", "dim", "report", "threads"} */
spr_status spr_run_roundtrip(const char* options_json, char** out_report);

/* {"from", "to", "seed", "scenes", "mode", "image", "overlap", "report",
 *  "threads"} */
spr_status spr_run_tau_sweep(const char* options_json, char** out_report);

/* {"seed", "scenes", "image_size", "stages", "mode", "epochs",
 *  "learning_rate", "beta", "unmasked", "stop_at_pckh", "eval_every",
 *  "alpha", "checkpoint", "history"} */
spr_status spr_run_train_toy(const char* options_json, char** out_report);

/* {"pred", "gt", "metric", "alpha", "radius", "root_gate"} */
spr_status spr_run_eval(const char* options_json, char** out_report);

/* {"height", "width", "k", "n", "reps"} */
spr_status spr_run_bench(const char* options_json, char** out_report);

/* {"resolutions": [[h, w], ...], "persons": [n, ...], "k", "reps",
 *  "k_sweep": [k, ...], "k_sweep_persons", "report"} */
spr_status spr_run_scaling_study(const char* options_json, char** out_report);

/* {"seed", "scenes", "out", "render_dir", "image_height", "image_width",
 *  "n_min", "n_max", "dim", "skeleton", "overlap"} */
spr_status spr_run_synth(const char* options_json, char** out_report);

#ifdef __cplusplus
}
#endif

#endif /* SPR_SPR_H */
