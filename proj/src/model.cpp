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

#include "model.hpp"

namespace spr {

void validate_config(const TrainConfig& cfg) {
  // A zero rate is allowed: it freezes the parameters, which the no-update
  // tests rely on.
  if (!(cfg.learning_rate >= 0.0))
    throw Error::data("train config: learning_rate must be >= 0");
  if (cfg.epochs < 1) throw Error::data("train config: epochs must be >= 1");
  if (!(cfg.rms_decay >= 0.0 && cfg.rms_decay < 1.0))
    throw Error::data("train config: rms_decay must be in [0, 1)");
  if (!(cfg.epsilon > 0.0))
    throw Error::data("train config: epsilon must be > 0");
  if (cfg.decay_every < 0)
    throw Error::data("train config: decay_every must be >= 0");
  if (!(cfg.lr_decay > 0.0))
    throw Error::data("train config: lr_decay must be > 0");
}

}  // namespace spr
