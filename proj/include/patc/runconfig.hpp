// Copyright (c) 2026 patcorrect-cpp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PATC_RUNCONFIG_HPP
#define PATC_RUNCONFIG_HPP

#include <string>

#include "patc/model.hpp"
#include "patc/synth.hpp"
#include "patc/train.hpp"

namespace patc {

// Flat merged view of the model, training and noise knobs. Every key has a
// default; unknown keys are rejected.
struct RunConfig {
  model::ModelConfig model;
  train::TrainConfig train;
  synth::NoiseConfig noise;

  // Apply one "key=value" style assignment.
  void set(const std::string& key, const std::string& value);
  // JSON object when the file starts with '{', else key=value lines
  // ('#' comments allowed).
  void load_file(const std::string& path);
  // Effective settings echoed to run logs.
  std::string echo() const;
  void set_seed(uint64_t seed);
};

}  // namespace patc

#endif  // PATC_RUNCONFIG_HPP
