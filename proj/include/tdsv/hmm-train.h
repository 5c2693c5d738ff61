// tdsv/hmm-train.h

// Copyright 2026  The tdsv Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TDSV_HMM_TRAIN_H_
#define TDSV_HMM_TRAIN_H_

#include <span>
#include <string>
#include <vector>

#include "tdsv/hmm-align.h"

namespace tdsv {

struct HmmTrainOptions {
  int num_mix = 8;
  int num_sil_mix = 16;
  int initial_rounds = 4;
  int rounds_per_split = 4;
  SilencePolicy silence = SilencePolicy::kBoundaryOptional;
  std::string silence_phone = "sil";
  double var_floor_factor = 1e-3;
  double split_perturb = 0.1;
};

struct HmmTrainingUtterance {
  const std::vector<std::string> *transcript;
  const Matrix *frames;
};

struct HmmTrainResult {
  PhoneHmmSet hmm;
  /// Viterbi training objective (summed best-path log probability) measured
  /// before every re-estimation, one vector per mixture-count stage.  The
  /// last entry of the last stage is measured after the final update.
  std::vector<std::vector<double>> stage_objectives;
};

/// Uniform flat-start segmentation of `num_frames` frames over `num_states`
/// states: floor(T/N) frames each, the remainder going to the last state.
/// Returns the state index of every frame.
std::vector<int> UniformSegmentation(int num_frames, int num_states);

/// Flat start, Viterbi training rounds, then binary mixture splitting up to
/// num_mix (num_sil_mix for silence) with re-estimation after every split.
/// `phones` is the speech inventory; silence is added automatically when the
/// silence policy inserts it.  Throws Errc::kPhoneMissingFromCorpus and
/// Errc::kInsufficientFrames.
HmmTrainResult TrainMonophoneHmms(std::span<const HmmTrainingUtterance> corpus,
                                  const std::vector<std::string> &phones,
                                  const HmmTrainOptions &opts);

}  // namespace tdsv

#endif  // TDSV_HMM_TRAIN_H_
