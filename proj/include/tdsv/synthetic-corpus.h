// tdsv/synthetic-corpus.h

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

#ifndef TDSV_SYNTHETIC_CORPUS_H_
#define TDSV_SYNTHETIC_CORPUS_H_

#include <cstdint>

#include "tdsv/corpus.h"

namespace tdsv {

/// Parameters of the synthetic text-dependent corpus.  Frames of speaker k
/// in phone state (p, s) are drawn from N(mu_ps + a_k + b_kps, noise^2 I):
/// mu_ps are global phone-state means, a_k a per-speaker offset with standard
/// deviation `speaker_shift`, and b_kps a per-speaker, per-state offset with
/// standard deviation `speaker_state_shift`.  Silence frames carry no speaker
/// offset.
struct SyntheticSpec {
  int num_speakers = 16;
  int num_phrases = 4;
  int phones_per_phrase = 5;
  int utterances_per_cell = 8;
  std::uint64_t seed = 1;
  double speaker_shift = 0.3;
  double speaker_state_shift = 0.5;
  double noise_scale = 1.0;
  /// Spread of the global phone-state means.
  double phone_scale = 1.5;
  int num_phones = 6;
  int dim = 12;
  /// Extra speakers whose utterances are never enrolled or tested; they
  /// feed background model training.
  int background_speakers = 0;
  /// Duration bounds per emitting state, speech and silence.
  int min_state_frames = 3;
  int max_state_frames = 6;
  int min_silence_frames = 3;
  int max_silence_frames = 5;

  /// Throws Errc::kInvalidSpec.
  void Validate() const;
};

/// Deterministic function of the spec.  A phrase uses distinct phones in
/// random order when the inventory is large enough, otherwise random phones
/// with no immediate repeats.  Enrollment uses the first
/// min(3, utterances_per_cell - 1) utterances of every (speaker, phrase)
/// cell, or all of them when the cell has a single utterance; every model is
/// tried against every remaining test utterance, typed TC / IC / TW / IW.
Corpus GenerateSyntheticCorpus(const SyntheticSpec &spec);

}  // namespace tdsv

#endif  // TDSV_SYNTHETIC_CORPUS_H_
