// tdsv/hmm-speaker.h

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

#ifndef TDSV_HMM_SPEAKER_H_
#define TDSV_HMM_SPEAKER_H_

#include <span>
#include <vector>

#include "tdsv/hmm-align.h"

namespace tdsv {

/// One GMM per HMM state, possibly in a different feature space than the
/// HMM set that produced the alignments.  Statistics over these models use a
/// super-vector layout with one slot per (state, mixture), states in pdf
/// order.
struct StateModels {
  std::vector<Gmm> pdfs;
  std::vector<bool> is_silence;

  int NumPdfs() const { return static_cast<int>(pdfs.size()); }
  int Dim() const { return pdfs.empty() ? 0 : pdfs.front().Dim(); }
  int NumSlots() const;
  std::vector<int> SlotOffsets() const;
  /// slots x D
  Matrix StackedMeans() const;
  Matrix StackedVars() const;
  void Validate() const;

  static StateModels FromHmm(const PhoneHmmSet &hmm);
};

/// Posterior entries that count for statistics and scoring at frame t.
/// Without silence exclusion this is the alignment frame as is.  With it, a
/// frame whose silence mass is at least one half is skipped (returns false);
/// otherwise the silence entries are dropped and the rest renormalized.
bool CountedEntries(const Alignment &alignment, int t, const StateModels &models,
                    bool exclude_silence, std::vector<AlignEntry> *out);

struct StateReestimateOptions {
  double var_floor_factor = 1e-3;
  bool exclude_silence = false;
};

/// Re-estimates every state GMM from posterior-weighted moments of the
/// speaker features.  Slots with no mass keep their prior parameters: the HMM
/// state GMM when the feature dimensions agree, otherwise the global mean and
/// variance of the speaker features.
StateModels ReestimateStateGmms(const PhoneHmmSet &hmm, std::span<const Alignment> alignments,
                                std::span<const Matrix *const> speaker_frames,
                                const StateReestimateOptions &opts = {});

/// N_(j,g) = sum_t P_t(j,g), F_(j,g) = sum_t P_t(j,g) (x_t - mu_(j,g)).
HmmStats AccumulateHmmStats(const Alignment &alignment, const Matrix &speaker_frames,
                            const StateModels &models, bool exclude_silence);

/// Mean-only MAP per (state, mixture) slot.
StateModels HmmMapAdapt(const StateModels &background, const HmmStats &stats,
                        const MapConfig &config);

/// sum_t log p(x_t | adapted_{q_t}) - log p(x_t | background_{q_t}).
double ScoreHmmViterbi(const StateModels &adapted, const StateModels &background,
                       const Alignment &alignment, const Matrix &speaker_frames,
                       bool exclude_silence);

/// sum_t log sum_{j,g} P_t(j,g) N(x_t | adapted_(j,g))
///     - log sum_{j,g} P_t(j,g) N(x_t | background_(j,g)).
double ScoreHmmFb(const StateModels &adapted, const StateModels &background,
                  const Alignment &alignment, const Matrix &speaker_frames, bool exclude_silence);

/// Dispatches on the alignment's algorithm tag.
double ScoreHmm(const StateModels &adapted, const StateModels &background,
                const Alignment &alignment, const Matrix &speaker_frames, bool exclude_silence);

}  // namespace tdsv

#endif  // TDSV_HMM_SPEAKER_H_
