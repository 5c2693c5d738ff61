// tdsv/hmm-align.h

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

#ifndef TDSV_HMM_ALIGN_H_
#define TDSV_HMM_ALIGN_H_

#include <ostream>
#include <span>
#include <vector>

#include "tdsv/phone-hmm.h"

namespace tdsv {

enum class AlignAlgo { kViterbi, kForwardBackward };

const char *AlignAlgoName(AlignAlgo algo);
AlignAlgo ParseAlignAlgo(std::string_view name);

/// Posterior of frame t occupying mixture `mix` of graph node `node`.
struct AlignEntry {
  int node;
  int pdf;
  int mix;
  double post;
};

/// Per-frame state-mixture posteriors.  For Viterbi alignments every frame's
/// entries belong to the single node on the best path and `path` holds that
/// node; the mixture split inside the node stays soft.
struct Alignment {
  AlignAlgo algo = AlignAlgo::kViterbi;
  std::vector<std::vector<AlignEntry>> frames;
  std::vector<int> path;  // Viterbi only
  /// Best-path log probability (Viterbi) or total log probability (FB),
  /// transitions included.
  double log_likelihood = 0.0;

  int NumFrames() const { return static_cast<int>(frames.size()); }
  /// Sum of entry posteriors per node for frame t.
  std::vector<double> NodePosteriors(int t, int num_nodes) const;
  std::uint64_t Hash() const;
};

struct AlignOptions {
  /// Mixture posteriors below this are dropped and the frame renormalized;
  /// 0 keeps everything.
  double prune_threshold = 1e-8;
};

/// Result of the Viterbi recursion over a T x N table of state
/// log-likelihoods.  Ties go to the lower predecessor index, which after
/// backtracking yields the optimal path that is smallest when compared from
/// the last frame backwards.
struct ViterbiResult {
  std::vector<int> path;
  double log_prob;
};
ViterbiResult ViterbiDecode(const CompositeHmm &graph, const Matrix &state_loglik);

/// Forward-backward over the same table; gamma is T x N.
struct ForwardBackwardResult {
  Matrix gamma;
  double log_prob;
};
ForwardBackwardResult ForwardBackward(const CompositeHmm &graph, const Matrix &state_loglik);

/// Per-node log-likelihoods and within-node mixture posteriors for `frames`.
struct EmissionTable {
  Matrix state_loglik;                 // T x N
  std::vector<Matrix> mixture_post;    // per pdf used by the graph: T x G (empty otherwise)
};
EmissionTable ComputeEmissions(const CompositeHmm &graph, std::span<const Gmm> pdfs,
                               const Matrix &frames);

/// Throws Errc::kNoValidPath when no path fits the frames and
/// Errc::kDimensionMismatch on a feature dimension mismatch.
Alignment ViterbiAlign(const CompositeHmm &graph, std::span<const Gmm> pdfs, const Matrix &frames,
                       const AlignOptions &opts = {});
Alignment FbAlign(const CompositeHmm &graph, std::span<const Gmm> pdfs, const Matrix &frames,
                  const AlignOptions &opts = {});
Alignment Align(AlignAlgo algo, const CompositeHmm &graph, std::span<const Gmm> pdfs,
                const Matrix &frames, const AlignOptions &opts = {});

/// CSV rows `utt_id,frame,state,phone,state_index,posterior`, one per node
/// with non-zero mass, posterior summed over mixtures.
void WritePosteriorCsv(std::ostream &os, const std::string &utt_id, const Alignment &alignment,
                       const CompositeHmm &graph, const std::vector<std::string> &phones,
                       bool header = true);

}  // namespace tdsv

#endif  // TDSV_HMM_ALIGN_H_
