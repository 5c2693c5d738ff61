// tdsv/phone-hmm.h

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

#ifndef TDSV_PHONE_HMM_H_
#define TDSV_PHONE_HMM_H_

#include <string>
#include <vector>

#include "tdsv/diag-gmm.h"

namespace tdsv {

inline constexpr int kStatesPerPhone = 3;

/// Set of 3-state left-to-right mono-phone HMMs, silence included.  Emission
/// densities are stored flat, indexed by pdf = phone_index * 3 + state.
struct PhoneHmmSet {
  std::vector<std::string> phones;  // silence is one of these
  std::string silence_phone = "sil";
  std::vector<Gmm> pdfs;            // 3 per phone
  std::vector<double> self_loop;    // per pdf; forward probability is 1 - self_loop
  int num_mix = 8;                  // target mixtures per speech state
  int num_sil_mix = 16;             // target mixtures per silence state

  int NumPhones() const { return static_cast<int>(phones.size()); }
  int NumPdfs() const { return static_cast<int>(pdfs.size()); }
  int Dim() const { return pdfs.empty() ? 0 : pdfs.front().Dim(); }
  /// -1 when absent.
  int PhoneIndex(const std::string &phone) const;
  int SilenceIndex() const { return PhoneIndex(silence_phone); }
  bool IsSilencePdf(int pdf) const { return pdf / kStatesPerPhone == SilenceIndex(); }
  /// Sum of mixture counts over every state: 3*F*G + 3*G_sil at full size.
  int TotalMixtures() const;
  /// Throws Errc::kInvalidArgument when sizes or transition values are off.
  void Validate() const;
};

/// 3*F*G + 3*G_sil for F speech phones.
inline int ExpectedMixtureCount(int num_speech_phones, int num_mix, int num_sil_mix) {
  return kStatesPerPhone * num_speech_phones * num_mix + kStatesPerPhone * num_sil_mix;
}

enum class SilencePolicy {
  kNone,              // transcript phones only
  kBoundary,          // mandatory silence at both ends
  kBoundaryOptional,  // ... plus optional silence between words
};

const char *SilencePolicyName(SilencePolicy policy);
SilencePolicy ParseSilencePolicy(std::string_view name);

struct GraphArc {
  int to;
  double log_prob;
};

/// One emitting state of a composite HMM.
struct GraphNode {
  int pdf;
  int phone;
  int state;            // 0, 1 or 2 within the phone
  bool optional;        // part of an optional silence block
  double self_log_prob;
  std::vector<GraphArc> next;  // strictly forward
};

/// Left-to-right composition of phone HMMs for one transcript.  Node 0 is the
/// only entry; the last node is the only exit.  Arcs other than self-loops
/// always go to a higher index, so node order is a topological order.
struct CompositeHmm {
  std::vector<GraphNode> nodes;
  double final_log_prob = 0.0;
  /// Incoming forward arcs per node, sorted by source index.
  std::vector<std::vector<GraphArc>> prev;  // GraphArc::to holds the source here

  int NumStates() const { return static_cast<int>(nodes.size()); }
  /// Fewest frames any complete path needs (optional blocks skipped).
  int MinFrames() const;
  /// Rebuilds `prev` from `next`.
  void Finalize();
};

/// Transcript tokens are phones; a `|` token marks a word boundary.  Without
/// any `|`, every phone counts as a word.  Throws Errc::kEmptyTranscript and
/// Errc::kUnknownPhone.
CompositeHmm BuildCompositeGraph(const PhoneHmmSet &hmm, const std::vector<std::string> &transcript,
                                 SilencePolicy policy);

/// Same topology but from explicit per-state transition probabilities; used
/// to set up small hand-built instances.  `self_loop[i]` belongs to node i
/// and each node moves on to i + 1.
CompositeHmm MakeChainGraph(const std::vector<double> &self_loop, const std::vector<int> &pdfs);

}  // namespace tdsv

#endif  // TDSV_PHONE_HMM_H_
