// tdsv/pipeline.h

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

#ifndef TDSV_PIPELINE_H_
#define TDSV_PIPELINE_H_

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tdsv/eval.h"
#include "tdsv/hmm-speaker.h"
#include "tdsv/hmm-train.h"
#include "tdsv/ivector.h"

namespace tdsv {

enum class SystemKind { kGmmUbm, kIVector, kGmmHmm, kIVectorHmm };

const char *SystemKindName(SystemKind kind);
SystemKind ParseSystemKind(std::string_view name);
inline bool IsHmmSystem(SystemKind kind) {
  return kind == SystemKind::kGmmHmm || kind == SystemKind::kIVectorHmm;
}

struct SystemConfig {
  SystemKind kind = SystemKind::kGmmUbm;
  /// Required for HMM systems, forbidden otherwise.
  std::optional<AlignAlgo> align;
  /// Feature streams (see Utterance::Stream): alignment features drive HMM
  /// training and alignment, speaker features everything else.
  std::string align_stream = "base";
  std::string speaker_stream = "base";

  int ubm_components = 64;
  GmmEmOptions gmm_em;
  HmmTrainOptions hmm;
  int ivector_rank = 20;
  int tmatrix_iterations = 10;
  EnrollMode enroll_mode = EnrollMode::kSumStats;
  MapConfig map;
  bool exclude_silence = true;
  double prune_threshold = 1e-8;
  std::uint64_t seed = 1;

  /// Throws kConfigError.
  void Validate() const;
  /// e.g. "gmm-hmm/viterbi".
  std::string Label() const;
  /// Canonical `key = value` listing of every field.
  std::string Describe() const;
  std::uint64_t Hash() const;
};

/// Speaker models of one system, by model id.  Which map is filled depends
/// on the system kind.
struct EnrolledModels {
  SystemKind kind = SystemKind::kGmmUbm;
  std::map<std::string, Gmm> gmms;
  std::map<std::string, StateModels> states;
  std::map<std::string, Vector> ivectors;
};

struct SystemReport {
  std::string label;
  std::string config_hash;
  std::uint64_t seed = 0;
  ScoreSet scores;
  std::vector<MetricRow> metrics;
};

struct ExperimentReport {
  std::string corpus_hash;
  std::vector<SystemReport> systems;

  void WriteTable(std::ostream &os) const;
  void WriteKeyValues(std::ostream &os) const;
};

struct ExperimentOptions {
  int workers = 1;
  DcfParams mdcf08 = kMdcf08;
  DcfParams mdcf10 = kMdcf10;
  /// Directory for persisted stage outputs; empty disables the disk cache.
  std::string cache_dir;
};

/// Runs systems over one corpus, sharing trained stages between them.
/// Trained background models are cached in memory and, when a cache
/// directory is set, on disk, keyed by a hash of the corpus and of the
/// configuration fields each stage depends on.
class Experiment {
 public:
  Experiment(const Corpus &corpus, ExperimentOptions opts = {});

  EnrolledModels Enroll(const SystemConfig &config);
  SystemReport RunSystem(const SystemConfig &config);
  ExperimentReport CompareSystems(const std::vector<SystemConfig> &configs);

  /// Utterances used for background training.  Falls back to every
  /// enrollment utterance when the corpus has no dedicated background set.
  const std::vector<const Utterance *> &Background() const { return background_; }

  const Gmm &Ubm(const SystemConfig &config);
  const PhoneHmmSet &Hmm(const SystemConfig &config);
  const StateModels &BackgroundStateModels(const SystemConfig &config);
  const TotalVariability &TMatrix(const SystemConfig &config);
  /// Alignment of an utterance against a phrase transcript.
  const Alignment &AlignmentFor(const SystemConfig &config, const Utterance &utt,
                                const std::vector<std::string> &transcript);

  /// Transcript a test utterance is aligned with when tried against a model.
  const std::vector<std::string> &ModelTranscript(const std::string &model_id) const;
  const Utterance &Utt(const std::string &utt_id) const;

  /// Number of stages computed (not served from a cache); lets tests observe
  /// reuse.
  int stages_computed() const { return stages_computed_; }

 private:
  std::string StageKey(const std::string &stage, const std::string &fields) const;
  template <typename T, typename Fn>
  const T &Cached(std::map<std::string, std::unique_ptr<T>> *memo, const std::string &key, Fn &&compute);

  const Corpus &corpus_;
  ExperimentOptions opts_;
  std::string corpus_hash_;
  std::map<std::string, const Utterance *> by_id_;
  std::vector<const Utterance *> background_;
  std::map<std::string, std::vector<std::string>> model_transcripts_;

  std::map<std::string, std::unique_ptr<Gmm>> ubms_;
  std::map<std::string, std::unique_ptr<PhoneHmmSet>> hmms_;
  std::map<std::string, std::unique_ptr<StateModels>> state_models_;
  std::map<std::string, std::unique_ptr<TotalVariability>> tmatrices_;
  std::map<std::string, std::unique_ptr<Alignment>> alignments_;
  std::mutex alignment_mutex_;
  int stages_computed_ = 0;
};

/// The i-vector trial score: cosine similarity, except that a zero model or
/// test i-vector (the subspace origin, i.e. the background mean) carries no
/// evidence and scores 0.
double IVectorTrialScore(const Vector &model, const Vector &test);

}  // namespace tdsv

#endif  // TDSV_PIPELINE_H_
