// tests/test-pipeline.cc

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

#include <sstream>

#include <doctest.h>

#include "tdsv/config.h"
#include "tdsv/pipeline.h"
#include "tdsv/synthetic-corpus.h"
#include "test-util.h"

namespace tdsv {
namespace {

Config SmallConfig() {
  Config c;
  c.MergeText(
      "gmm.components = 8\n"
      "hmm.num_mix = 2\n"
      "hmm.num_sil_mix = 2\n"
      "hmm.initial_rounds = 2\n"
      "hmm.rounds_per_split = 2\n"
      "ivector.rank = 5\n"
      "ivector.iterations = 3\n",
      "test");
  return c;
}

Corpus SmallCorpus(int background = 2) {
  SyntheticSpec spec;
  spec.num_speakers = 4;
  spec.num_phrases = 2;
  spec.utterances_per_cell = 5;
  spec.background_speakers = background;
  spec.seed = 3;
  return GenerateSyntheticCorpus(spec);
}

bool SameRows(const SystemReport &a, const SystemReport &b) {
  if (a.scores.size() != b.scores.size() || a.metrics.size() != b.metrics.size()) return false;
  for (std::size_t i = 0; i < a.scores.size(); ++i)
    if (a.scores[i].score != b.scores[i].score) return false;
  for (std::size_t i = 0; i < a.metrics.size(); ++i)
    if (a.metrics[i].eer != b.metrics[i].eer || a.metrics[i].mdcf08 != b.metrics[i].mdcf08) return false;
  return true;
}

TEST_CASE("system config validation") {
  SystemConfig c;
  c.kind = SystemKind::kGmmUbm;
  c.align = AlignAlgo::kForwardBackward;
  CHECK_THROWS_AS(c.Validate(), Error);
  c.kind = SystemKind::kGmmHmm;
  CHECK_NOTHROW(c.Validate());
  CHECK(c.Label() == "gmm-hmm/fb");
  c.align.reset();
  CHECK_THROWS_AS(c.Validate(), Error);
  CHECK(ParseSystemKind("ivector-hmm") == SystemKind::kIVectorHmm);
  try {
    ParseSystemKind("plda");
  } catch (const Error &e) {
    CHECK(e.code() == Errc::kConfigError);
  }
  const Config config = SmallConfig();
  CHECK(config.System("gmm-ubm").Hash() != config.System("ivector").Hash());
  CHECK(config.System("gmm-hmm/viterbi").Hash() == config.System("gmm-hmm/viterbi").Hash());
}

TEST_CASE("gmm-ubm separates speakers") {
  const Corpus corpus = SmallCorpus();
  Experiment x(corpus);
  const SystemReport r = x.RunSystem(SmallConfig().System("gmm-ubm"));
  CHECK(r.scores.size() == corpus.trials.size());
  CHECK(ComputeEer(r.scores, {TrialType::kTC, TrialType::kIC}) < 0.5);
  CHECK(r.config_hash.size() == 16);
}

TEST_CASE("six systems, deterministic and cache transparent") {
  const Corpus corpus = SmallCorpus();
  const Config config = SmallConfig();
  const auto systems = config.Systems();
  REQUIRE(systems.size() == 6);

  Experiment x(corpus);
  const ExperimentReport a = x.CompareSystems(systems);
  REQUIRE(a.systems.size() == 6);
  for (const auto &s : a.systems) CHECK(s.metrics.size() == 3);
  const int computed = x.stages_computed();
  const ExperimentReport again = x.CompareSystems(systems);
  CHECK(x.stages_computed() == computed);

  test::TempDir cache;
  ExperimentOptions opts;
  opts.cache_dir = cache.str();
  opts.workers = 2;
  Experiment cold(corpus, opts);
  const ExperimentReport b = cold.CompareSystems(systems);
  Experiment warm(corpus, opts);
  const ExperimentReport c = warm.CompareSystems(systems);
  CHECK(warm.stages_computed() == 0);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(SameRows(a.systems[i], again.systems[i]));
    CHECK(SameRows(a.systems[i], b.systems[i]));
    CHECK(SameRows(a.systems[i], c.systems[i]));
  }
  std::ostringstream ta, tc;
  a.WriteKeyValues(ta);
  c.WriteKeyValues(tc);
  CHECK(ta.str() == tc.str());
}

TEST_CASE("speaker stream does not touch alignments") {
  Corpus corpus = SmallCorpus();
  Rng rng(9);
  for (auto &u : corpus.utterances) {
    FeatureMatrix alt;
    alt.frames = test::RandomMatrix(&rng, u.features.NumFrames(), 5);
    u.streams["alt"] = alt;
  }
  const Config config = SmallConfig();
  SystemConfig base = config.System("ivector-hmm/fb");
  SystemConfig swapped = base;
  swapped.speaker_stream = "alt";
  Experiment xa(corpus), xb(corpus);
  const SystemReport rb = xb.RunSystem(swapped);
  CHECK(rb.scores.size() == corpus.trials.size());
  for (const auto &u : corpus.utterances) {
    const auto &transcript = corpus.phrase_transcripts.at(u.phrase_id);
    const Alignment &a = xa.AlignmentFor(base, u, transcript);
    const Alignment &b = xb.AlignmentFor(swapped, u, transcript);
    CHECK(a.Hash() == b.Hash());
    CHECK(test::MaxNormalizationError(a) < test::kNormalizationTolerance);
  }
  CHECK(xb.BackgroundStateModels(swapped).Dim() == 5);
}

TEST_CASE("background falls back to enrollment data") {
  const Corpus corpus = SmallCorpus(0);
  std::vector<std::string> warnings;
  SetWarningSink([&](std::string_view w) { warnings.emplace_back(w); });
  Experiment x(corpus);
  SetWarningSink(nullptr);
  std::size_t enrolled = 0;
  for (const auto &[model, utts] : corpus.enrollment) enrolled += utts.size();
  CHECK(x.Background().size() == enrolled);
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("stage errors carry their stage") {
  Corpus corpus = SmallCorpus();
  SystemConfig c = SmallConfig().System("gmm-hmm/viterbi");
  c.speaker_stream = "missing";
  Experiment x(corpus);
  try {
    x.RunSystem(c);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("stage") != std::string::npos);
  }
}

TEST_CASE("ivector trial score") {
  Vector a(2), z = Vector::Zero(2);
  a << 1, 2;
  CHECK(IVectorTrialScore(a, z) == 0.0);
  CHECK(IVectorTrialScore(z, z) == 0.0);
  CHECK(IVectorTrialScore(a, a) == doctest::Approx(1.0));
}

}  // namespace
}  // namespace tdsv
