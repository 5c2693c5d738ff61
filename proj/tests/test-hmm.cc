// tests/test-hmm.cc

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

#include <cmath>

#include <doctest.h>

#include "oracles.h"
#include "tdsv/hmm-align.h"
#include "tdsv/hmm-speaker.h"
#include "tdsv/hmm-train.h"
#include "test-util.h"

namespace tdsv {
namespace {

Gmm Unit(double mean, int dim = 1) { return Gmm(Vector::Ones(1), Matrix::Constant(1, dim, mean), Matrix::Ones(1, dim)); }

Gmm RandomGmm(Rng *rng, int c, int d) {
  Vector w(c);
  for (int i = 0; i < c; ++i) w(i) = 0.1 + rng->Uniform();
  w /= w.sum();
  Matrix var = test::RandomMatrix(rng, c, d).array().square() + 0.3;
  return Gmm(w, test::RandomMatrix(rng, c, d, 1.5), var);
}

PhoneHmmSet RandomHmmSet(Rng *rng, const std::vector<std::string> &phones, int mix, int dim) {
  PhoneHmmSet hmm;
  hmm.phones = phones;
  for (std::size_t i = 0; i < kStatesPerPhone * phones.size(); ++i) {
    hmm.pdfs.push_back(RandomGmm(rng, mix, dim));
    hmm.self_loop.push_back(0.3 + 0.5 * rng->Uniform());
  }
  return hmm;
}

template <typename Fn>
Errc CodeOf(Fn &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::kInvalidArgument;
}

TEST_CASE("composite graph topology") {
  Rng rng(1);
  const PhoneHmmSet hmm = RandomHmmSet(&rng, {"a", "b", "sil"}, 1, 2);
  const CompositeHmm one = BuildCompositeGraph(hmm, {"a"}, SilencePolicy::kNone);
  CHECK(one.NumStates() == 3);
  CHECK(one.MinFrames() == 3);

  const CompositeHmm two = BuildCompositeGraph(hmm, {"a", "|", "b"}, SilencePolicy::kBoundaryOptional);
  CHECK(two.NumStates() == 3 * 2 + 3 * 2 + 3);
  CHECK(two.MinFrames() == 12);
  int optional = 0;
  for (const auto &n : two.nodes) optional += n.optional;
  CHECK(optional == 3);
  for (int i = 0; i < two.NumStates(); ++i)
    for (const auto &arc : two.nodes[i].next) CHECK(arc.to > i);

  CHECK(BuildCompositeGraph(hmm, {"a", "b"}, SilencePolicy::kBoundary).NumStates() == 12);
  CHECK(CodeOf([&] { BuildCompositeGraph(hmm, {}, SilencePolicy::kNone); }) == Errc::kEmptyTranscript);
  CHECK(CodeOf([&] { BuildCompositeGraph(hmm, {"zz"}, SilencePolicy::kNone); }) == Errc::kUnknownPhone);
}

TEST_CASE("viterbi on small graphs") {
  SUBCASE("single state") {
    const CompositeHmm g = MakeChainGraph({0.6}, {0});
    Rng rng(2);
    const std::vector<Gmm> pdfs{RandomGmm(&rng, 3, 2)};
    const Alignment ali = ViterbiAlign(g, pdfs, test::RandomMatrix(&rng, 5, 2), AlignOptions{0.0});
    for (int t = 0; t < 5; ++t) {
      CHECK(ali.path[t] == 0);
      double sum = 0.0;
      for (const auto &e : ali.frames[t]) sum += e.post;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
  SUBCASE("two states, three frames") {
    const CompositeHmm g = MakeChainGraph({0.7, 0.4}, {0, 1});
    Matrix ll(3, 2);
    ll << -1.0, -3.0, -2.0, -1.5, -4.0, -0.5;
    // Path A = 0 0 1, path B = 0 1 1.
    const double a = -1.0 + std::log(0.7) - 2.0 + std::log(0.3) - 0.5 + std::log(0.6);
    const double b = -1.0 + std::log(0.3) - 1.5 + std::log(0.4) - 0.5 + std::log(0.6);
    const ViterbiResult v = ViterbiDecode(g, ll);
    CHECK(v.log_prob == doctest::Approx(std::max(a, b)).epsilon(1e-14));
    CHECK(v.path == (a > b ? std::vector<int>{0, 0, 1} : std::vector<int>{0, 1, 1}));

    const ForwardBackwardResult fb = ForwardBackward(g, ll);
    const double pa = std::exp(a) / (std::exp(a) + std::exp(b));
    CHECK(fb.gamma(1, 0) == doctest::Approx(pa).epsilon(1e-12));
    CHECK(std::abs(fb.gamma(1, 1) - (1 - pa)) < 1e-10);
    CHECK(fb.log_prob == doctest::Approx(std::log(std::exp(a) + std::exp(b))).epsilon(1e-12));
  }
  SUBCASE("too few frames") {
    const CompositeHmm g = MakeChainGraph({0.5, 0.5, 0.5, 0.5}, {0, 1, 2, 3});
    CHECK(CodeOf([&] { ViterbiDecode(g, Matrix::Zero(3, 4)); }) == Errc::kNoValidPath);
    CHECK(CodeOf([&] { ForwardBackward(g, Matrix::Zero(3, 4)); }) == Errc::kNoValidPath);
  }
}

TEST_CASE("fb single state") {
  const CompositeHmm g = MakeChainGraph({0.5}, {0});
  const std::vector<Gmm> pdfs{Unit(0.0, 2)};
  Rng rng(3);
  const Alignment ali = FbAlign(g, pdfs, test::RandomMatrix(&rng, 6, 2));
  for (const auto &frame : ali.frames) {
    REQUIRE(frame.size() == 1);
    CHECK(frame[0].post == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("alignment against exhaustive enumeration") {
  Rng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + rng.UniformInt(0, 3);
    const int frames = n + rng.UniformInt(0, 6 - n);
    const bool flat = trial % 3 == 0;
    const CompositeHmm g = oracle::RandomGraph(&rng, n, flat);
    Matrix ll = test::RandomMatrix(&rng, frames, n, 2.0);
    if (flat) ll = ll.array().round();  // invites exact ties
    const auto paths = oracle::EnumeratePaths(g, ll);
    const auto *best = oracle::BestPath(paths);
    REQUIRE(best != nullptr);
    const ViterbiResult v = ViterbiDecode(g, ll);
    CHECK(v.log_prob == best->log_prob);
    CHECK(v.path == best->states);
    double log_total;
    const Matrix gamma = oracle::PathSumPosteriors(g, ll, &log_total);
    const ForwardBackwardResult fb = ForwardBackward(g, ll);
    CHECK((fb.gamma - gamma).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(fb.log_prob == doctest::Approx(log_total).epsilon(1e-12));
  }
}

TEST_CASE("alignment properties on a phone graph") {
  Rng rng(23);
  const PhoneHmmSet hmm = RandomHmmSet(&rng, {"a", "b", "c", "sil"}, 3, 4);
  const CompositeHmm g = BuildCompositeGraph(hmm, {"a", "|", "b", "c"}, SilencePolicy::kBoundaryOptional);
  const Matrix x = test::RandomMatrix(&rng, 40, 4, 1.5);
  const Alignment vit = ViterbiAlign(g, hmm.pdfs, x);
  const Alignment fb = FbAlign(g, hmm.pdfs, x);
  CHECK(test::MaxNormalizationError(vit) < test::kNormalizationTolerance);
  CHECK(test::MaxNormalizationError(fb) < test::kNormalizationTolerance);
  CHECK(vit.NumFrames() == 40);
  CHECK(fb.NumFrames() == 40);
  for (int t = 0; t < 40; ++t) {
    for (const auto &e : vit.frames[t]) CHECK(e.node == vit.path[t]);
    if (t > 0) CHECK(vit.path[t] >= vit.path[t - 1]);
  }
  CHECK(vit.path.front() == 0);
  CHECK(vit.path.back() == g.NumStates() - 1);

  // Unpruned FB mixture posteriors are state occupancy times the within-state
  // component posterior.
  const Alignment full = FbAlign(g, hmm.pdfs, x, AlignOptions{0.0});
  const EmissionTable em = ComputeEmissions(g, hmm.pdfs, x);
  const ForwardBackwardResult ref = ForwardBackward(g, em.state_loglik);
  for (int t = 0; t < 40; ++t)
    for (const auto &e : full.frames[t]) {
      const Vector post = GmmPosteriors(hmm.pdfs[e.pdf], x.row(t).transpose());
      CHECK(e.post == doctest::Approx(ref.gamma(t, e.node) * post(e.mix)).epsilon(1e-9));
    }
  CHECK(vit.Hash() != fb.Hash());
}

TEST_CASE("uniform segmentation") {
  CHECK(UniformSegmentation(10, 3) == std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 2, 2});
  CHECK(UniformSegmentation(3, 3) == std::vector<int>{0, 1, 2});
  CHECK(CodeOf([] { UniformSegmentation(2, 3); }) == Errc::kInsufficientFrames);
}

TEST_CASE("monophone training recovers a known model") {
  Rng rng(31);
  const double truth[3] = {-4.0, 0.0, 4.0};
  std::vector<Matrix> feats;
  std::vector<std::string> transcript{"a"};
  for (int u = 0; u < 30; ++u) {
    std::vector<double> rows;
    for (int s = 0; s < 3; ++s) {
      const int dur = rng.UniformInt(3, 8);
      for (int i = 0; i < dur; ++i) rows.push_back(truth[s] + 0.5 * rng.Normal());
    }
    feats.push_back(Eigen::Map<Matrix>(rows.data(), rows.size(), 1));
  }
  std::vector<HmmTrainingUtterance> corpus;
  for (const auto &f : feats) corpus.push_back({&transcript, &f});
  HmmTrainOptions opts;
  opts.num_mix = 1;
  opts.num_sil_mix = 1;
  opts.silence = SilencePolicy::kNone;
  const HmmTrainResult r = TrainMonophoneHmms(corpus, {"a"}, opts);
  REQUIRE(r.hmm.NumPdfs() == 3);
  for (int s = 0; s < 3; ++s) CHECK(std::abs(r.hmm.pdfs[s].means()(0, 0) - truth[s]) < 0.2);
  for (const auto &stage : r.stage_objectives)
    for (std::size_t i = 1; i < stage.size(); ++i) CHECK(stage[i] >= stage[i - 1] - 1e-8);

  CHECK(CodeOf([&] { TrainMonophoneHmms(corpus, {"a", "zz"}, opts); }) == Errc::kPhoneMissingFromCorpus);
}

TEST_CASE("silence exclusion") {
  StateModels models;
  models.pdfs = {Unit(0.0), Unit(1.0)};
  models.is_silence = {false, true};
  Alignment ali;
  ali.algo = AlignAlgo::kForwardBackward;
  ali.frames = {{{0, 0, 0, 0.4}, {1, 1, 0, 0.6}}, {{0, 0, 0, 0.7}, {1, 1, 0, 0.3}}};
  std::vector<AlignEntry> out;
  CHECK(CountedEntries(ali, 0, models, false, &out));
  CHECK(out.size() == 2);
  CHECK_FALSE(CountedEntries(ali, 0, models, true, &out));
  REQUIRE(CountedEntries(ali, 1, models, true, &out));
  REQUIRE(out.size() == 1);
  CHECK(out[0].pdf == 0);
  CHECK(out[0].post == doctest::Approx(1.0).epsilon(1e-15));
}

PhoneHmmSet OnePhone(double mean0, double mean1, double mean2) {
  PhoneHmmSet hmm;
  hmm.phones = {"a"};
  hmm.pdfs = {Unit(mean0), Unit(mean1), Unit(mean2)};
  hmm.self_loop = {0.5, 0.5, 0.5};
  return hmm;
}

TEST_CASE("state gmm re-estimation") {
  const PhoneHmmSet hmm = OnePhone(0, 1, 2);
  Alignment ali;
  ali.algo = AlignAlgo::kForwardBackward;
  ali.frames = {{{0, 0, 0, 0.5}, {1, 1, 0, 0.5}}, {{0, 0, 0, 0.5}, {2, 2, 0, 0.5}}, {{2, 2, 0, 1.0}}};
  Matrix x(3, 1);
  x << 3.0, 7.0, -1.0;
  const std::vector<Alignment> alis{ali};
  const std::vector<const Matrix *> feats{&x};
  const StateModels s = ReestimateStateGmms(hmm, alis, feats);
  CHECK(s.pdfs[0].means()(0, 0) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(s.pdfs[0].vars()(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(s.pdfs[1].means()(0, 0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(s.pdfs[2].means()(0, 0) == doctest::Approx((0.5 * 7 - 1.0) / 1.5).epsilon(1e-14));

  // A second speaker stream of another dimension keeps the same alignments.
  Matrix wide(3, 2);
  wide << 3.0, 1.0, 7.0, 1.0, -1.0, 1.0;
  const std::vector<const Matrix *> wide_feats{&wide};
  const StateModels w = ReestimateStateGmms(hmm, alis, wide_feats);
  CHECK(w.Dim() == 2);
  CHECK(w.pdfs[0].means()(0, 0) == doctest::Approx(5.0).epsilon(1e-14));

  Matrix short_x(2, 1);
  const std::vector<const Matrix *> bad{&short_x};
  CHECK(CodeOf([&] { ReestimateStateGmms(hmm, alis, bad); }) == Errc::kFrameCountMismatch);
}

TEST_CASE("hmm statistics, adaptation and scoring") {
  Rng rng(41);
  PhoneHmmSet hmm = RandomHmmSet(&rng, {"a", "b", "sil"}, 2, 3);
  const StateModels bg = StateModels::FromHmm(hmm);
  CHECK(bg.NumSlots() == 18);
  const CompositeHmm g = BuildCompositeGraph(hmm, {"a", "b"}, SilencePolicy::kBoundaryOptional);
  const Matrix x = test::RandomMatrix(&rng, 30, 3), y = test::RandomMatrix(&rng, 25, 3);

  SUBCASE("empty and sizes") {
    const HmmStats empty = AccumulateHmmStats(Alignment{}, Matrix(0, 3), bg, true);
    CHECK(empty.TotalOccupancy() == 0.0);
    const Alignment ax = FbAlign(g, hmm.pdfs, x);
    CHECK(AccumulateHmmStats(ax, x, bg, false).TotalOccupancy() == doctest::Approx(30.0).epsilon(1e-12));
    std::vector<AlignEntry> e;
    int counted = 0;
    for (int t = 0; t < 30; ++t) counted += CountedEntries(ax, t, bg, true, &e);
    CHECK(AccumulateHmmStats(ax, x, bg, true).TotalOccupancy() == doctest::Approx(counted).epsilon(1e-12));
    CHECK(CodeOf([&] { AccumulateHmmStats(ax, y, bg, false); }) == Errc::kFrameCountMismatch);
  }
  SUBCASE("additivity") {
    const Alignment ax = FbAlign(g, hmm.pdfs, x), ay = FbAlign(g, hmm.pdfs, y);
    Matrix xy(55, 3);
    xy << x, y;
    Alignment joint = ax;
    joint.frames.insert(joint.frames.end(), ay.frames.begin(), ay.frames.end());
    const HmmStats a = AccumulateHmmStats(joint, xy, bg, true);
    const HmmStats b = AccumulateHmmStats(ax, x, bg, true) + AccumulateHmmStats(ay, y, bg, true);
    CHECK((a.occupancy - b.occupancy).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((a.first - b.first).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("map") {
    const StateModels same = HmmMapAdapt(bg, HmmStats(bg.NumSlots(), 3), MapConfig{16});
    for (int j = 0; j < bg.NumPdfs(); ++j) CHECK(same.pdfs[j].means() == bg.pdfs[j].means());

    HmmStats one(bg.NumSlots(), 3);
    const int slot = bg.SlotOffsets()[4] + 1;
    one.occupancy(slot) = 1.0;
    one.first.row(slot).setOnes();
    const StateModels a = HmmMapAdapt(bg, one, MapConfig{16});
    for (int j = 0; j < bg.NumPdfs(); ++j) {
      const Matrix diff = a.pdfs[j].means() - bg.pdfs[j].means();
      if (j != 4) {
        CHECK(diff.cwiseAbs().maxCoeff() == 0.0);
      } else {
        CHECK(diff.row(0).cwiseAbs().maxCoeff() == 0.0);
        for (int d = 0; d < 3; ++d) CHECK(diff(1, d) == doctest::Approx(1.0 / 17).epsilon(1e-12));
      }
    }
    CHECK(CodeOf([&] { HmmMapAdapt(bg, HmmStats(5, 3), MapConfig{16}); }) == Errc::kLayoutMismatch);
  }
  SUBCASE("scoring identities") {
    for (AlignAlgo algo : {AlignAlgo::kViterbi, AlignAlgo::kForwardBackward}) {
      const Alignment ax = Align(algo, g, hmm.pdfs, x);
      CHECK(test::MaxNormalizationError(ax) < test::kNormalizationTolerance);
      CHECK(ScoreHmm(bg, bg, ax, x, true) == 0.0);
      CHECK(ScoreHmm(bg, bg, ax, x, false) == 0.0);
      const StateModels spk = HmmMapAdapt(bg, AccumulateHmmStats(ax, x, bg, true), MapConfig{16});
      const double own = ScoreHmm(spk, bg, ax, x, true);
      CHECK(std::isfinite(own));
      CHECK(own > 0.0);
    }
  }
}

TEST_CASE("scalar hmm scores") {
  StateModels bg, spk;
  bg.pdfs = {Unit(0.0)};
  spk.pdfs = {Unit(1.0)};
  bg.is_silence = spk.is_silence = {false};
  const Matrix x = Matrix::Ones(1, 1);
  Alignment vit;
  vit.frames = {{{0, 0, 0, 1.0}}};
  vit.path = {0};
  Alignment fb = vit;
  fb.algo = AlignAlgo::kForwardBackward;
  CHECK(ScoreHmmViterbi(spk, bg, vit, x, false) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ScoreHmmFb(spk, bg, fb, x, false) == doctest::Approx(ScoreHmmViterbi(spk, bg, vit, x, false)).epsilon(1e-14));
  CHECK(ScoreHmm(spk, bg, fb, x, false) == doctest::Approx(0.5).epsilon(1e-14));
}

}  // namespace
}  // namespace tdsv
