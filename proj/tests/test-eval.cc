// tests/test-eval.cc

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
#include <sstream>

#include <doctest.h>

#include "oracles.h"
#include "tdsv/eval.h"
#include "test-util.h"

namespace tdsv {
namespace {

TEST_CASE("eer examples") {
  CHECK(ComputeEer({1}, {0}) == 0.0);
  CHECK(ComputeEer({1, 2, 3}, {3, 1, 2}) == doctest::Approx(0.5));
  CHECK(ComputeEer({1, 3, 5}, {0, 2, 4}) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(ComputeMinDcf({1, 3, 5}, {0, 2, 4}, kMdcf08) ==
        doctest::Approx(oracle::BruteForceMinDcf({1, 3, 5}, {0, 2, 4}, 10, 1, 0.01)).epsilon(1e-15));
  CHECK(ComputeMinDcf({5, 6}, {0, 1}, kMdcf08) == 0.0);
  CHECK(ComputeMinDcf({5, 6}, {0, 1}, kMdcf10) == 0.0);
  try {
    ComputeEer({}, {1});
    FAIL("expected empty-class");
  } catch (const Error &e) {
    CHECK(e.code() == Errc::kEmptyClass);
  }
}

TEST_CASE("metrics against the brute-force oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int nt = 1 + rng.UniformInt(0, 49), nn = 1 + rng.UniformInt(0, 49);
    const bool coarse = trial % 2 == 0;  // many ties
    std::vector<double> tar, non;
    for (int i = 0; i < nt; ++i) tar.push_back(coarse ? rng.UniformInt(0, 6) : rng.Normal() + 1);
    for (int i = 0; i < nn; ++i) non.push_back(coarse ? rng.UniformInt(0, 4) : rng.Normal());
    const double eer = ComputeEer(tar, non);
    CHECK(eer == doctest::Approx(oracle::BruteForceEer(tar, non)).epsilon(1e-12));
    CHECK(eer >= 0.0);
    CHECK(eer <= 1.0);
    // Scores that carry no information stay near chance.
    CHECK(ComputeEer(tar, tar) <= 0.5 + 1.0 / nt);
    for (const DcfParams &p : {kMdcf08, kMdcf10}) {
      const double dcf = ComputeMinDcf(tar, non, p);
      CHECK(dcf == oracle::BruteForceMinDcf(tar, non, p.c_miss, p.c_fa, p.p_target));
      CHECK(dcf >= 0.0);
      CHECK(dcf <= 1.0);
    }
    // Invariance under a strictly increasing transform.
    std::vector<double> et(tar), en(non);
    for (auto &s : et) s = std::exp(0.5 * s) - 3;
    for (auto &s : en) s = std::exp(0.5 * s) - 3;
    CHECK(ComputeEer(et, en) == doctest::Approx(eer).epsilon(1e-12));
    CHECK(ComputeMinDcf(et, en, kMdcf08) == doctest::Approx(ComputeMinDcf(tar, non, kMdcf08)).epsilon(1e-12));
    // Duplicating both classes changes nothing.
    std::vector<double> dt(tar), dn(non);
    dt.insert(dt.end(), tar.begin(), tar.end());
    dn.insert(dn.end(), non.begin(), non.end());
    CHECK(ComputeEer(dt, dn) == doctest::Approx(eer).epsilon(1e-12));
  }
}

TEST_CASE("threshold sweep") {
  const auto points = SweepThresholds({1, 3, 5}, {0, 2, 4});
  REQUIRE(points.size() == 7);
  CHECK(points.front().p_miss == 0.0);
  CHECK(points.front().p_fa == 1.0);
  CHECK(points[1].p_miss == 0.0);
  CHECK(points[1].p_fa == doctest::Approx(2.0 / 3));
  CHECK(std::isinf(points.back().threshold));
  CHECK(points.back().p_miss == 1.0);
  CHECK(points.back().p_fa == 0.0);
  for (std::size_t i = 1; i < points.size(); ++i) {
    CHECK(points[i].p_miss >= points[i - 1].p_miss);
    CHECK(points[i].p_fa <= points[i - 1].p_fa);
  }
}

std::vector<Trial> SomeTrials() {
  return {MakeTrial("m1", "u1", TrialType::kTC), MakeTrial("m1", "u2", TrialType::kIC),
          MakeTrial("m2", "u1", TrialType::kTW), MakeTrial("m2", "u3", TrialType::kIW)};
}

TEST_CASE("protocol") {
  const std::set<std::string> models{"m1", "m2"}, utts{"u1", "u2", "u3"};
  auto scorer = [](const Trial &t) { return static_cast<double>(t.model_id.size() + t.test_utt_id.back()); };
  CHECK(RunProtocol({}, scorer, models, utts).empty());

  const auto trials = SomeTrials();
  for (int workers : {1, 3}) {
    const ScoreSet s = RunProtocol(trials, scorer, models, utts, workers);
    REQUIRE(s.size() == trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
      CHECK(s[i].model_id == trials[i].model_id);
      CHECK(s[i].utt_id == trials[i].test_utt_id);
      CHECK(s[i].is_target == (s[i].type == TrialType::kTC));
      CHECK(s[i].score == scorer(trials[i]));
    }
  }

  std::vector<Trial> bad = trials;
  bad.push_back(MakeTrial("m9", "u1", TrialType::kIC));
  bad.push_back(MakeTrial("m1", "u9", TrialType::kIC));
  try {
    RunProtocol(bad, scorer, models, utts);
    FAIL("expected missing-model");
  } catch (const Error &e) {
    CHECK(e.code() == Errc::kMissingModel);
    CHECK(std::string(e.what()).find("m9") != std::string::npos);
    CHECK(std::string(e.what()).find("u9") != std::string::npos);
  }
  bad.erase(bad.end() - 2);
  try {
    RunProtocol(bad, scorer, models, utts);
    FAIL("expected missing-utterance");
  } catch (const Error &e) {
    CHECK(e.code() == Errc::kMissingUtterance);
  }
}

TEST_CASE("metric rows and files") {
  ScoreSet s;
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    s.push_back({"m", "t" + std::to_string(i), TrialType::kTC, rng.Normal() + 2, true});
    s.push_back({"m", "i" + std::to_string(i), TrialType::kIC, rng.Normal(), false});
    s.push_back({"m", "w" + std::to_string(i), TrialType::kIW, rng.Normal() - 1, false});
  }
  const auto rows = EvaluateScores("sys", s);
  REQUIRE(rows.size() == 2);  // no TW trials, no TW row
  CHECK(rows[0].nontarget_type == TrialType::kIC);
  CHECK(rows[1].nontarget_type == TrialType::kIW);
  CHECK(rows[0].num_target == 20);
  CHECK(rows[0].eer == ComputeEer(s, {TrialType::kTC, TrialType::kIC}));

  std::stringstream ss;
  WriteScores(ss, s);
  const ScoreSet back = ReadScores(ss, "scores");
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back[i].score == s[i].score);
    CHECK(back[i].type == s[i].type);
    CHECK(back[i].is_target == s[i].is_target);
  }
  std::ostringstream kv;
  WriteMetricKeyValues(kv, rows);
  CHECK(kv.str().find("sys.IC.eer = ") != std::string::npos);
}

}  // namespace
}  // namespace tdsv
