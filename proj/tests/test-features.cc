// tests/test-features.cc

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

#include "tdsv/features.h"
#include "test-util.h"

namespace tdsv {
namespace {

Waveform Tone(double hz, int n, double amp = 0.5) {
  Waveform w;
  for (int i = 0; i < n; ++i) w.samples.push_back(amp * std::sin(2 * M_PI * hz * i / 16000.0));
  return w;
}

FeatureMatrix FromRows(const Matrix &m) {
  FeatureMatrix f;
  f.frames = m;
  return f;
}

bool AllFinite(const Matrix &m) { return m.allFinite(); }

TEST_CASE("frame counts and dimensions") {
  FrontendConfig config;
  const Waveform w = Tone(440, 16000);
  const FeatureMatrix mfcc = ComputeMfcc(w, config);
  const FeatureMatrix fbank = ComputeFbank(w, config);
  CHECK(mfcc.NumFrames() == (16000 - 400) / 160 + 1);
  CHECK(mfcc.NumFrames() == 98);
  CHECK(fbank.NumFrames() == mfcc.NumFrames());
  CHECK(mfcc.Dim() == 20);
  CHECK(fbank.Dim() == 40);
  CHECK(ExtractFeatures(w, config, FeatureKind::kMfcc).Dim() == 60);
  CHECK(ExtractFeatures(w, config, FeatureKind::kFbank).Dim() == 120);
  CHECK(AllFinite(mfcc.frames));
  CHECK(AllFinite(fbank.frames));
}

TEST_CASE("zero signal gives constant frames") {
  FrontendConfig config;
  Waveform w;
  w.samples.assign(4000, 0.0);
  for (const auto &f : {ComputeMfcc(w, config), ComputeFbank(w, config)}) {
    CHECK(AllFinite(f.frames));
    for (int t = 1; t < f.NumFrames(); ++t) CHECK(f.frames.row(t) == f.frames.row(0));
  }
}

TEST_CASE("random waveforms give finite features") {
  Rng rng(5);
  FrontendConfig config;
  for (int trial = 0; trial < 5; ++trial) {
    Waveform w;
    const int n = 400 + rng.UniformInt(0, 3000);
    for (int i = 0; i < n; ++i) w.samples.push_back(rng.Uniform() * 2 - 1);
    CHECK(AllFinite(ExtractFeatures(w, config, FeatureKind::kMfcc).frames));
    CHECK(AllFinite(ExtractFeatures(w, config, FeatureKind::kFbank).frames));
  }
}

TEST_CASE("tone peaks at the nearest filter") {
  FrontendConfig config;
  const FeatureMatrix fbank = ComputeFbank(Tone(1000, 16000), config);
  // Filter centres, equally spaced on the natural-log mel scale.
  auto mel = [](double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::exp(m / 1127.0) - 1.0); };
  const double step = (mel(8000.0) - mel(0.0)) / (config.num_filters + 1);
  int nearest = 0;
  for (int f = 0; f < config.num_filters; ++f)
    if (std::abs(hz((f + 1) * step) - 1000) < std::abs(hz((nearest + 1) * step) - 1000)) nearest = f;
  Eigen::Index argmax;
  fbank.frames.row(fbank.NumFrames() / 2).maxCoeff(&argmax);
  CHECK(argmax == nearest);
}

TEST_CASE("deltas") {
  SUBCASE("constant input") {
    const FeatureMatrix d = AppendDeltas(FromRows(Matrix::Constant(10, 3, 4.0)), 2);
    CHECK(d.Dim() == 9);
    CHECK(d.frames.rightCols(6).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("ramp") {
    Matrix ramp(10, 1);
    for (int t = 0; t < 10; ++t) ramp(t, 0) = t;
    const FeatureMatrix d = AppendDeltas(FromRows(ramp), 2);
    for (int t = 2; t < 8; ++t) CHECK(d.frames(t, 1) == doctest::Approx(1.0).epsilon(1e-12));
    for (int t = 4; t < 6; ++t) CHECK(std::abs(d.frames(t, 2)) < 1e-12);
  }
  SUBCASE("reversal flips the first delta") {
    Rng rng(1);
    const Matrix x = test::RandomMatrix(&rng, 12, 2);
    const Matrix rev = x.colwise().reverse();
    const FeatureMatrix a = AppendDeltas(FromRows(x), 2), b = AppendDeltas(FromRows(rev), 2);
    for (int t = 4; t < 8; ++t)
      for (int k = 0; k < 2; ++k) {
        CHECK(b.frames(11 - t, 2 + k) == doctest::Approx(-a.frames(t, 2 + k)).epsilon(1e-12));
        CHECK(b.frames(11 - t, 4 + k) == doctest::Approx(a.frames(t, 4 + k)).epsilon(1e-12));
      }
  }
}

TEST_CASE("cmvn") {
  Matrix two(2, 1);
  two << 0, 2;
  const FeatureMatrix n = ApplyCmvn(FromRows(two));
  CHECK(n.frames(0, 0) == doctest::Approx(-1.0));
  CHECK(n.frames(1, 0) == doctest::Approx(1.0));

  Rng rng(2);
  Matrix x = test::RandomMatrix(&rng, 50, 4, 3.0);
  x.col(2).setConstant(7.0);
  const FeatureMatrix once = ApplyCmvn(FromRows(x));
  const FeatureMatrix twice = ApplyCmvn(once);
  CHECK((once.frames - twice.frames).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(once.frames.col(2).cwiseAbs().maxCoeff() == 0.0);

  Matrix one(1, 2);
  one << 3, -4;
  CHECK(ApplyCmvn(FromRows(one)).frames.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tandem") {
  Rng rng(3);
  const FeatureMatrix a = FromRows(test::RandomMatrix(&rng, 98, 60));
  const FeatureMatrix b = FromRows(test::RandomMatrix(&rng, 98, 60));
  const FeatureMatrix t = TandemConcat(a, b);
  CHECK(t.Dim() == 120);
  CHECK(t.frames.leftCols(60) == a.frames);
  CHECK(t.frames.rightCols(60) == b.frames);
  CHECK(TandemConcat(a, FromRows(Matrix(98, 0))).frames == a.frames);
  try {
    TandemConcat(a, FromRows(test::RandomMatrix(&rng, 97, 60)));
    FAIL("expected frame-count-mismatch");
  } catch (const Error &e) {
    CHECK(e.code() == Errc::kFrameCountMismatch);
  }
}

}  // namespace
}  // namespace tdsv
