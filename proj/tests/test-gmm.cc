// tests/test-gmm.cc

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
#include "tdsv/diag-gmm.h"
#include "test-util.h"

namespace tdsv {
namespace {

Gmm Scalar(std::vector<double> w, std::vector<double> mu, std::vector<double> var) {
  const int c = static_cast<int>(w.size());
  return Gmm(Eigen::Map<Vector>(w.data(), c), Eigen::Map<Matrix>(mu.data(), c, 1),
             Eigen::Map<Matrix>(var.data(), c, 1));
}

Gmm RandomGmm(Rng *rng, int c, int d) {
  Vector w(c);
  for (int i = 0; i < c; ++i) w(i) = 0.1 + rng->Uniform();
  w /= w.sum();
  Matrix var = test::RandomMatrix(rng, c, d).array().square() + 0.2;
  return Gmm(w, test::RandomMatrix(rng, c, d, 2.0), var);
}

TEST_CASE("log likelihood") {
  Vector x = Vector::Zero(1);
  CHECK(GmmLogLikelihood(Scalar({1}, {0}, {1}), x) == doctest::Approx(-0.91894).epsilon(1e-5));
  CHECK(GmmLogLikelihood(Scalar({1}, {0}, {1}), x) == doctest::Approx(-0.5 * std::log(2 * M_PI)).epsilon(1e-14));
  x(0) = 0.7;
  CHECK(GmmLogLikelihood(Scalar({0.2, 0.8}, {1, 1}, {2, 2}), x) ==
        doctest::Approx(GmmLogLikelihood(Scalar({1}, {1}, {2}), x)).epsilon(1e-14));
  try {
    GmmLogLikelihood(Scalar({1}, {0}, {1}), Vector::Zero(2));
    FAIL("expected dimension-mismatch");
  } catch (const Error &e) {
    CHECK(e.code() == Errc::kDimensionMismatch);
  }

  // Against a direct evaluation of the mixture density.
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Gmm g = RandomGmm(&rng, 1 + rng.UniformInt(0, 4), 1 + rng.UniformInt(0, 4));
    const Vector f = test::RandomMatrix(&rng, g.Dim(), 1);
    double p = 0.0;
    for (int c = 0; c < g.NumComponents(); ++c)
      p += g.weights()(c) * std::exp(oracle::LogGauss(f.transpose(), g.means().row(c), g.vars().row(c)));
    CHECK(GmmLogLikelihood(g, f) == doctest::Approx(std::log(p)).epsilon(1e-12));
  }
}

TEST_CASE("posteriors") {
  const Vector x = Vector::Zero(1);
  CHECK(GmmPosteriors(Scalar({1}, {3}, {2}), x)(0) == 1.0);
  const Vector p = GmmPosteriors(Scalar({0.3, 0.7}, {1, 1}, {2, 2}), Vector::Constant(1, 5.0));
  CHECK(p(0) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(p(1) == doctest::Approx(0.7).epsilon(1e-14));
  const Vector q = GmmPosteriors(Scalar({0.5, 0.5}, {0, 2}, {1, 1}), x);
  const double e2 = std::exp(2.0);
  CHECK(q(0) == doctest::Approx(e2 / (e2 + 1)).epsilon(1e-14));
  CHECK(q(1) == doctest::Approx(1 / (e2 + 1)).epsilon(1e-14));
  CHECK(q(0) == doctest::Approx(0.8808).epsilon(1e-4));

  Vector scores(3);
  scores << -1000, -1001, -1002;
  Vector shifted = scores.array() + 1e4;
  const double total = LogSumExpNormalize(&scores);
  LogSumExpNormalize(&shifted);
  CHECK(total == doctest::Approx(-1000 + std::log(1 + std::exp(-1.0) + std::exp(-2.0))).epsilon(1e-14));
  CHECK(scores.sum() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK((scores - shifted).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("sufficient statistics") {
  const Gmm one = Scalar({1}, {0.5}, {1});
  SUBCASE("empty") {
    const GmmStats s = AccumulateStats(one, Matrix(0, 1));
    CHECK(s.occupancy.sum() == 0.0);
    CHECK(s.first.cwiseAbs().sum() == 0.0);
  }
  SUBCASE("single component") {
    Matrix f(2, 1);
    f << 1.0, 3.0;
    const GmmStats s = AccumulateStats(one, f);
    CHECK(s.occupancy(0) == 2.0);
    CHECK(s.first(0, 0) == doctest::Approx(1 + 3 - 2 * 0.5));
  }
  SUBCASE("two components") {
    const GmmStats s = AccumulateStats(Scalar({0.5, 0.5}, {0, 2}, {1, 1}), Matrix::Zero(1, 1));
    CHECK(s.occupancy(0) == doctest::Approx(0.8808).epsilon(1e-4));
    CHECK(s.occupancy(1) == doctest::Approx(0.1192).epsilon(1e-3));
    CHECK(s.first(0, 0) == 0.0);
    CHECK(s.first(1, 0) == doctest::Approx(-0.2384).epsilon(1e-3));
  }
  SUBCASE("additivity") {
    Rng rng(9);
    const Gmm g = RandomGmm(&rng, 4, 3);
    const Matrix a = test::RandomMatrix(&rng, 17, 3), b = test::RandomMatrix(&rng, 11, 3);
    Matrix ab(28, 3);
    ab << a, b;
    const GmmStats joint = AccumulateStats(g, ab);
    const GmmStats sum = AccumulateStats(g, a) + AccumulateStats(g, b);
    CHECK((joint.occupancy - sum.occupancy).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((joint.first - sum.first).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(joint.TotalOccupancy() == doctest::Approx(28.0).epsilon(1e-12));
  }
}

TEST_CASE("em training") {
  Rng rng(11);
  SUBCASE("one component is the sample moments") {
    const Matrix x = test::RandomMatrix(&rng, 200, 2, 3.0);
    const Gmm g = TrainGmmEm(x, 1).gmm;
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::RowVectorXd var = (x.rowwise() - mean).array().square().colwise().mean();
    CHECK((g.means().row(0) - mean).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((g.vars().row(0) - var).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("two clusters") {
    Matrix x(400, 1);
    for (int i = 0; i < 400; ++i) x(i, 0) = (rng.Uniform() < 0.5 ? 10.0 : 0.0) + 0.5 * rng.Normal();
    // Children of a split start with the parent's variance, which leaves EM
    // close to a saddle point on symmetric data; it needs many iterations to
    // pull the two halves apart.
    GmmEmOptions opts;
    opts.final_iterations = 150;
    const Gmm g = TrainGmmEm(x, 2, opts).gmm;
    double lo = std::min(g.means()(0, 0), g.means()(1, 0));
    double hi = std::max(g.means()(0, 0), g.means()(1, 0));
    CHECK(std::abs(lo) < 0.2);
    CHECK(std::abs(hi - 10.0) < 0.2);
  }
  SUBCASE("monotone within each stage") {
    const Matrix x = test::RandomMatrix(&rng, 300, 3, 2.0);
    const auto result = TrainGmmEm(x, 8);
    CHECK(result.gmm.NumComponents() == 8);
    for (const auto &stage : result.stage_log_likelihoods)
      for (std::size_t i = 1; i < stage.size(); ++i) CHECK(stage[i] >= stage[i - 1] - 1e-8);
  }
  SUBCASE("variance floor") {
    Matrix x = test::RandomMatrix(&rng, 100, 2);
    x.col(1).setConstant(1.0);
    x(0, 1) = 1.5;
    const Gmm g = TrainGmmEm(x, 4).gmm;
    const Vector floor = VarianceFloor(x, 1e-3);
    for (int c = 0; c < 4; ++c)
      for (int d = 0; d < 2; ++d) CHECK(g.vars()(c, d) >= floor(d) * (1 - 1e-12));
  }
}

TEST_CASE("map adaptation") {
  const Gmm ubm = Scalar({1}, {0}, {1});
  SUBCASE("zero stats") {
    Rng rng(2);
    const Gmm g = RandomGmm(&rng, 3, 2);
    const Gmm a = MapAdapt(g, GmmStats(3, 2), MapConfig{16});
    CHECK(a.means() == g.means());
    CHECK(a.vars() == g.vars());
    CHECK(a.weights() == g.weights());
  }
  SUBCASE("one frame") {
    const Gmm a = MapAdapt(ubm, AccumulateStats(ubm, Matrix::Ones(1, 1)), MapConfig{16});
    CHECK(a.means()(0, 0) == doctest::Approx(1.0 / 17).epsilon(1e-14));
  }
  SUBCASE("frames at the mean") {
    const Gmm off = Scalar({1}, {2}, {1});
    for (double r : {0.0, 1.0, 16.0, 1e6}) {
      CHECK(MapAdapt(off, AccumulateStats(off, Matrix::Constant(5, 1, 2.0)), MapConfig{r}).means()(0, 0) == 2.0);
    }
  }
  SUBCASE("limits") {
    Rng rng(3);
    const Matrix x = test::RandomMatrix(&rng, 30, 1, 2.0);
    const GmmStats s = AccumulateStats(ubm, x);
    CHECK(std::abs(MapAdapt(ubm, s, MapConfig{1e9}).means()(0, 0)) < 1e-6);
    CHECK(MapAdapt(ubm, s, MapConfig{0}).means()(0, 0) == doctest::Approx(x.mean()).epsilon(1e-10));
  }
}

TEST_CASE("llr scoring") {
  const Gmm ubm = Scalar({1}, {0}, {1}), spk = Scalar({1}, {1}, {1});
  CHECK(ScoreGmmUbm(spk, ubm, Matrix::Ones(1, 1)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ScoreGmmUbm(spk, ubm, Matrix::Ones(7, 1)) == doctest::Approx(3.5).epsilon(1e-14));
  Rng rng(5);
  const Gmm g = RandomGmm(&rng, 4, 3);
  CHECK(ScoreGmmUbm(g, g, test::RandomMatrix(&rng, 20, 3)) == 0.0);
}

}  // namespace
}  // namespace tdsv
