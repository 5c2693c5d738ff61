// tests/test-ivector.cc

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
#include "tdsv/ivector.h"
#include "test-util.h"

namespace tdsv {
namespace {

TotalVariability Scalar(double t, double var) {
  return TotalVariability(Matrix::Constant(1, 1, t), Matrix::Zero(1, 1), Matrix::Constant(1, 1, var));
}

SuffStats ScalarStats(double n, double f) {
  SuffStats s(1, 1);
  s.occupancy(0) = n;
  s.first(0, 0) = f;
  return s;
}

SuffStats RandomStats(Rng *rng, int slots, int dim) {
  SuffStats s(slots, dim);
  for (int i = 0; i < slots; ++i) s.occupancy(i) = 5 * rng->Uniform();
  s.first = test::RandomMatrix(rng, slots, dim, 2.0);
  return s;
}

TotalVariability RandomTv(Rng *rng, int slots, int dim, int rank) {
  Matrix var = test::RandomMatrix(rng, slots, dim).array().square() + 0.5;
  return TotalVariability(test::RandomMatrix(rng, slots * dim, rank), test::RandomMatrix(rng, slots, dim), var);
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

TEST_CASE("extraction closed forms") {
  const IVector iv = ExtractIVector(Scalar(1, 1), ScalarStats(1, 1), true);
  CHECK(iv.precision(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(iv.w(0) == doctest::Approx(0.5).epsilon(1e-15));

  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const double t = rng.Normal() * 3, var = 0.01 + 10 * rng.Uniform(), n = 50 * rng.Uniform(),
                 f = rng.Normal() * 10;
    CHECK(std::abs(ExtractIVector(Scalar(t, var), ScalarStats(n, f)).w(0) - oracle::ScalarIVector(t, var, n, f)) <
          1e-12 * std::max(1.0, std::abs(oracle::ScalarIVector(t, var, n, f))));
  }

  const TotalVariability tv = RandomTv(&rng, 4, 3, 2);
  SuffStats zero_f = RandomStats(&rng, 4, 3);
  zero_f.first.setZero();
  CHECK(ExtractIVector(tv, zero_f).w.cwiseAbs().maxCoeff() == 0.0);

  const TotalVariability zero_t(Matrix::Zero(12, 2), tv.means(), tv.vars());
  const IVector z = ExtractIVector(zero_t, RandomStats(&rng, 4, 3), true);
  CHECK(z.precision == Matrix::Identity(2, 2));
  CHECK(z.w.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("extraction matches a dense solve") {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const TotalVariability tv = RandomTv(&rng, 3, 2, 3);
    const SuffStats s = RandomStats(&rng, 3, 2);
    Matrix l = Matrix::Identity(3, 3);
    Vector b = Vector::Zero(3);
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 2; ++d) {
        const Eigen::RowVectorXd row = tv.t().row(c * 2 + d);
        l += s.occupancy(c) / tv.vars()(c, d) * row.transpose() * row;
        b += s.first(c, d) / tv.vars()(c, d) * row.transpose();
      }
    const Vector w = l.fullPivLu().solve(b);
    const IVector iv = ExtractIVector(tv, s, true);
    CHECK((iv.w - w).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((iv.precision - l).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(iv.precision.llt().info() == Eigen::Success);
  }
}

TEST_CASE("scaling statistics") {
  const double t = 0.7, var = 2.0, n = 3.0, f = 1.5;
  double prev = 0.0;
  for (double lambda : {0.01, 0.1, 1.0, 10.0, 100.0, 1e6}) {
    const double w = ExtractIVector(Scalar(t, var), ScalarStats(lambda * n, lambda * f)).w(0);
    CHECK(std::abs(w) > prev);
    prev = std::abs(w);
  }
  CHECK(prev == doctest::Approx(f / (t * n)).epsilon(1e-5));
}

TEST_CASE("layout and value checks") {
  Rng rng(3);
  const TotalVariability tv = RandomTv(&rng, 4, 3, 2);
  CHECK(CodeOf([&] { ExtractIVector(tv, SuffStats(3, 3)); }) == Errc::kLayoutMismatch);
  SuffStats bad = RandomStats(&rng, 4, 3);
  bad.first(1, 1) = std::numeric_limits<double>::infinity();
  CHECK(CodeOf([&] { ExtractIVector(tv, bad); }) == Errc::kNonFiniteStats);
}

TEST_CASE("cosine") {
  Vector a(3), b(3);
  a << 1, 2, 3;
  b << 3, 0, -1;
  CHECK(CosineScore(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(CosineScore(a, -a) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(CosineScore(a, b) == 0.0);
  CHECK(CodeOf([&] { CosineScore(a, Vector::Zero(3)); }) == Errc::kZeroVector);
}

TEST_CASE("enrollment") {
  Rng rng(4);
  const TotalVariability tv = RandomTv(&rng, 4, 3, 2);
  const SuffStats a = RandomStats(&rng, 4, 3), b = RandomStats(&rng, 4, 3);
  const std::vector<SuffStats> one{a};
  CHECK(EnrollIVector(tv, one).w == ExtractIVector(tv, a).w);
  const std::vector<SuffStats> two{a, b};
  CHECK(EnrollIVector(tv, two).w == ExtractIVector(tv, a + b).w);
  SuffStats za = a, zb = b;
  za.first.setZero();
  zb.first.setZero();
  const std::vector<SuffStats> zeros{za, zb};
  CHECK(EnrollIVector(tv, zeros).w.cwiseAbs().maxCoeff() == 0.0);
  const Vector avg = EnrollIVector(tv, two, EnrollMode::kAverageIVectors).w;
  CHECK(avg.norm() == doctest::Approx(1.0).epsilon(1e-14));
  const Vector expect = (ExtractIVector(tv, a).w + ExtractIVector(tv, b).w).normalized();
  CHECK((avg - expect).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(CodeOf([&] { EnrollIVector(tv, std::vector<SuffStats>{}); }) == Errc::kEmptyEnrollment);
}

TEST_CASE("t-matrix training") {
  Rng rng(5);
  const int slots = 12;
  const Vector truth = test::RandomMatrix(&rng, slots, 1);
  std::vector<SuffStats> stats;
  for (int u = 0; u < 80; ++u) {
    const double w = rng.Normal();
    SuffStats s(slots, 1);
    for (int c = 0; c < slots; ++c) {
      const double n = 10 + 10 * rng.Uniform();
      s.occupancy(c) = n;
      s.first(c, 0) = n * truth(c) * w + std::sqrt(n) * 0.3 * rng.Normal();
    }
    stats.push_back(s);
  }
  const Matrix means = Matrix::Zero(slots, 1), vars = Matrix::Constant(slots, 1, 0.09);
  TMatrixOptions opts;
  opts.rank = 1;
  opts.iterations = 15;
  const TMatrixTrainResult r = TrainTMatrix(stats, means, vars, opts);
  const Vector est = r.tv.t().col(0);
  CHECK(std::abs(est.dot(truth)) / (est.norm() * truth.norm()) > 0.99);
  for (std::size_t i = 1; i < r.objective.size(); ++i) CHECK(r.objective[i] >= r.objective[i - 1] - 1e-8);

  const TMatrixTrainResult again = TrainTMatrix(stats, means, vars, opts);
  CHECK(again.tv.t() == r.tv.t());
  opts.workers = 3;
  CHECK(TrainTMatrix(stats, means, vars, opts).tv.t() == r.tv.t());

  opts.rank = 100;
  CHECK(CodeOf([&] { TrainTMatrix(stats, means, vars, opts); }) == Errc::kInsufficientUtterances);
}

TEST_CASE("rank and shape") {
  Rng rng(6);
  std::vector<SuffStats> stats;
  for (int u = 0; u < 8; ++u) stats.push_back(RandomStats(&rng, 4, 2));
  TMatrixOptions opts;
  opts.rank = 3;
  opts.iterations = 2;
  const auto r = TrainTMatrix(stats, Matrix::Zero(4, 2), Matrix::Ones(4, 2), opts);
  CHECK(r.tv.t().rows() == 8);
  CHECK(r.tv.t().cols() == 3);
}

}  // namespace
}  // namespace tdsv
