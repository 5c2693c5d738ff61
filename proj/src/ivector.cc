// src/ivector.cc

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

#include "tdsv/ivector.h"

#include <cmath>

#include "tdsv/parallel.h"
#include "tdsv/rng.h"

namespace tdsv {

TotalVariability::TotalVariability(Matrix t, Matrix means, Matrix vars)
    : t_(std::move(t)), means_(std::move(means)), vars_(std::move(vars)) {
  if (t_.cols() < 1) throw Error(Errc::kInvalidArgument, "total variability rank must be >= 1");
  if (means_.rows() != vars_.rows() || means_.cols() != vars_.cols() ||
      t_.rows() != means_.rows() * means_.cols())
    throw Error(Errc::kLayoutMismatch, "T rows must equal slots x dim");
  if (!(vars_.array() > 0).all()) throw Error(Errc::kInvalidArgument, "variances must be positive");
  Precompute();
}

void TotalVariability::Precompute() {
  const int dim = Dim();
  t_invvar_.resize(t_.rows(), t_.cols());
  slot_terms_.resize(NumSlots());
  for (int s = 0; s < NumSlots(); ++s) {
    const Vector inv = vars_.row(s).transpose().cwiseInverse();
    auto block = t_invvar_.middleRows(static_cast<Eigen::Index>(s) * dim, dim);
    block = inv.asDiagonal() * SlotBlock(s);
    slot_terms_[s] = SlotBlock(s).transpose() * block;
  }
}

void TotalVariability::CheckStats(const SuffStats &stats) const {
  if (stats.NumSlots() != NumSlots() || stats.Dim() != Dim())
    throw Error(Errc::kLayoutMismatch,
                "stats layout " + std::to_string(stats.NumSlots()) + "x" + std::to_string(stats.Dim()) +
                    " does not match " + std::to_string(NumSlots()) + "x" + std::to_string(Dim()));
  if (!stats.occupancy.allFinite() || !stats.first.allFinite())
    throw Error(Errc::kNonFiniteStats, "statistics contain NaN or infinity");
  if ((stats.occupancy.array() < 0).any())
    throw Error(Errc::kNonFiniteStats, "negative occupancy");
}

void TotalVariability::PosteriorTerms(const SuffStats &stats, Vector *b, Matrix *l) const {
  const Eigen::Map<const Vector> f(stats.first.data(), stats.first.size());
  *b = t_invvar_.transpose() * f;
  *l = Matrix::Identity(Rank(), Rank());
  for (int s = 0; s < NumSlots(); ++s)
    if (stats.occupancy(s) != 0.0) *l += stats.occupancy(s) * slot_terms_[s];
}

Vector SpdSolve(const Matrix &a, const Vector &b, Matrix *inverse, double *log_det) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-10 * a.trace() / static_cast<double>(a.rows());
    Warn("matrix not positive definite; adding jitter " + std::to_string(jitter));
    Matrix reg = a;
    reg.diagonal().array() += jitter;
    llt.compute(reg);
    if (llt.info() != Eigen::Success)
      throw Error(Errc::kInvalidArgument, "matrix is not positive definite even after regularization");
  }
  if (inverse != nullptr) *inverse = llt.solve(Matrix::Identity(a.rows(), a.cols()));
  if (log_det != nullptr) *log_det = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  return llt.solve(b);
}

IVector ExtractIVector(const TotalVariability &tv, const SuffStats &stats, bool keep_precision) {
  tv.CheckStats(stats);
  Vector b;
  Matrix l;
  tv.PosteriorTerms(stats, &b, &l);
  IVector iv;
  iv.w = SpdSolve(l, b);
  if (keep_precision) iv.precision = std::move(l);
  return iv;
}

namespace {

struct EmAccumulator {
  std::vector<Matrix> a;  // per slot R x R
  Matrix c;               // (slots*D) x R
  double objective = 0.0;

  EmAccumulator(int slots, int dim, int rank)
      : a(slots, Matrix::Zero(rank, rank)), c(Matrix::Zero(static_cast<Eigen::Index>(slots) * dim, rank)) {}

  void Add(const EmAccumulator &o) {
    for (std::size_t s = 0; s < a.size(); ++s) a[s] += o.a[s];
    c += o.c;
    objective += o.objective;
  }
};

void EStep(const TotalVariability &tv, const SuffStats &stats, EmAccumulator *acc) {
  Vector b;
  Matrix l, l_inv;
  tv.PosteriorTerms(stats, &b, &l);
  double log_det = 0.0;
  const Vector w = SpdSolve(l, b, &l_inv, &log_det);
  acc->objective += -0.5 * log_det + 0.5 * b.dot(w);
  const Matrix eww = l_inv + w * w.transpose();
  for (int s = 0; s < tv.NumSlots(); ++s)
    if (stats.occupancy(s) != 0.0) acc->a[s] += stats.occupancy(s) * eww;
  const Eigen::Map<const Vector> f(stats.first.data(), stats.first.size());
  acc->c.noalias() += f * w.transpose();
}

EmAccumulator RunEStep(const TotalVariability &tv, std::span<const SuffStats> stats, int workers) {
  const int n = static_cast<int>(stats.size());
  const int chunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<EmAccumulator> partial(chunks, EmAccumulator(tv.NumSlots(), tv.Dim(), tv.Rank()));
  ParallelFor(chunks, workers, [&](int k) {
    const int end = std::min(n, (k + 1) * kReduceChunk);
    for (int u = k * kReduceChunk; u < end; ++u) EStep(tv, stats[u], &partial[k]);
  });
  EmAccumulator total(tv.NumSlots(), tv.Dim(), tv.Rank());
  for (const auto &p : partial) total.Add(p);
  return total;
}

}  // namespace

TMatrixTrainResult TrainTMatrix(std::span<const SuffStats> stats, const Matrix &means,
                                const Matrix &vars, const TMatrixOptions &opts) {
  if (opts.rank < 1) throw Error(Errc::kInvalidArgument, "rank must be >= 1");
  if (static_cast<int>(stats.size()) < opts.rank)
    throw Error(Errc::kInsufficientUtterances,
                std::to_string(stats.size()) + " utterances for rank " + std::to_string(opts.rank));
  const int slots = static_cast<int>(means.rows()), dim = static_cast<int>(means.cols());

  Rng rng(opts.seed);
  Matrix t(static_cast<Eigen::Index>(slots) * dim, opts.rank);
  for (int s = 0; s < slots; ++s)
    for (int d = 0; d < dim; ++d) {
      const double scale = 0.1 * std::sqrt(vars(s, d));
      for (int r = 0; r < opts.rank; ++r) t(static_cast<Eigen::Index>(s) * dim + d, r) = rng.Normal() * scale;
    }

  TMatrixTrainResult result;
  result.tv = TotalVariability(t, means, vars);
  for (const auto &st : stats) result.tv.CheckStats(st);
  Vector slot_mass = Vector::Zero(slots);
  for (const auto &st : stats) slot_mass += st.occupancy;

  for (int it = 0; it < opts.iterations; ++it) {
    const EmAccumulator acc = RunEStep(result.tv, stats, opts.workers);
    result.objective.push_back(acc.objective);
    for (int s = 0; s < slots; ++s) {
      if (slot_mass(s) <= 0.0) continue;  // no data: keep the current rows
      auto rows = t.middleRows(static_cast<Eigen::Index>(s) * dim, dim);
      const Matrix c_s = acc.c.middleRows(static_cast<Eigen::Index>(s) * dim, dim);
      Eigen::LLT<Matrix> llt(acc.a[s]);
      if (llt.info() != Eigen::Success) {
        Warn("singular T-matrix accumulator for slot " + std::to_string(s) + "; regularizing");
        Matrix reg = acc.a[s];
        reg.diagonal().array() += 1e-10 * reg.trace() / opts.rank + 1e-300;
        llt.compute(reg);
      }
      rows = llt.solve(c_s.transpose()).transpose();
    }
    result.tv = TotalVariability(t, means, vars);
  }
  result.objective.push_back(RunEStep(result.tv, stats, opts.workers).objective);
  return result;
}

double CosineScore(const Vector &a, const Vector &b) {
  if (a.size() != b.size()) throw Error(Errc::kDimensionMismatch, "i-vector ranks differ");
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error(Errc::kZeroVector, "cosine score of a zero vector");
  return a.dot(b) / (na * nb);
}

IVector EnrollIVector(const TotalVariability &tv, std::span<const SuffStats> stats, EnrollMode mode) {
  if (stats.empty()) throw Error(Errc::kEmptyEnrollment, "no enrollment utterances");
  if (mode == EnrollMode::kSumStats) {
    SuffStats total = stats.front();
    for (std::size_t i = 1; i < stats.size(); ++i) total += stats[i];
    return ExtractIVector(tv, total);
  }
  IVector avg;
  avg.w = Vector::Zero(tv.Rank());
  for (const auto &s : stats) avg.w += ExtractIVector(tv, s).w;
  avg.w /= static_cast<double>(stats.size());
  const double norm = avg.w.norm();
  if (norm > 0.0) avg.w /= norm;
  return avg;
}

}  // namespace tdsv
