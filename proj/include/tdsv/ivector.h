// tdsv/ivector.h

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

#ifndef TDSV_IVECTOR_H_
#define TDSV_IVECTOR_H_

#include <cstdint>
#include <span>
#include <vector>

#include "tdsv/suff-stats.h"

namespace tdsv {

struct IVector {
  Vector w;
  /// Posterior precision L; empty when not kept.
  Matrix precision;
};

/// Low-rank total-variability model M = m + T w over a super-vector of
/// `NumSlots()` slots of dimension `Dim()`.  Sigma is kept per slot as a
/// diagonal and never re-estimated.
class TotalVariability {
 public:
  TotalVariability() = default;
  /// t: (slots*D) x R, means and vars: slots x D.
  TotalVariability(Matrix t, Matrix means, Matrix vars);

  int NumSlots() const { return static_cast<int>(means_.rows()); }
  int Dim() const { return static_cast<int>(means_.cols()); }
  int Rank() const { return static_cast<int>(t_.cols()); }
  const Matrix &t() const { return t_; }
  const Matrix &means() const { return means_; }
  const Matrix &vars() const { return vars_; }

  /// Rows of T belonging to slot s: D x R.
  auto SlotBlock(int s) const { return t_.middleRows(static_cast<Eigen::Index>(s) * Dim(), Dim()); }

  /// T_s' Sigma_s^-1 T_s for slot s.
  const Matrix &SlotPrecisionTerm(int s) const { return slot_terms_[s]; }

  /// Checks that stats use this model's layout; throws kLayoutMismatch or
  /// kNonFiniteStats.
  void CheckStats(const SuffStats &stats) const;

  /// Linear term b = sum_s T_s' Sigma_s^-1 F_s and precision L.
  void PosteriorTerms(const SuffStats &stats, Vector *b, Matrix *l) const;

 private:
  void Precompute();

  Matrix t_;
  Matrix means_;
  Matrix vars_;
  Matrix t_invvar_;                 // Sigma^-1 T, same shape as T
  std::vector<Matrix> slot_terms_;  // per slot R x R
};

/// w = L^-1 T' Sigma^-1 F with L = I + sum_s N_s T_s' Sigma_s^-1 T_s.
IVector ExtractIVector(const TotalVariability &tv, const SuffStats &stats, bool keep_precision = false);

struct TMatrixOptions {
  int rank = 20;
  int iterations = 10;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct TMatrixTrainResult {
  TotalVariability tv;
  /// EM auxiliary sum_u (-1/2 log|L_u| + 1/2 b_u' L_u^-1 b_u), measured in
  /// each E-step plus once after the last M-step.
  std::vector<double> objective;
};

/// EM for the factor-analysis model.  Sigma and m stay fixed.  Throws
/// kInsufficientUtterances when fewer than `rank` utterances are given.
TMatrixTrainResult TrainTMatrix(std::span<const SuffStats> stats, const Matrix &means,
                                const Matrix &vars, const TMatrixOptions &opts);

/// Symmetric positive definite solve via Cholesky.  On failure a jitter of
/// 1e-10 * trace / n is added to the diagonal (with a warning) and retried.
/// Returns the inverse when `inverse` is non-null.
Vector SpdSolve(const Matrix &a, const Vector &b, Matrix *inverse = nullptr, double *log_det = nullptr);

/// Throws kZeroVector when either vector has zero norm.
double CosineScore(const Vector &a, const Vector &b);

enum class EnrollMode { kSumStats, kAverageIVectors };

/// Default: sum the statistics and extract once.  kAverageIVectors: extract
/// per utterance, average, and scale the average to unit length.
IVector EnrollIVector(const TotalVariability &tv, std::span<const SuffStats> stats,
                      EnrollMode mode = EnrollMode::kSumStats);

}  // namespace tdsv

#endif  // TDSV_IVECTOR_H_
