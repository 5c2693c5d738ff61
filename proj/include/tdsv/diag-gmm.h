// tdsv/diag-gmm.h

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

#ifndef TDSV_DIAG_GMM_H_
#define TDSV_DIAG_GMM_H_

#include <vector>

#include "tdsv/base.h"
#include "tdsv/suff-stats.h"

namespace tdsv {

/// Diagonal-covariance Gaussian mixture.  Immutable apart from the explicit
/// setters, each of which revalidates and refreshes the cached constants.
class Gmm {
 public:
  Gmm() = default;
  /// weights: C; means, vars: C x D.  Weights must sum to 1 within 1e-10 and
  /// variances must be positive.
  Gmm(Vector weights, Matrix means, Matrix vars);

  int NumComponents() const { return static_cast<int>(weights_.size()); }
  int Dim() const { return static_cast<int>(means_.cols()); }

  const Vector &weights() const { return weights_; }
  const Matrix &means() const { return means_; }
  const Matrix &vars() const { return vars_; }

  void SetMeans(Matrix means);

  /// log w_c + log N(x | mu_c, Sigma_c) for every component.
  void ComponentLogLikelihoods(const Eigen::Ref<const Eigen::RowVectorXd> &frame,
                               Vector *out) const;
  /// Batched form: T x C.
  Matrix ComponentLogLikelihoods(const Matrix &frames) const;

  /// log N(x | mu_c, Sigma_c) without the mixture weight.
  void ComponentLogDensities(const Eigen::Ref<const Eigen::RowVectorXd> &frame, Vector *out) const;

  /// log sum_c w_c N(x | mu_c, Sigma_c).
  double LogLikelihood(const Eigen::Ref<const Eigen::RowVectorXd> &frame) const;

  /// Posterior over components; returns the frame log-likelihood.
  double Posteriors(const Eigen::Ref<const Eigen::RowVectorXd> &frame, Vector *post) const;

 private:
  void ComputeGconsts();

  Vector weights_;
  Matrix means_;
  Matrix vars_;
  Matrix inv_vars_;
  Matrix means_invvars_;
  Vector gconsts_;
  Vector gconsts_noweight_;
};

/// Normalizes log-domain scores into probabilities; returns log sum exp.
double LogSumExpNormalize(Vector *log_scores);

double GmmLogLikelihood(const Gmm &gmm, const Vector &frame);
Vector GmmPosteriors(const Gmm &gmm, const Vector &frame);

/// Mean-offset statistics of `frames` against `gmm`.
GmmStats AccumulateStats(const Gmm &gmm, const Matrix &frames);

/// Posterior-weighted moments for re-estimating a GMM: occupancy, sum of x
/// and sum of x^2 per component.
struct GmmAccumulator {
  Vector occupancy;
  Matrix sum;
  Matrix sum_sq;

  GmmAccumulator() = default;
  GmmAccumulator(int num_components, int dim);
  void AddFrame(const Eigen::Ref<const Eigen::RowVectorXd> &frame, const Vector &post);
  void AddFrame(const Eigen::Ref<const Eigen::RowVectorXd> &frame, int component, double post);
  GmmAccumulator &operator+=(const GmmAccumulator &other);
  double TotalOccupancy() const { return occupancy.sum(); }
};

struct GmmUpdateOptions {
  /// Per-dimension variance floor (absolute values).
  Vector var_floor;
  /// Components with less occupancy than this keep their mean and variance.
  double min_count = 1e-3;
  /// Weight given to a component with no occupancy before renormalizing.
  double min_weight = 1e-8;
};

/// Maximum-likelihood update from accumulated moments.  Degenerate
/// components keep their previous parameters (with a warning).
Gmm UpdateGmm(const Gmm &prior, const GmmAccumulator &acc, const GmmUpdateOptions &opts);

/// Binary splitting: repeatedly splits the heaviest component into two with
/// half the weight each and means moved by +/- perturb * sigma, until
/// `target` components exist.
Gmm SplitGmm(const Gmm &gmm, int target, double perturb = 0.1);

/// Single Gaussian with the sample mean and (floored) variance of `frames`.
Gmm GlobalGaussian(const Matrix &frames, const Vector &var_floor);

struct GmmEmOptions {
  int iterations_per_split = 5;
  int final_iterations = 10;
  double var_floor_factor = 1e-3;
  double split_perturb = 0.1;
};

struct GmmTrainResult {
  Gmm gmm;
  /// Total data log-likelihood before every EM update, grouped by the
  /// component count of the stage in which it was measured.
  std::vector<std::vector<double>> stage_log_likelihoods;
};

/// EM from a single global Gaussian via binary splitting up to C components.
/// Throws Errc::kInsufficientData when fewer than C distinct frames exist.
GmmTrainResult TrainGmmEm(const Matrix &frames, int num_components, const GmmEmOptions &opts = {});

/// Floor used by TrainGmmEm: factor times the global per-dimension variance.
Vector VarianceFloor(const Matrix &frames, double factor);

struct MapConfig {
  double relevance = 16.0;
};

/// Mean-only MAP: mu_c' = F_c / (N_c + r) + mu_c.  Weights and variances are
/// copied from the background model.
Gmm MapAdapt(const Gmm &ubm, const GmmStats &stats, const MapConfig &config);

/// sum_t [log p(x_t | speaker) - log p(x_t | ubm)], not normalized by
/// duration.  Throws Errc::kModelShapeMismatch.
double ScoreGmmUbm(const Gmm &speaker, const Gmm &ubm, const Matrix &frames);

}  // namespace tdsv

#endif  // TDSV_DIAG_GMM_H_
