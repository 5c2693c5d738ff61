// src/diag-gmm.cc

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

#include "tdsv/diag-gmm.h"

#include <algorithm>
#include <set>

namespace tdsv {

SuffStats &SuffStats::operator+=(const SuffStats &other) {
  if (other.NumSlots() != NumSlots() || other.Dim() != Dim())
    throw Error(Errc::kLayoutMismatch, "cannot merge stats with different layouts");
  occupancy += other.occupancy;
  first += other.first;
  return *this;
}

SuffStats &SuffStats::operator*=(double scale) {
  occupancy *= scale;
  first *= scale;
  return *this;
}

Gmm::Gmm(Vector weights, Matrix means, Matrix vars)
    : weights_(std::move(weights)), means_(std::move(means)), vars_(std::move(vars)) {
  if (weights_.size() == 0) throw Error(Errc::kInvalidArgument, "GMM needs at least 1 component");
  if (means_.rows() != weights_.size() || vars_.rows() != weights_.size() ||
      vars_.cols() != means_.cols() || means_.cols() == 0)
    throw Error(Errc::kDimensionMismatch, "inconsistent GMM parameter shapes");
  if (std::abs(weights_.sum() - 1.0) > 1e-10 || (weights_.array() < 0).any())
    throw Error(Errc::kInvalidArgument, "GMM weights must be a probability vector");
  if (!(vars_.array() > 0).all()) throw Error(Errc::kInvalidArgument, "GMM variances must be positive");
  ComputeGconsts();
}

void Gmm::SetMeans(Matrix means) {
  if (means.rows() != means_.rows() || means.cols() != means_.cols())
    throw Error(Errc::kDimensionMismatch, "SetMeans: shape changed");
  means_ = std::move(means);
  ComputeGconsts();
}

void Gmm::ComputeGconsts() {
  inv_vars_ = vars_.cwiseInverse();
  means_invvars_ = means_.cwiseProduct(inv_vars_);
  const int dim = Dim();
  gconsts_.resize(NumComponents());
  gconsts_noweight_.resize(NumComponents());
  for (int c = 0; c < NumComponents(); ++c) {
    double g = -0.5 * dim * kLog2Pi;
    g -= 0.5 * vars_.row(c).array().log().sum();
    g -= 0.5 * means_.row(c).cwiseProduct(means_invvars_.row(c)).sum();
    gconsts_noweight_(c) = g;
    gconsts_(c) = weights_(c) > 0 ? std::log(weights_(c)) + g : kLogZero;
  }
}

void Gmm::ComponentLogLikelihoods(const Eigen::Ref<const Eigen::RowVectorXd> &frame,
                                  Vector *out) const {
  if (frame.size() != Dim())
    throw Error(Errc::kDimensionMismatch, "frame dim " + std::to_string(frame.size()) +
                                              " vs model dim " + std::to_string(Dim()));
  const Eigen::RowVectorXd sq = frame.array().square();
  *out = gconsts_ + means_invvars_ * frame.transpose() - 0.5 * (inv_vars_ * sq.transpose());
}

void Gmm::ComponentLogDensities(const Eigen::Ref<const Eigen::RowVectorXd> &frame,
                                Vector *out) const {
  if (frame.size() != Dim())
    throw Error(Errc::kDimensionMismatch, "frame dim " + std::to_string(frame.size()) +
                                              " vs model dim " + std::to_string(Dim()));
  const Eigen::RowVectorXd sq = frame.array().square();
  *out = gconsts_noweight_ + means_invvars_ * frame.transpose() - 0.5 * (inv_vars_ * sq.transpose());
}

Matrix Gmm::ComponentLogLikelihoods(const Matrix &frames) const {
  if (frames.cols() != Dim())
    throw Error(Errc::kDimensionMismatch, "frame dim " + std::to_string(frames.cols()) +
                                              " vs model dim " + std::to_string(Dim()));
  Matrix ll = frames * means_invvars_.transpose();
  ll.noalias() -= 0.5 * (frames.array().square().matrix() * inv_vars_.transpose());
  ll.rowwise() += gconsts_.transpose();
  return ll;
}

double LogSumExpNormalize(Vector *log_scores) {
  const double max = log_scores->maxCoeff();
  if (max == kLogZero) {
    log_scores->setConstant(1.0 / static_cast<double>(log_scores->size()));
    return kLogZero;
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < log_scores->size(); ++i) {
    (*log_scores)(i) = std::exp((*log_scores)(i) - max);
    sum += (*log_scores)(i);
  }
  *log_scores /= sum;
  return max + std::log(sum);
}

double Gmm::LogLikelihood(const Eigen::Ref<const Eigen::RowVectorXd> &frame) const {
  Vector ll;
  ComponentLogLikelihoods(frame, &ll);
  return LogSumExpNormalize(&ll);
}

double Gmm::Posteriors(const Eigen::Ref<const Eigen::RowVectorXd> &frame, Vector *post) const {
  ComponentLogLikelihoods(frame, post);
  return LogSumExpNormalize(post);
}

double GmmLogLikelihood(const Gmm &gmm, const Vector &frame) {
  return gmm.LogLikelihood(frame.transpose());
}

Vector GmmPosteriors(const Gmm &gmm, const Vector &frame) {
  Vector post;
  gmm.Posteriors(frame.transpose(), &post);
  return post;
}

GmmStats AccumulateStats(const Gmm &gmm, const Matrix &frames) {
  GmmStats stats(gmm.NumComponents(), gmm.Dim());
  if (frames.rows() == 0) return stats;
  if (frames.cols() != gmm.Dim())
    throw Error(Errc::kDimensionMismatch, "AccumulateStats: frame dim mismatch");
  Matrix post = gmm.ComponentLogLikelihoods(frames);
  for (Eigen::Index t = 0; t < post.rows(); ++t) {
    Vector row = post.row(t).transpose();
    LogSumExpNormalize(&row);
    post.row(t) = row.transpose();
  }
  stats.occupancy = post.colwise().sum().transpose();
  // F_c = sum_t p_tc x_t - N_c mu_c
  stats.first = post.transpose() * frames;
  stats.first -= stats.occupancy.asDiagonal() * gmm.means();
  return stats;
}

GmmAccumulator::GmmAccumulator(int num_components, int dim)
    : occupancy(Vector::Zero(num_components)),
      sum(Matrix::Zero(num_components, dim)),
      sum_sq(Matrix::Zero(num_components, dim)) {}

void GmmAccumulator::AddFrame(const Eigen::Ref<const Eigen::RowVectorXd> &frame, const Vector &post) {
  const Eigen::RowVectorXd sq = frame.array().square();
  for (Eigen::Index c = 0; c < post.size(); ++c) {
    if (post(c) == 0.0) continue;
    occupancy(c) += post(c);
    sum.row(c) += post(c) * frame;
    sum_sq.row(c) += post(c) * sq;
  }
}

void GmmAccumulator::AddFrame(const Eigen::Ref<const Eigen::RowVectorXd> &frame, int component,
                              double post) {
  occupancy(component) += post;
  sum.row(component) += post * frame;
  sum_sq.row(component) += post * frame.array().square().matrix();
}

GmmAccumulator &GmmAccumulator::operator+=(const GmmAccumulator &other) {
  occupancy += other.occupancy;
  sum += other.sum;
  sum_sq += other.sum_sq;
  return *this;
}

Gmm UpdateGmm(const Gmm &prior, const GmmAccumulator &acc, const GmmUpdateOptions &opts) {
  const int num_comp = prior.NumComponents(), dim = prior.Dim();
  const double total = acc.TotalOccupancy();
  if (total <= 0.0) {
    Warn("GMM update with no data; keeping previous parameters");
    return prior;
  }
  Vector weights(num_comp);
  Matrix means = prior.means(), vars = prior.vars();
  int degenerate = 0;
  for (int c = 0; c < num_comp; ++c) {
    const double n = acc.occupancy(c);
    weights(c) = std::max(n / total, opts.min_weight);
    if (n < opts.min_count) {
      ++degenerate;
      continue;
    }
    means.row(c) = acc.sum.row(c) / n;
    vars.row(c) = acc.sum_sq.row(c) / n - means.row(c).array().square().matrix();
    for (int d = 0; d < dim; ++d) {
      const double floor = opts.var_floor.size() == dim ? opts.var_floor(d) : 0.0;
      vars(c, d) = std::max(vars(c, d), std::max(floor, 1e-300));
    }
  }
  if (degenerate > 0)
    Warn(std::to_string(degenerate) + " of " + std::to_string(num_comp) +
         " components have too little data; kept their previous parameters");
  weights /= weights.sum();
  return Gmm(std::move(weights), std::move(means), std::move(vars));
}

Gmm SplitGmm(const Gmm &gmm, int target, double perturb) {
  Gmm cur = gmm;
  while (cur.NumComponents() < target) {
    const int n = cur.NumComponents();
    // Split the heaviest components first; one full doubling at most per round.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return cur.weights()(a) > cur.weights()(b); });
    const int num_split = std::min(n, target - n);
    Vector weights(n + num_split);
    Matrix means(n + num_split, cur.Dim()), vars(n + num_split, cur.Dim());
    weights.head(n) = cur.weights();
    means.topRows(n) = cur.means();
    vars.topRows(n) = cur.vars();
    for (int k = 0; k < num_split; ++k) {
      const int c = order[k];
      const Eigen::RowVectorXd offset = perturb * cur.vars().row(c).cwiseSqrt();
      weights(c) *= 0.5;
      weights(n + k) = weights(c);
      means.row(n + k) = cur.means().row(c) - offset;
      means.row(c) = cur.means().row(c) + offset;
      vars.row(n + k) = cur.vars().row(c);
    }
    weights /= weights.sum();
    cur = Gmm(std::move(weights), std::move(means), std::move(vars));
  }
  return cur;
}

Vector VarianceFloor(const Matrix &frames, double factor) {
  const Eigen::RowVectorXd mean = frames.colwise().mean();
  Vector var = ((frames.rowwise() - mean).array().square().colwise().sum() /
                static_cast<double>(frames.rows()))
                   .transpose();
  for (Eigen::Index d = 0; d < var.size(); ++d) var(d) = std::max(var(d), 1e-10);
  return factor * var;
}

Gmm GlobalGaussian(const Matrix &frames, const Vector &var_floor) {
  const Eigen::RowVectorXd mean = frames.colwise().mean();
  Eigen::RowVectorXd var = (frames.rowwise() - mean).array().square().colwise().sum() /
                           static_cast<double>(frames.rows());
  for (Eigen::Index d = 0; d < var.size(); ++d)
    var(d) = std::max({var(d), var_floor.size() == var.size() ? var_floor(d) : 0.0, 1e-10});
  return Gmm(Vector::Ones(1), Matrix(mean), Matrix(var));
}

namespace {

/// One EM pass: accumulates under `gmm`, returns the total log-likelihood.
double EmAccumulate(const Gmm &gmm, const Matrix &frames, GmmAccumulator *acc) {
  Matrix post = gmm.ComponentLogLikelihoods(frames);
  double total = 0.0;
  for (Eigen::Index t = 0; t < post.rows(); ++t) {
    Vector row = post.row(t).transpose();
    total += LogSumExpNormalize(&row);
    post.row(t) = row.transpose();
  }
  acc->occupancy = post.colwise().sum().transpose();
  acc->sum = post.transpose() * frames;
  acc->sum_sq = post.transpose() * frames.array().square().matrix();
  return total;
}

}  // namespace

GmmTrainResult TrainGmmEm(const Matrix &frames, int num_components, const GmmEmOptions &opts) {
  if (num_components < 1) throw Error(Errc::kInvalidArgument, "need at least one component");
  {
    std::set<std::uint64_t> distinct;
    for (Eigen::Index t = 0; t < frames.rows() && distinct.size() < static_cast<std::size_t>(num_components); ++t) {
      Hasher h;
      h.AddBytes(frames.row(t).data(), sizeof(double) * frames.cols());
      distinct.insert(h.value());
    }
    if (distinct.size() < static_cast<std::size_t>(num_components))
      throw Error(Errc::kInsufficientData, "need at least " + std::to_string(num_components) +
                                               " distinct frames, have " +
                                               std::to_string(distinct.size()));
  }
  GmmUpdateOptions update;
  update.var_floor = VarianceFloor(frames, opts.var_floor_factor);

  GmmTrainResult result;
  result.gmm = GlobalGaussian(frames, update.var_floor);
  GmmAccumulator acc(1, static_cast<int>(frames.cols()));
  while (true) {
    const bool last = result.gmm.NumComponents() >= num_components;
    const int iters = last ? opts.final_iterations : opts.iterations_per_split;
    std::vector<double> history;
    for (int it = 0; it < iters; ++it) {
      history.push_back(EmAccumulate(result.gmm, frames, &acc));
      result.gmm = UpdateGmm(result.gmm, acc, update);
    }
    GmmAccumulator final_acc;
    history.push_back(EmAccumulate(result.gmm, frames, &final_acc));
    result.stage_log_likelihoods.push_back(std::move(history));
    if (last) break;
    result.gmm = SplitGmm(result.gmm, std::min(2 * result.gmm.NumComponents(), num_components),
                          opts.split_perturb);
  }
  return result;
}

Gmm MapAdapt(const Gmm &ubm, const GmmStats &stats, const MapConfig &config) {
  if (stats.NumSlots() != ubm.NumComponents() || stats.Dim() != ubm.Dim())
    throw Error(Errc::kLayoutMismatch, "MapAdapt: stats do not match the background model");
  if (config.relevance < 0) throw Error(Errc::kInvalidArgument, "relevance factor must be >= 0");
  Matrix means = ubm.means();
  for (int c = 0; c < ubm.NumComponents(); ++c) {
    const double denom = stats.occupancy(c) + config.relevance;
    if (denom > 0) means.row(c) += stats.first.row(c) / denom;
  }
  return Gmm(ubm.weights(), std::move(means), ubm.vars());
}

double ScoreGmmUbm(const Gmm &speaker, const Gmm &ubm, const Matrix &frames) {
  if (speaker.NumComponents() != ubm.NumComponents() || speaker.Dim() != ubm.Dim())
    throw Error(Errc::kModelShapeMismatch, "speaker model and UBM differ in shape");
  if (frames.rows() == 0) return 0.0;
  Matrix spk = speaker.ComponentLogLikelihoods(frames);
  Matrix bg = ubm.ComponentLogLikelihoods(frames);
  double llr = 0.0;
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    Vector a = spk.row(t).transpose(), b = bg.row(t).transpose();
    llr += LogSumExpNormalize(&a) - LogSumExpNormalize(&b);
  }
  return llr;
}

}  // namespace tdsv
