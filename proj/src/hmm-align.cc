// src/hmm-align.cc

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

#include "tdsv/hmm-align.h"

#include <algorithm>
#include <cstdio>
#include <map>

namespace tdsv {

const char *AlignAlgoName(AlignAlgo algo) {
  return algo == AlignAlgo::kViterbi ? "viterbi" : "fb";
}

AlignAlgo ParseAlignAlgo(std::string_view name) {
  if (name == "viterbi" || name == "vit") return AlignAlgo::kViterbi;
  if (name == "fb") return AlignAlgo::kForwardBackward;
  throw Error(Errc::kConfigError, "unknown alignment algorithm '" + std::string(name) + "'");
}

std::vector<double> Alignment::NodePosteriors(int t, int num_nodes) const {
  std::vector<double> out(num_nodes, 0.0);
  for (const auto &e : frames[t]) out[e.node] += e.post;
  return out;
}

std::uint64_t Alignment::Hash() const {
  Hasher h;
  h.Add(static_cast<std::int64_t>(algo));
  for (const auto &frame : frames) {
    h.Add(static_cast<std::int64_t>(frame.size()));
    for (const auto &e : frame) {
      h.Add(static_cast<std::int64_t>(e.node));
      h.Add(static_cast<std::int64_t>(e.pdf));
      h.Add(static_cast<std::int64_t>(e.mix));
      h.Add(e.post);
    }
  }
  for (int q : path) h.Add(static_cast<std::int64_t>(q));
  return h.value();
}

namespace {

void CheckTable(const CompositeHmm &graph, const Matrix &state_loglik) {
  if (graph.nodes.empty()) throw Error(Errc::kInvalidArgument, "empty graph");
  if (state_loglik.cols() != graph.NumStates())
    throw Error(Errc::kDimensionMismatch, "emission table does not match the graph");
  if (state_loglik.rows() < graph.MinFrames())
    throw Error(Errc::kNoValidPath, std::to_string(state_loglik.rows()) + " frames but the graph needs at least " +
                                        std::to_string(graph.MinFrames()));
}

}  // namespace

ViterbiResult ViterbiDecode(const CompositeHmm &graph, const Matrix &state_loglik) {
  CheckTable(graph, state_loglik);
  const int num_frames = static_cast<int>(state_loglik.rows());
  const int n = graph.NumStates();
  Matrix delta = Matrix::Constant(num_frames, n, kLogZero);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> back(num_frames, n);
  back.setConstant(-1);
  delta(0, 0) = state_loglik(0, 0);
  for (int t = 1; t < num_frames; ++t) {
    for (int j = 0; j < n; ++j) {
      // Candidates in increasing source index; strict comparison keeps the
      // lowest index on ties.  The self-loop (source j) comes last.
      double best = kLogZero;
      int arg = -1;
      for (const auto &arc : graph.prev[j]) {
        const double s = delta(t - 1, arc.to) + arc.log_prob;
        if (s > best) {
          best = s;
          arg = arc.to;
        }
      }
      const double stay = delta(t - 1, j) + graph.nodes[j].self_log_prob;
      if (stay > best) {
        best = stay;
        arg = j;
      }
      if (arg >= 0) {
        delta(t, j) = best + state_loglik(t, j);
        back(t, j) = arg;
      }
    }
  }
  const int last = n - 1;
  const double total = delta(num_frames - 1, last) + graph.final_log_prob;
  if (!(total > kLogZero))
    throw Error(Errc::kNoValidPath, "no path through the graph fits the frames");
  ViterbiResult res{std::vector<int>(num_frames), total};
  int q = last;
  for (int t = num_frames - 1; t >= 0; --t) {
    res.path[t] = q;
    if (t > 0) q = back(t, q);
  }
  return res;
}

ForwardBackwardResult ForwardBackward(const CompositeHmm &graph, const Matrix &state_loglik) {
  CheckTable(graph, state_loglik);
  const int num_frames = static_cast<int>(state_loglik.rows());
  const int n = graph.NumStates();
  // Scaled recursions: alpha is renormalized every frame and emissions are
  // taken relative to the best emission among states the forward pass can
  // reach, so nothing underflows on the live part of the trellis.
  std::vector<double> self(n);
  std::vector<std::vector<std::pair<int, double>>> prev(n), next(n);
  for (int j = 0; j < n; ++j) {
    self[j] = std::exp(graph.nodes[j].self_log_prob);
    for (const auto &arc : graph.prev[j]) prev[j].push_back({arc.to, std::exp(arc.log_prob)});
    for (const auto &arc : graph.nodes[j].next) next[j].push_back({arc.to, std::exp(arc.log_prob)});
  }
  Matrix alpha = Matrix::Zero(num_frames, n);
  Matrix emit = Matrix::Zero(num_frames, n);  // exp(loglik - shift_t)
  Vector scale(num_frames);
  double log_prob = 0.0;
  std::vector<double> pred(n);
  for (int t = 0; t < num_frames; ++t) {
    double shift = kLogZero;
    if (t == 0) {
      std::fill(pred.begin(), pred.end(), 0.0);
      pred[0] = 1.0;
    } else {
      for (int j = 0; j < n; ++j) {
        double acc = alpha(t - 1, j) * self[j];
        for (const auto &[i, p] : prev[j]) acc += alpha(t - 1, i) * p;
        pred[j] = acc;
      }
    }
    for (int j = 0; j < n; ++j)
      if (pred[j] > 0.0) shift = std::max(shift, state_loglik(t, j));
    if (shift == kLogZero)
      throw Error(Errc::kNoValidPath, "no path through the graph fits the frames");
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (pred[j] <= 0.0) continue;
      emit(t, j) = std::exp(state_loglik(t, j) - shift);
      alpha(t, j) = pred[j] * emit(t, j);
      sum += alpha(t, j);
    }
    if (!(sum > 0.0)) throw Error(Errc::kNoValidPath, "no path through the graph fits the frames");
    alpha.row(t) /= sum;
    scale(t) = sum;
    log_prob += shift + std::log(sum);
  }
  const int last = n - 1;
  if (!(alpha(num_frames - 1, last) > 0.0) || graph.final_log_prob == kLogZero)
    throw Error(Errc::kNoValidPath, "no path through the graph fits the frames");
  log_prob += std::log(alpha(num_frames - 1, last)) + graph.final_log_prob;

  // Backward pass with a rolling beta; gamma overwrites alpha in place.
  Eigen::ArrayXd beta = Eigen::ArrayXd::Zero(n), eb(n);
  beta(last) = 1.0;
  ForwardBackwardResult res{std::move(alpha), log_prob};
  Matrix &gamma = res.gamma;
  for (int t = num_frames - 1; t >= 0; --t) {
    if (t < num_frames - 1) {
      const double inv = 1.0 / scale(t + 1);
      for (int i = 0; i < n; ++i) {
        double acc = self[i] * eb(i);
        for (const auto &[j, p] : next[i]) acc += p * eb(j);
        beta(i) = acc * inv;
      }
    }
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
      eb(j) = emit(t, j) * beta(j);
      z += (gamma(t, j) *= beta(j));
    }
    if (z > 0.0) gamma.row(t) /= z;
  }
  return res;
}

EmissionTable ComputeEmissions(const CompositeHmm &graph, std::span<const Gmm> pdfs,
                               const Matrix &frames) {
  const int num_frames = static_cast<int>(frames.rows());
  EmissionTable table;
  table.state_loglik.resize(num_frames, graph.NumStates());
  table.mixture_post.assign(pdfs.size(), Matrix());
  std::vector<Vector> pdf_loglik(pdfs.size());
  for (int j = 0; j < graph.NumStates(); ++j) {
    const int pdf = graph.nodes[j].pdf;
    if (pdf < 0 || pdf >= static_cast<int>(pdfs.size()))
      throw Error(Errc::kInvalidArgument, "graph refers to pdf " + std::to_string(pdf));
    if (table.mixture_post[pdf].size() == 0) {
      Matrix ll = pdfs[pdf].ComponentLogLikelihoods(frames);
      Vector total(num_frames);
      for (int t = 0; t < num_frames; ++t) {
        Vector row = ll.row(t).transpose();
        total(t) = LogSumExpNormalize(&row);
        ll.row(t) = row.transpose();
      }
      table.mixture_post[pdf] = std::move(ll);
      pdf_loglik[pdf] = std::move(total);
    }
    table.state_loglik.col(j) = pdf_loglik[pdf];
  }
  return table;
}

namespace {

/// Appends the mixture split of `node` at frame t scaled by `state_post`.
void AddNodeEntries(const CompositeHmm &graph, const EmissionTable &table, int t, int node,
                    double state_post, std::vector<AlignEntry> *out) {
  const int pdf = graph.nodes[node].pdf;
  const Matrix &mp = table.mixture_post[pdf];
  for (Eigen::Index g = 0; g < mp.cols(); ++g) {
    const double p = state_post * mp(t, g);
    if (p > 0.0) out->push_back({node, pdf, static_cast<int>(g), p});
  }
}

void PruneAndNormalize(std::vector<AlignEntry> *frame, double threshold) {
  if (threshold > 0.0) {
    std::erase_if(*frame, [&](const AlignEntry &e) { return e.post < threshold; });
  }
  double sum = 0.0;
  for (const auto &e : *frame) sum += e.post;
  if (sum > 0.0)
    for (auto &e : *frame) e.post /= sum;
}

}  // namespace

Alignment ViterbiAlign(const CompositeHmm &graph, std::span<const Gmm> pdfs, const Matrix &frames,
                       const AlignOptions &opts) {
  const EmissionTable table = ComputeEmissions(graph, pdfs, frames);
  const ViterbiResult vit = ViterbiDecode(graph, table.state_loglik);
  Alignment ali;
  ali.algo = AlignAlgo::kViterbi;
  ali.path = vit.path;
  ali.log_likelihood = vit.log_prob;
  ali.frames.resize(frames.rows());
  for (int t = 0; t < static_cast<int>(frames.rows()); ++t) {
    AddNodeEntries(graph, table, t, vit.path[t], 1.0, &ali.frames[t]);
    PruneAndNormalize(&ali.frames[t], opts.prune_threshold);
  }
  return ali;
}

Alignment FbAlign(const CompositeHmm &graph, std::span<const Gmm> pdfs, const Matrix &frames,
                  const AlignOptions &opts) {
  const EmissionTable table = ComputeEmissions(graph, pdfs, frames);
  const ForwardBackwardResult fb = ForwardBackward(graph, table.state_loglik);
  Alignment ali;
  ali.algo = AlignAlgo::kForwardBackward;
  ali.log_likelihood = fb.log_prob;
  ali.frames.resize(frames.rows());
  for (int t = 0; t < static_cast<int>(frames.rows()); ++t) {
    for (int j = 0; j < graph.NumStates(); ++j) {
      const double g = fb.gamma(t, j);
      if (g > 0.0 && g >= opts.prune_threshold) AddNodeEntries(graph, table, t, j, g, &ali.frames[t]);
    }
    PruneAndNormalize(&ali.frames[t], opts.prune_threshold);
  }
  return ali;
}

Alignment Align(AlignAlgo algo, const CompositeHmm &graph, std::span<const Gmm> pdfs,
                const Matrix &frames, const AlignOptions &opts) {
  return algo == AlignAlgo::kViterbi ? ViterbiAlign(graph, pdfs, frames, opts)
                                     : FbAlign(graph, pdfs, frames, opts);
}

void WritePosteriorCsv(std::ostream &os, const std::string &utt_id, const Alignment &alignment,
                       const CompositeHmm &graph, const std::vector<std::string> &phones,
                       bool header) {
  if (header) os << "utt_id,frame,state,phone,state_index,posterior\n";
  char buf[64];
  for (int t = 0; t < alignment.NumFrames(); ++t) {
    std::map<int, double> mass;
    for (const auto &e : alignment.frames[t]) mass[e.node] += e.post;
    for (const auto &[node, p] : mass) {
      const auto &n = graph.nodes[node];
      std::snprintf(buf, sizeof(buf), "%.17g", p);
      os << utt_id << ',' << t << ',' << node << ',' << phones.at(n.phone) << ',' << n.state << ','
         << buf << '\n';
    }
  }
}

}  // namespace tdsv
