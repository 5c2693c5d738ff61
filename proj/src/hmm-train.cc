// src/hmm-train.cc

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

#include "tdsv/hmm-train.h"

#include <algorithm>
#include <set>

namespace tdsv {

std::vector<int> UniformSegmentation(int num_frames, int num_states) {
  if (num_states < 1 || num_frames < num_states)
    throw Error(Errc::kInsufficientFrames, std::to_string(num_frames) + " frames for " +
                                               std::to_string(num_states) + " states");
  const int each = num_frames / num_states;
  std::vector<int> seg(num_frames);
  for (int t = 0; t < num_frames; ++t) seg[t] = std::min(t / each, num_states - 1);
  return seg;
}

namespace {

SilencePolicy FlatStartPolicy(SilencePolicy policy) {
  return policy == SilencePolicy::kBoundaryOptional ? SilencePolicy::kBoundary : policy;
}

struct RoundAccumulators {
  std::vector<GmmAccumulator> gmm;
  std::vector<double> stay, leave;
  double objective = 0.0;

  RoundAccumulators(const PhoneHmmSet &hmm, int dim) : stay(hmm.NumPdfs(), 0.0), leave(hmm.NumPdfs(), 0.0) {
    for (const auto &pdf : hmm.pdfs) gmm.emplace_back(pdf.NumComponents(), dim);
  }

  void AddTransitions(const CompositeHmm &graph, const std::vector<int> &path) {
    for (std::size_t t = 0; t < path.size(); ++t) {
      const int pdf = graph.nodes[path[t]].pdf;
      if (t + 1 < path.size() && path[t + 1] == path[t]) {
        stay[pdf] += 1.0;
      } else {
        leave[pdf] += 1.0;
      }
    }
  }
};

PhoneHmmSet Reestimate(const PhoneHmmSet &hmm, const RoundAccumulators &acc,
                       const GmmUpdateOptions &update) {
  PhoneHmmSet out = hmm;
  for (int p = 0; p < hmm.NumPdfs(); ++p) {
    if (acc.gmm[p].TotalOccupancy() > 0.0) out.pdfs[p] = UpdateGmm(hmm.pdfs[p], acc.gmm[p], update);
    const double n = acc.stay[p] + acc.leave[p];
    if (n > 0.0) out.self_loop[p] = std::clamp(acc.stay[p] / n, 0.01, 0.99);
  }
  return out;
}

}  // namespace

HmmTrainResult TrainMonophoneHmms(std::span<const HmmTrainingUtterance> corpus,
                                  const std::vector<std::string> &phones,
                                  const HmmTrainOptions &opts) {
  if (corpus.empty()) throw Error(Errc::kInsufficientFrames, "no training utterances");
  if (opts.num_mix < 1 || opts.num_sil_mix < 1)
    throw Error(Errc::kInvalidArgument, "mixture counts must be >= 1");
  const int dim = static_cast<int>(corpus.front().frames->cols());

  std::set<std::string> seen;
  for (const auto &u : corpus) {
    if (u.transcript == nullptr || u.transcript->empty())
      throw Error(Errc::kEmptyTranscript, "training utterance without transcript");
    if (u.frames->cols() != dim) throw Error(Errc::kDimensionMismatch, "training features differ in dimension");
    seen.insert(u.transcript->begin(), u.transcript->end());
  }
  for (const auto &p : phones)
    if (p != opts.silence_phone && !seen.count(p))
      throw Error(Errc::kPhoneMissingFromCorpus, "phone '" + p + "' never occurs in the training transcripts");

  PhoneHmmSet hmm;
  hmm.silence_phone = opts.silence_phone;
  hmm.num_mix = opts.num_mix;
  hmm.num_sil_mix = opts.num_sil_mix;
  for (const auto &p : phones)
    if (p != opts.silence_phone) hmm.phones.push_back(p);
  if (opts.silence != SilencePolicy::kNone || seen.count(opts.silence_phone))
    hmm.phones.push_back(opts.silence_phone);
  // Placeholder parameters; only the topology matters for the flat start.
  {
    const Gmm unit(Vector::Ones(1), Matrix::Zero(1, dim), Matrix::Ones(1, dim));
    hmm.pdfs.assign(kStatesPerPhone * hmm.NumPhones(), unit);
    hmm.self_loop.assign(hmm.pdfs.size(), 0.5);
  }

  Matrix all_frames;
  {
    Eigen::Index total = 0;
    for (const auto &u : corpus) total += u.frames->rows();
    all_frames.resize(total, dim);
    Eigen::Index row = 0;
    for (const auto &u : corpus) {
      all_frames.middleRows(row, u.frames->rows()) = *u.frames;
      row += u.frames->rows();
    }
  }
  GmmUpdateOptions update;
  update.var_floor = VarianceFloor(all_frames, opts.var_floor_factor);

  // Flat start: uniform segmentation over the mandatory states.
  {
    RoundAccumulators acc(hmm, dim);
    for (const auto &u : corpus) {
      const CompositeHmm graph = BuildCompositeGraph(hmm, *u.transcript, FlatStartPolicy(opts.silence));
      const auto seg = UniformSegmentation(static_cast<int>(u.frames->rows()), graph.NumStates());
      for (std::size_t t = 0; t < seg.size(); ++t)
        acc.gmm[graph.nodes[seg[t]].pdf].AddFrame(u.frames->row(t), 0, 1.0);
      acc.AddTransitions(graph, seg);
    }
    for (int p = 0; p < hmm.NumPdfs(); ++p) {
      if (acc.gmm[p].TotalOccupancy() <= 0.0)
        throw Error(Errc::kInsufficientFrames, "state " + std::to_string(p) + " received no frames at flat start");
      const double n = acc.gmm[p].occupancy(0);
      Matrix mean = acc.gmm[p].sum / n;
      Matrix var = acc.gmm[p].sum_sq / n - mean.array().square().matrix();
      for (int d = 0; d < dim; ++d) var(0, d) = std::max(var(0, d), update.var_floor(d));
      hmm.pdfs[p] = Gmm(Vector::Ones(1), std::move(mean), std::move(var));
      hmm.self_loop[p] = std::clamp(acc.stay[p] / (acc.stay[p] + acc.leave[p]), 0.01, 0.99);
    }
  }

  auto run_round = [&](RoundAccumulators *acc) {
    for (const auto &u : corpus) {
      const CompositeHmm graph = BuildCompositeGraph(hmm, *u.transcript, opts.silence);
      const Alignment ali = ViterbiAlign(graph, hmm.pdfs, *u.frames, AlignOptions{0.0});
      acc->objective += ali.log_likelihood;
      for (int t = 0; t < ali.NumFrames(); ++t)
        for (const auto &e : ali.frames[t]) acc->gmm[e.pdf].AddFrame(u.frames->row(t), e.mix, e.post);
      acc->AddTransitions(graph, ali.path);
    }
  };

  HmmTrainResult result;
  int speech_mix = 1, sil_mix = 1;
  int rounds = opts.initial_rounds;
  while (true) {
    std::vector<double> history;
    for (int r = 0; r < rounds; ++r) {
      RoundAccumulators acc(hmm, dim);
      run_round(&acc);
      history.push_back(acc.objective);
      hmm = Reestimate(hmm, acc, update);
    }
    result.stage_objectives.push_back(std::move(history));
    if (speech_mix >= opts.num_mix && sil_mix >= opts.num_sil_mix) break;
    speech_mix = std::min(2 * speech_mix, opts.num_mix);
    sil_mix = std::min(2 * sil_mix, opts.num_sil_mix);
    for (int p = 0; p < hmm.NumPdfs(); ++p) {
      const int target = hmm.IsSilencePdf(p) ? sil_mix : speech_mix;
      hmm.pdfs[p] = SplitGmm(hmm.pdfs[p], target, opts.split_perturb);
    }
    rounds = opts.rounds_per_split;
  }
  {
    RoundAccumulators acc(hmm, dim);
    run_round(&acc);
    result.stage_objectives.back().push_back(acc.objective);
  }
  result.hmm = std::move(hmm);
  return result;
}

}  // namespace tdsv
