// src/phone-hmm.cc

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

#include "tdsv/phone-hmm.h"

#include <algorithm>

namespace tdsv {

int PhoneHmmSet::PhoneIndex(const std::string &phone) const {
  for (int i = 0; i < NumPhones(); ++i)
    if (phones[i] == phone) return i;
  return -1;
}

int PhoneHmmSet::TotalMixtures() const {
  int total = 0;
  for (const auto &g : pdfs) total += g.NumComponents();
  return total;
}

void PhoneHmmSet::Validate() const {
  if (static_cast<int>(pdfs.size()) != kStatesPerPhone * NumPhones() ||
      self_loop.size() != pdfs.size())
    throw Error(Errc::kInvalidArgument, "PhoneHmmSet: need 3 pdfs and transitions per phone");
  for (double a : self_loop)
    if (!(a > 0.0 && a < 1.0)) throw Error(Errc::kInvalidArgument, "self-loop must be in (0, 1)");
  for (const auto &g : pdfs)
    if (g.Dim() != Dim()) throw Error(Errc::kDimensionMismatch, "PhoneHmmSet: mixed dimensions");
}

const char *SilencePolicyName(SilencePolicy policy) {
  switch (policy) {
    case SilencePolicy::kNone: return "none";
    case SilencePolicy::kBoundary: return "boundary";
    case SilencePolicy::kBoundaryOptional: return "optional";
  }
  return "?";
}

SilencePolicy ParseSilencePolicy(std::string_view name) {
  if (name == "none") return SilencePolicy::kNone;
  if (name == "boundary") return SilencePolicy::kBoundary;
  if (name == "optional") return SilencePolicy::kBoundaryOptional;
  throw Error(Errc::kConfigError, "unknown silence policy '" + std::string(name) + "'");
}

void CompositeHmm::Finalize() {
  prev.assign(nodes.size(), {});
  for (int i = 0; i < NumStates(); ++i)
    for (const auto &arc : nodes[i].next) prev[arc.to].push_back({i, arc.log_prob});
  for (auto &p : prev)
    std::sort(p.begin(), p.end(), [](const GraphArc &a, const GraphArc &b) { return a.to < b.to; });
}

int CompositeHmm::MinFrames() const {
  if (nodes.empty()) return 0;
  // Shortest path in node count over the DAG, nodes already topologically ordered.
  std::vector<int> dist(nodes.size(), 1 << 29);
  dist[0] = 1;
  for (int i = 0; i < NumStates(); ++i)
    for (const auto &arc : nodes[i].next) dist[arc.to] = std::min(dist[arc.to], dist[i] + 1);
  return dist.back();
}

namespace {

struct Block {
  int phone;
  bool optional;
};

}  // namespace

CompositeHmm BuildCompositeGraph(const PhoneHmmSet &hmm, const std::vector<std::string> &transcript,
                                 SilencePolicy policy) {
  std::vector<std::vector<int>> words(1);
  const bool has_separators =
      std::find(transcript.begin(), transcript.end(), "|") != transcript.end();
  for (const auto &tok : transcript) {
    if (tok == "|") {
      if (!words.back().empty()) words.emplace_back();
      continue;
    }
    const int idx = hmm.PhoneIndex(tok);
    if (idx < 0) throw Error(Errc::kUnknownPhone, "phone '" + tok + "' is not in the inventory");
    if (!has_separators && !words.back().empty()) words.emplace_back();
    words.back().push_back(idx);
  }
  if (words.back().empty()) words.pop_back();
  if (words.empty()) throw Error(Errc::kEmptyTranscript, "transcript has no phones");

  const int sil = hmm.SilenceIndex();
  if (policy != SilencePolicy::kNone && sil < 0)
    throw Error(Errc::kUnknownPhone, "silence phone '" + hmm.silence_phone + "' is not in the inventory");

  std::vector<Block> blocks;
  if (policy != SilencePolicy::kNone) blocks.push_back({sil, false});
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (w > 0 && policy == SilencePolicy::kBoundaryOptional) blocks.push_back({sil, true});
    for (int p : words[w]) blocks.push_back({p, false});
  }
  if (policy != SilencePolicy::kNone) blocks.push_back({sil, false});

  CompositeHmm graph;
  for (const auto &b : blocks) {
    for (int s = 0; s < kStatesPerPhone; ++s) {
      const int pdf = b.phone * kStatesPerPhone + s;
      graph.nodes.push_back({pdf, b.phone, s, b.optional, std::log(hmm.self_loop[pdf]), {}});
    }
  }
  const int num_blocks = static_cast<int>(blocks.size());
  for (int b = 0; b < num_blocks; ++b) {
    const int base = b * kStatesPerPhone;
    for (int s = 0; s + 1 < kStatesPerPhone; ++s) {
      auto &node = graph.nodes[base + s];
      node.next.push_back({base + s + 1, std::log1p(-hmm.self_loop[node.pdf])});
    }
    auto &last = graph.nodes[base + kStatesPerPhone - 1];
    const double exit = std::log1p(-hmm.self_loop[last.pdf]);
    if (b + 1 == num_blocks) {
      graph.final_log_prob = exit;
      continue;
    }
    std::vector<int> targets{b + 1};
    if (blocks[b + 1].optional && b + 2 < num_blocks) targets.push_back(b + 2);
    const double split = std::log(static_cast<double>(targets.size()));
    for (int t : targets) last.next.push_back({t * kStatesPerPhone, exit - split});
  }
  graph.Finalize();
  return graph;
}

CompositeHmm MakeChainGraph(const std::vector<double> &self_loop, const std::vector<int> &pdfs) {
  if (self_loop.empty() || self_loop.size() != pdfs.size())
    throw Error(Errc::kInvalidArgument, "MakeChainGraph: need one self-loop and pdf per node");
  CompositeHmm graph;
  const int n = static_cast<int>(self_loop.size());
  for (int i = 0; i < n; ++i) {
    GraphNode node{pdfs[i], 0, i % kStatesPerPhone, false, std::log(self_loop[i]), {}};
    if (i + 1 < n) node.next.push_back({i + 1, std::log1p(-self_loop[i])});
    graph.nodes.push_back(std::move(node));
  }
  graph.final_log_prob = std::log1p(-self_loop.back());
  graph.Finalize();
  return graph;
}

}  // namespace tdsv
