// src/eval.cc

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

#include "tdsv/eval.h"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "tdsv/parallel.h"

namespace tdsv {

void DcfParams::Validate() const {
  if (!(c_miss > 0) || !(c_fa > 0) || !(p_target > 0 && p_target < 1))
    throw Error(Errc::kInvalidArgument, "DCF costs must be positive and P_target in (0,1)");
}

ScoreSet RunProtocol(const std::vector<Trial> &trials, const TrialScorer &scorer,
                     const std::set<std::string> &models, const std::set<std::string> &utterances,
                     int workers) {
  std::set<std::string> missing_models, missing_utts;
  for (const auto &t : trials) {
    if (!models.count(t.model_id)) missing_models.insert(t.model_id);
    if (!utterances.count(t.test_utt_id)) missing_utts.insert(t.test_utt_id);
  }
  if (!missing_models.empty() || !missing_utts.empty()) {
    std::ostringstream msg;
    if (!missing_models.empty()) {
      msg << "unknown models:";
      for (const auto &m : missing_models) msg << ' ' << m;
    }
    if (!missing_utts.empty()) {
      if (!missing_models.empty()) msg << "; ";
      msg << "unknown utterances:";
      for (const auto &u : missing_utts) msg << ' ' << u;
    }
    throw Error(missing_models.empty() ? Errc::kMissingUtterance : Errc::kMissingModel, msg.str());
  }
  ScoreSet out(trials.size());
  ParallelFor(static_cast<int>(trials.size()), workers, [&](int i) {
    const Trial &t = trials[i];
    out[i] = ScoreRecord{t.model_id, t.test_utt_id, t.type, scorer(t), t.is_target};
  });
  return out;
}

std::vector<OperatingPoint> SweepThresholds(std::vector<double> targets, std::vector<double> nontargets) {
  if (targets.empty() || nontargets.empty())
    throw Error(Errc::kEmptyClass, "need at least one target and one non-target score");
  std::sort(targets.begin(), targets.end());
  std::sort(nontargets.begin(), nontargets.end());
  std::vector<double> thresholds;
  std::merge(targets.begin(), targets.end(), nontargets.begin(), nontargets.end(),
             std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const double nt = static_cast<double>(targets.size()), nn = static_cast<double>(nontargets.size());
  std::vector<OperatingPoint> points;
  points.reserve(thresholds.size() + 1);
  std::size_t below_t = 0, below_n = 0;
  for (double th : thresholds) {
    while (below_t < targets.size() && targets[below_t] < th) ++below_t;
    while (below_n < nontargets.size() && nontargets[below_n] < th) ++below_n;
    points.push_back({th, below_t / nt, (nn - below_n) / nn});
  }
  points.push_back({std::numeric_limits<double>::infinity(), 1.0, 0.0});
  return points;
}

double ComputeEer(const std::vector<double> &targets, const std::vector<double> &nontargets) {
  const auto points = SweepThresholds(targets, nontargets);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double d = points[k].p_miss - points[k].p_fa;
    if (d < 0) continue;
    if (d == 0 || k == 0) return points[k].p_miss;
    const double d_prev = points[k - 1].p_miss - points[k - 1].p_fa;
    const double lambda = d_prev / (d_prev - d);
    return points[k - 1].p_miss + lambda * (points[k].p_miss - points[k - 1].p_miss);
  }
  return 0.5;  // not reached: the last point always has p_miss = 1, p_fa = 0
}

double ComputeMinDcf(const std::vector<double> &targets, const std::vector<double> &nontargets,
                     const DcfParams &params) {
  params.Validate();
  const auto points = SweepThresholds(targets, nontargets);
  const double norm = std::min(params.c_miss * params.p_target, params.c_fa * (1.0 - params.p_target));
  double best = std::numeric_limits<double>::infinity();
  for (const auto &p : points) {
    const double cost =
        params.c_miss * p.p_miss * params.p_target + params.c_fa * p.p_fa * (1.0 - params.p_target);
    best = std::min(best, cost / norm);
  }
  return best;
}

void SplitScores(const ScoreSet &scores, const std::set<TrialType> &types,
                 std::vector<double> *targets, std::vector<double> *nontargets) {
  targets->clear();
  nontargets->clear();
  for (const auto &r : scores) {
    if (!types.count(r.type)) continue;
    if (!std::isfinite(r.score))
      throw Error(Errc::kInvalidArgument, "non-finite score for " + r.model_id + " " + r.utt_id);
    (r.is_target ? targets : nontargets)->push_back(r.score);
  }
}

double ComputeEer(const ScoreSet &scores, const std::set<TrialType> &types) {
  std::vector<double> tar, non;
  SplitScores(scores, types, &tar, &non);
  return ComputeEer(tar, non);
}

double ComputeMinDcf(const ScoreSet &scores, const DcfParams &params, const std::set<TrialType> &types) {
  std::vector<double> tar, non;
  SplitScores(scores, types, &tar, &non);
  return ComputeMinDcf(tar, non, params);
}

std::vector<MetricRow> EvaluateScores(const std::string &system, const ScoreSet &scores,
                                      const DcfParams &mdcf08, const DcfParams &mdcf10) {
  std::vector<MetricRow> rows;
  for (TrialType type : {TrialType::kIC, TrialType::kTW, TrialType::kIW}) {
    const bool present = std::any_of(scores.begin(), scores.end(),
                                     [type](const ScoreRecord &r) { return r.type == type; });
    if (!present) continue;
    std::vector<double> tar, non;
    SplitScores(scores, {TrialType::kTC, type}, &tar, &non);
    MetricRow row;
    row.system = system;
    row.nontarget_type = type;
    row.eer = ComputeEer(tar, non);
    row.mdcf08 = ComputeMinDcf(tar, non, mdcf08);
    row.mdcf10 = ComputeMinDcf(tar, non, mdcf10);
    row.num_target = static_cast<int>(tar.size());
    row.num_nontarget = static_cast<int>(non.size());
    rows.push_back(row);
  }
  return rows;
}

void WriteScores(std::ostream &os, const ScoreSet &scores) {
  char buf[64];
  for (const auto &r : scores) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.score);
    os << r.model_id << ' ' << r.utt_id << ' ' << TrialTypeName(r.type) << ' ' << buf << ' '
       << (r.is_target ? "target" : "nontarget") << '\n';
  }
}

ScoreSet ReadScores(std::istream &is, const std::string &what) {
  ScoreSet out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string model, utt, type, score, label, extra;
    if (!(ls >> model)) continue;
    const std::string where = what + ":" + std::to_string(lineno);
    if (!(ls >> utt >> type >> score >> label) || (ls >> extra))
      throw Error(Errc::kParseError, where + ": expected 'model utt type score label'");
    ScoreRecord r;
    r.model_id = model;
    r.utt_id = utt;
    try {
      r.type = ParseTrialType(type);
      std::size_t used = 0;
      r.score = std::stod(score, &used);
      if (used != score.size()) throw std::invalid_argument(score);
    } catch (const std::exception &e) {
      throw Error(Errc::kParseError, where + ": " + e.what());
    }
    if (label != "target" && label != "nontarget")
      throw Error(Errc::kParseError, where + ": label must be target or nontarget");
    r.is_target = label == "target";
    out.push_back(r);
  }
  return out;
}

void WriteMetricTable(std::ostream &os, const std::vector<MetricRow> &rows) {
  std::size_t width = 6;
  for (const auto &r : rows) width = std::max(width, r.system.size());
  os << std::left << std::setw(static_cast<int>(width)) << "system"
     << "  type   EER(%)   MDCF08   MDCF10   #tar   #non\n";
  for (const auto &r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "  %-4s %7.2f  %7.4f  %7.4f %6d %6d", TrialTypeName(r.nontarget_type),
                  100.0 * r.eer, r.mdcf08, r.mdcf10, r.num_target, r.num_nontarget);
    os << std::left << std::setw(static_cast<int>(width)) << r.system << buf << '\n';
  }
}

void WriteMetricKeyValues(std::ostream &os, const std::vector<MetricRow> &rows) {
  char buf[64];
  for (const auto &r : rows) {
    const std::string prefix = r.system + "." + TrialTypeName(r.nontarget_type) + ".";
    std::snprintf(buf, sizeof(buf), "%.10g", r.eer);
    os << prefix << "eer = " << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.10g", r.mdcf08);
    os << prefix << "mdcf08 = " << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.10g", r.mdcf10);
    os << prefix << "mdcf10 = " << buf << '\n';
  }
}

}  // namespace tdsv
