// tdsv/eval.h

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

#ifndef TDSV_EVAL_H_
#define TDSV_EVAL_H_

#include <functional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "tdsv/corpus.h"

namespace tdsv {

/// Higher scores are more target-like for every scorer in the library.
struct ScoreRecord {
  std::string model_id;
  std::string utt_id;
  TrialType type = TrialType::kTC;
  double score = 0.0;
  bool is_target = true;
};

using ScoreSet = std::vector<ScoreRecord>;

struct DcfParams {
  double c_miss;
  double c_fa;
  double p_target;

  void Validate() const;
};

inline constexpr DcfParams kMdcf08{10.0, 1.0, 0.01};
inline constexpr DcfParams kMdcf10{1.0, 1.0, 0.001};

using TrialScorer = std::function<double(const Trial &)>;

/// Scores every trial in input order.  All unresolvable model and utterance
/// ids are collected first; the error is kMissingModel when any model is
/// missing, otherwise kMissingUtterance, and its message lists every miss.
ScoreSet RunProtocol(const std::vector<Trial> &trials, const TrialScorer &scorer,
                     const std::set<std::string> &models, const std::set<std::string> &utterances,
                     int workers = 1);

/// Operating points of the threshold sweep: one per distinct score (accept
/// when score >= threshold) plus a final reject-everything point.
struct OperatingPoint {
  double threshold;
  double p_miss;
  double p_fa;
};
std::vector<OperatingPoint> SweepThresholds(std::vector<double> targets, std::vector<double> nontargets);

/// Miss and false-alarm rates are joined linearly between adjacent operating
/// points; the EER is where the two lines cross.  Throws kEmptyClass.
double ComputeEer(const std::vector<double> &targets, const std::vector<double> &nontargets);
/// Normalized minimum detection cost.  Throws kEmptyClass.
double ComputeMinDcf(const std::vector<double> &targets, const std::vector<double> &nontargets,
                     const DcfParams &params);

/// Splits a score set into target and non-target scores, keeping records
/// whose type is in `types`.
void SplitScores(const ScoreSet &scores, const std::set<TrialType> &types,
                 std::vector<double> *targets, std::vector<double> *nontargets);

double ComputeEer(const ScoreSet &scores, const std::set<TrialType> &types);
double ComputeMinDcf(const ScoreSet &scores, const DcfParams &params, const std::set<TrialType> &types);

struct MetricRow {
  std::string system;
  TrialType nontarget_type = TrialType::kIC;
  double eer = 0.0;
  double mdcf08 = 0.0;
  double mdcf10 = 0.0;
  int num_target = 0;
  int num_nontarget = 0;
};

/// One row per non-target type present in the scores (TC targets against
/// that type).
std::vector<MetricRow> EvaluateScores(const std::string &system, const ScoreSet &scores,
                                      const DcfParams &mdcf08 = kMdcf08, const DcfParams &mdcf10 = kMdcf10);

/// `model_id utt_id type score label`, label being target or nontarget.
void WriteScores(std::ostream &os, const ScoreSet &scores);
ScoreSet ReadScores(std::istream &is, const std::string &what);

/// Human-readable table; EER in percent, minDCF as is.
void WriteMetricTable(std::ostream &os, const std::vector<MetricRow> &rows);
/// `<system>.<type>.eer = value` lines, fractions.
void WriteMetricKeyValues(std::ostream &os, const std::vector<MetricRow> &rows);

}  // namespace tdsv

#endif  // TDSV_EVAL_H_
