// tdsv/config.h

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

#ifndef TDSV_CONFIG_H_
#define TDSV_CONFIG_H_

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "tdsv/features.h"
#include "tdsv/pipeline.h"
#include "tdsv/synthetic-corpus.h"

namespace tdsv {

/// Layered key-value configuration.  Every key has a built-in default; a
/// config file and then command-line overrides replace values.  Keys are
/// namespaced (frontend.*, gmm.*, hmm.*, ivector.*, eval.*, pipeline.*,
/// synth.*) and unknown keys are rejected with Errc::kConfigError.
class Config {
 public:
  Config();

  /// `key = value` lines; `#` starts a comment.
  void MergeText(const std::string &text, const std::string &what);
  void MergeFile(const std::string &path);
  /// "key=value".
  void Set(const std::string &assignment);
  void Set(const std::string &key, const std::string &value);

  const std::string &Get(const std::string &key) const;
  int GetInt(const std::string &key) const;
  double GetDouble(const std::string &key) const;
  bool GetBool(const std::string &key) const;
  std::uint64_t GetU64(const std::string &key) const;

  /// Every effective value, one `# key = value` line each, sorted by key.
  void WriteHeader(std::ostream &os) const;

  FrontendConfig Frontend() const;
  FeatureKind FrontendKind() const;
  SyntheticSpec Synthetic() const;
  ExperimentOptions Experiment() const;
  /// Base system configuration for a label such as "gmm-ubm" or
  /// "ivector-hmm/fb".
  SystemConfig System(const std::string &label) const;
  /// pipeline.systems, comma separated.
  std::vector<SystemConfig> Systems() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace tdsv

#endif  // TDSV_CONFIG_H_
