// src/config.cc

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

#include "tdsv/config.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tdsv {

namespace {

const std::map<std::string, std::string> &Defaults() {
  static const std::map<std::string, std::string> defaults = {
      {"frontend.kind", "mfcc"},
      {"frontend.num_filters", "40"},
      {"frontend.num_cepstra", "19"},
      {"frontend.include_energy", "true"},
      {"frontend.delta_window", "2"},
      {"frontend.frame_length", "0.025"},
      {"frontend.frame_shift", "0.010"},
      {"frontend.preemphasis", "0.97"},
      {"frontend.low_freq", "0"},
      {"frontend.high_freq", "8000"},
      {"frontend.dither", "0"},
      {"gmm.components", "64"},
      {"gmm.iterations_per_split", "5"},
      {"gmm.final_iterations", "10"},
      {"gmm.var_floor_factor", "0.001"},
      {"gmm.split_perturb", "0.1"},
      {"gmm.relevance", "16"},
      {"hmm.num_mix", "8"},
      {"hmm.num_sil_mix", "16"},
      {"hmm.initial_rounds", "4"},
      {"hmm.rounds_per_split", "4"},
      {"hmm.silence", "optional"},
      {"hmm.silence_phone", "sil"},
      {"hmm.var_floor_factor", "0.001"},
      {"hmm.split_perturb", "0.1"},
      {"hmm.prune", "1e-8"},
      {"hmm.exclude_silence", "true"},
      {"ivector.rank", "20"},
      {"ivector.iterations", "10"},
      {"ivector.enroll", "sum"},
      {"eval.mdcf08", "10 1 0.01"},
      {"eval.mdcf10", "1 1 0.001"},
      {"pipeline.seed", "1"},
      {"pipeline.systems", "gmm-ubm,ivector,gmm-hmm/viterbi,gmm-hmm/fb,ivector-hmm/viterbi,ivector-hmm/fb"},
      {"pipeline.align_stream", "base"},
      {"pipeline.speaker_stream", "base"},
      {"pipeline.workers", "1"},
      {"synth.speakers", "16"},
      {"synth.phrases", "4"},
      {"synth.phones_per_phrase", "5"},
      {"synth.utterances", "8"},
      {"synth.background_speakers", "8"},
      {"synth.num_phones", "6"},
      {"synth.dim", "12"},
      {"synth.speaker_shift", "0.3"},
      {"synth.speaker_state_shift", "0.5"},
      {"synth.noise_scale", "1"},
      {"synth.phone_scale", "1.5"},
      {"synth.min_state_frames", "3"},
      {"synth.max_state_frames", "6"},
      {"synth.min_silence_frames", "3"},
      {"synth.max_silence_frames", "5"},
  };
  return defaults;
}

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void Bad(const std::string &key, const std::string &value, const char *type) {
  throw Error(Errc::kConfigError, "value '" + value + "' of " + key + " is not a valid " + type);
}

DcfParams ParseDcf(const std::string &key, const std::string &value) {
  std::istringstream is(value);
  DcfParams p{};
  std::string extra;
  if (!(is >> p.c_miss >> p.c_fa >> p.p_target) || (is >> extra)) Bad(key, value, "'C_miss C_fa P_target' triple");
  try {
    p.Validate();
  } catch (const Error &e) {
    throw Error(Errc::kConfigError, key + ": " + e.what());
  }
  return p;
}

}  // namespace

Config::Config() : values_(Defaults()) {}

void Config::Set(const std::string &key, const std::string &value) {
  if (!Defaults().count(key)) throw Error(Errc::kConfigError, "unknown configuration key '" + key + "'");
  values_[key] = value;
}

void Config::Set(const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error(Errc::kConfigError, "expected key=value, got '" + assignment + "'");
  Set(Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)));
}

void Config::MergeText(const std::string &text, const std::string &what) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    try {
      Set(line);
    } catch (const Error &e) {
      throw Error(Errc::kConfigError, what + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void Config::MergeFile(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::kConfigError, "cannot open config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  MergeText(ss.str(), path);
}

const std::string &Config::Get(const std::string &key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(Errc::kConfigError, "unknown configuration key '" + key + "'");
  return it->second;
}

int Config::GetInt(const std::string &key) const {
  const std::string &v = Get(key);
  try {
    std::size_t used = 0;
    const long n = std::stol(v, &used);
    if (used != v.size() || n < INT32_MIN || n > INT32_MAX) Bad(key, v, "integer");
    return static_cast<int>(n);
  } catch (const std::logic_error &) {
    Bad(key, v, "integer");
  }
}

std::uint64_t Config::GetU64(const std::string &key) const {
  const std::string &v = Get(key);
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') Bad(key, v, "non-negative integer");
    const unsigned long long n = std::stoull(v, &used);
    if (used != v.size()) Bad(key, v, "non-negative integer");
    return n;
  } catch (const std::logic_error &) {
    Bad(key, v, "non-negative integer");
  }
}

double Config::GetDouble(const std::string &key) const {
  const std::string &v = Get(key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) Bad(key, v, "number");
    return d;
  } catch (const std::logic_error &) {
    Bad(key, v, "number");
  }
}

bool Config::GetBool(const std::string &key) const {
  const std::string &v = Get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  Bad(key, v, "boolean");
}

void Config::WriteHeader(std::ostream &os) const {
  for (const auto &[k, v] : values_) os << "# " << k << " = " << v << '\n';
}

FrontendConfig Config::Frontend() const {
  FrontendConfig c;
  c.num_filters = GetInt("frontend.num_filters");
  c.num_cepstra = GetInt("frontend.num_cepstra");
  c.include_energy = GetBool("frontend.include_energy");
  c.delta_window = GetInt("frontend.delta_window");
  c.frame_length_s = GetDouble("frontend.frame_length");
  c.frame_shift_s = GetDouble("frontend.frame_shift");
  c.preemphasis = GetDouble("frontend.preemphasis");
  c.low_freq = GetDouble("frontend.low_freq");
  c.high_freq = GetDouble("frontend.high_freq");
  c.dither = GetDouble("frontend.dither");
  c.dither_seed = GetU64("pipeline.seed");
  try {
    c.Validate();
  } catch (const Error &e) {
    throw Error(Errc::kConfigError, e.what());
  }
  return c;
}

FeatureKind Config::FrontendKind() const {
  const std::string &k = Get("frontend.kind");
  if (k == "mfcc") return FeatureKind::kMfcc;
  if (k == "fbank") return FeatureKind::kFbank;
  Bad("frontend.kind", k, "feature kind (mfcc or fbank)");
}

SyntheticSpec Config::Synthetic() const {
  SyntheticSpec s;
  s.num_speakers = GetInt("synth.speakers");
  s.num_phrases = GetInt("synth.phrases");
  s.phones_per_phrase = GetInt("synth.phones_per_phrase");
  s.utterances_per_cell = GetInt("synth.utterances");
  s.background_speakers = GetInt("synth.background_speakers");
  s.num_phones = GetInt("synth.num_phones");
  s.dim = GetInt("synth.dim");
  s.speaker_shift = GetDouble("synth.speaker_shift");
  s.speaker_state_shift = GetDouble("synth.speaker_state_shift");
  s.noise_scale = GetDouble("synth.noise_scale");
  s.phone_scale = GetDouble("synth.phone_scale");
  s.min_state_frames = GetInt("synth.min_state_frames");
  s.max_state_frames = GetInt("synth.max_state_frames");
  s.min_silence_frames = GetInt("synth.min_silence_frames");
  s.max_silence_frames = GetInt("synth.max_silence_frames");
  s.seed = GetU64("pipeline.seed");
  return s;
}

ExperimentOptions Config::Experiment() const {
  ExperimentOptions o;
  o.workers = GetInt("pipeline.workers");
  if (o.workers < 1) Bad("pipeline.workers", Get("pipeline.workers"), "positive worker count");
  o.mdcf08 = ParseDcf("eval.mdcf08", Get("eval.mdcf08"));
  o.mdcf10 = ParseDcf("eval.mdcf10", Get("eval.mdcf10"));
  if (const char *dir = std::getenv("TDSV_CACHE_DIR")) o.cache_dir = dir;
  return o;
}

SystemConfig Config::System(const std::string &label) const {
  SystemConfig c;
  const auto slash = label.find('/');
  try {
    c.kind = ParseSystemKind(label.substr(0, slash));
    if (slash != std::string::npos) c.align = ParseAlignAlgo(label.substr(slash + 1));
    c.hmm.silence = ParseSilencePolicy(Get("hmm.silence"));
  } catch (const Error &e) {
    throw Error(Errc::kConfigError, std::string("system '") + label + "': " + e.what());
  }
  c.align_stream = Get("pipeline.align_stream");
  c.speaker_stream = Get("pipeline.speaker_stream");
  c.ubm_components = GetInt("gmm.components");
  c.gmm_em.iterations_per_split = GetInt("gmm.iterations_per_split");
  c.gmm_em.final_iterations = GetInt("gmm.final_iterations");
  c.gmm_em.var_floor_factor = GetDouble("gmm.var_floor_factor");
  c.gmm_em.split_perturb = GetDouble("gmm.split_perturb");
  c.map.relevance = GetDouble("gmm.relevance");
  c.hmm.num_mix = GetInt("hmm.num_mix");
  c.hmm.num_sil_mix = GetInt("hmm.num_sil_mix");
  c.hmm.initial_rounds = GetInt("hmm.initial_rounds");
  c.hmm.rounds_per_split = GetInt("hmm.rounds_per_split");
  c.hmm.silence_phone = Get("hmm.silence_phone");
  c.hmm.var_floor_factor = GetDouble("hmm.var_floor_factor");
  c.hmm.split_perturb = GetDouble("hmm.split_perturb");
  c.prune_threshold = GetDouble("hmm.prune");
  c.exclude_silence = GetBool("hmm.exclude_silence");
  c.ivector_rank = GetInt("ivector.rank");
  c.tmatrix_iterations = GetInt("ivector.iterations");
  const std::string &enroll = Get("ivector.enroll");
  if (enroll == "sum") {
    c.enroll_mode = EnrollMode::kSumStats;
  } else if (enroll == "average") {
    c.enroll_mode = EnrollMode::kAverageIVectors;
  } else {
    Bad("ivector.enroll", enroll, "enrollment mode (sum or average)");
  }
  c.seed = GetU64("pipeline.seed");
  c.Validate();
  return c;
}

std::vector<SystemConfig> Config::Systems() const {
  std::vector<SystemConfig> out;
  std::stringstream ss(Get("pipeline.systems"));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(System(item));
  }
  if (out.empty()) throw Error(Errc::kConfigError, "pipeline.systems lists no system");
  return out;
}

}  // namespace tdsv
