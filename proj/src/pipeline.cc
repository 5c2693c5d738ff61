// src/pipeline.cc

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

#include "tdsv/pipeline.h"

#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include "tdsv/model-io.h"
#include "tdsv/parallel.h"

namespace tdsv {

const char *SystemKindName(SystemKind kind) {
  switch (kind) {
    case SystemKind::kGmmUbm: return "gmm-ubm";
    case SystemKind::kIVector: return "ivector";
    case SystemKind::kGmmHmm: return "gmm-hmm";
    case SystemKind::kIVectorHmm: return "ivector-hmm";
  }
  return "?";
}

SystemKind ParseSystemKind(std::string_view name) {
  for (SystemKind k : {SystemKind::kGmmUbm, SystemKind::kIVector, SystemKind::kGmmHmm, SystemKind::kIVectorHmm})
    if (name == SystemKindName(k)) return k;
  throw Error(Errc::kConfigError, "unknown system kind '" + std::string(name) + "'");
}

void SystemConfig::Validate() const {
  auto fail = [](const std::string &msg) { throw Error(Errc::kConfigError, msg); };
  if (IsHmmSystem(kind) && !align) fail(std::string(SystemKindName(kind)) + " needs an alignment algorithm");
  if (!IsHmmSystem(kind) && align)
    fail(std::string("alignment algorithm '") + AlignAlgoName(*align) + "' given for " + SystemKindName(kind) +
         ", which does not align");
  if (ubm_components < 1) fail("ubm components must be >= 1");
  if (hmm.num_mix < 1 || hmm.num_sil_mix < 1) fail("hmm mixture counts must be >= 1");
  if (ivector_rank < 1) fail("ivector rank must be >= 1");
  if (tmatrix_iterations < 0) fail("tmatrix iterations must be >= 0");
  if (map.relevance < 0) fail("relevance factor must be >= 0");
  if (prune_threshold < 0 || prune_threshold >= 1) fail("prune threshold must be in [0, 1)");
}

std::string SystemConfig::Label() const {
  std::string label = SystemKindName(kind);
  if (align) label += std::string("/") + AlignAlgoName(*align);
  return label;
}

std::string SystemConfig::Describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "kind = " << SystemKindName(kind) << '\n'
     << "align = " << (align ? AlignAlgoName(*align) : "none") << '\n'
     << "align_stream = " << align_stream << '\n'
     << "speaker_stream = " << speaker_stream << '\n'
     << "ubm_components = " << ubm_components << '\n'
     << "gmm.iterations_per_split = " << gmm_em.iterations_per_split << '\n'
     << "gmm.final_iterations = " << gmm_em.final_iterations << '\n'
     << "gmm.var_floor_factor = " << gmm_em.var_floor_factor << '\n'
     << "gmm.split_perturb = " << gmm_em.split_perturb << '\n'
     << "hmm.num_mix = " << hmm.num_mix << '\n'
     << "hmm.num_sil_mix = " << hmm.num_sil_mix << '\n'
     << "hmm.initial_rounds = " << hmm.initial_rounds << '\n'
     << "hmm.rounds_per_split = " << hmm.rounds_per_split << '\n'
     << "hmm.silence = " << SilencePolicyName(hmm.silence) << '\n'
     << "hmm.silence_phone = " << hmm.silence_phone << '\n'
     << "hmm.var_floor_factor = " << hmm.var_floor_factor << '\n'
     << "hmm.split_perturb = " << hmm.split_perturb << '\n'
     << "ivector.rank = " << ivector_rank << '\n'
     << "ivector.iterations = " << tmatrix_iterations << '\n'
     << "ivector.enroll = " << (enroll_mode == EnrollMode::kSumStats ? "sum" : "average") << '\n'
     << "map.relevance = " << map.relevance << '\n'
     << "exclude_silence = " << exclude_silence << '\n'
     << "prune_threshold = " << prune_threshold << '\n'
     << "seed = " << seed << '\n';
  return os.str();
}

std::uint64_t SystemConfig::Hash() const {
  Hasher h;
  h.Add(Describe());
  return h.value();
}

void ExperimentReport::WriteTable(std::ostream &os) const {
  os << "# corpus " << corpus_hash << '\n';
  std::vector<MetricRow> rows;
  for (const auto &s : systems) {
    os << "# " << s.label << " config " << s.config_hash << " seed " << s.seed << '\n';
    rows.insert(rows.end(), s.metrics.begin(), s.metrics.end());
  }
  WriteMetricTable(os, rows);
}

void ExperimentReport::WriteKeyValues(std::ostream &os) const {
  os << "corpus_hash = " << corpus_hash << '\n';
  for (const auto &s : systems) {
    os << s.label << ".config_hash = " << s.config_hash << '\n';
    os << s.label << ".seed = " << s.seed << '\n';
    WriteMetricKeyValues(os, s.metrics);
  }
}

double IVectorTrialScore(const Vector &model, const Vector &test) {
  if (model.squaredNorm() == 0.0 || test.squaredNorm() == 0.0) return 0.0;
  return CosineScore(model, test);
}

namespace {

const Matrix &Frames(const Utterance &u, const std::string &stream) { return u.Stream(stream).frames; }

template <typename Fn>
auto InStage(const std::string &stage, Fn &&fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error &e) {
    throw Error(e.code(), "stage " + stage + ": " + e.what());
  }
}

}  // namespace

Experiment::Experiment(const Corpus &corpus, ExperimentOptions opts) : corpus_(corpus), opts_(std::move(opts)) {
  corpus_hash_ = HexDigest(corpus.ContentHash());
  for (const auto &u : corpus.utterances) by_id_[u.utt_id] = &u;
  background_ = corpus.BackgroundUtterances();
  if (background_.empty()) {
    std::set<std::string> seen;
    for (const auto &[model, utts] : corpus.enrollment)
      for (const auto &id : utts)
        if (by_id_.count(id) && seen.insert(id).second) background_.push_back(by_id_.at(id));
    if (!background_.empty())
      Warn("corpus has no background utterances; training background models on enrollment data");
  }
  for (const auto &[model, utts] : corpus.enrollment) {
    if (utts.empty() || !by_id_.count(utts.front())) continue;
    const Utterance *first = by_id_.at(utts.front());
    auto it = corpus.phrase_transcripts.find(first->phrase_id);
    model_transcripts_[model] = it != corpus.phrase_transcripts.end() ? it->second : first->transcript;
  }
}

const Utterance &Experiment::Utt(const std::string &utt_id) const {
  auto it = by_id_.find(utt_id);
  if (it == by_id_.end()) throw Error(Errc::kMissingUtterance, utt_id);
  return *it->second;
}

const std::vector<std::string> &Experiment::ModelTranscript(const std::string &model_id) const {
  auto it = model_transcripts_.find(model_id);
  if (it == model_transcripts_.end()) throw Error(Errc::kMissingModel, model_id);
  if (it->second.empty()) throw Error(Errc::kEmptyTranscript, "model " + model_id + " has no phrase transcript");
  return it->second;
}

std::string Experiment::StageKey(const std::string &stage, const std::string &fields) const {
  Hasher h;
  h.Add(corpus_hash_);
  h.Add(stage);
  h.Add(fields);
  return stage + "-" + HexDigest(h.value());
}

template <typename T, typename Fn>
const T &Experiment::Cached(std::map<std::string, std::unique_ptr<T>> *memo, const std::string &key, Fn &&compute) {
  auto it = memo->find(key);
  if (it != memo->end()) return *it->second;
  std::filesystem::path path;
  if (!opts_.cache_dir.empty()) {
    path = std::filesystem::path(opts_.cache_dir) / (key + ".tdsm");
    if (std::filesystem::exists(path)) {
      T value = LoadModelAs<T>(path.string());
      return *memo->emplace(key, std::make_unique<T>(std::move(value))).first->second;
    }
  }
  T value = compute();
  ++stages_computed_;
  if (!path.empty()) {
    std::filesystem::create_directories(path.parent_path());
    // Publish atomically so a concurrent reader never sees a partial file.
    const std::string tmp = path.string() + ".tmp";
    SaveModel(tmp, Model(value));
    std::filesystem::rename(tmp, path);
  }
  return *memo->emplace(key, std::make_unique<T>(std::move(value))).first->second;
}

namespace {

std::string UbmFields(const SystemConfig &c) {
  std::ostringstream os;
  os.precision(17);
  os << c.speaker_stream << ' ' << c.ubm_components << ' ' << c.gmm_em.iterations_per_split << ' '
     << c.gmm_em.final_iterations << ' ' << c.gmm_em.var_floor_factor << ' ' << c.gmm_em.split_perturb;
  return os.str();
}

std::string HmmFields(const SystemConfig &c) {
  std::ostringstream os;
  os.precision(17);
  os << c.align_stream << ' ' << c.hmm.num_mix << ' ' << c.hmm.num_sil_mix << ' ' << c.hmm.initial_rounds << ' '
     << c.hmm.rounds_per_split << ' ' << SilencePolicyName(c.hmm.silence) << ' ' << c.hmm.silence_phone << ' '
     << c.hmm.var_floor_factor << ' ' << c.hmm.split_perturb;
  return os.str();
}

std::string AlignFields(const SystemConfig &c) {
  std::ostringstream os;
  os.precision(17);
  os << HmmFields(c) << " | " << AlignAlgoName(c.align.value_or(AlignAlgo::kViterbi)) << ' ' << c.prune_threshold;
  return os.str();
}

std::string StateFields(const SystemConfig &c) {
  std::ostringstream os;
  os.precision(17);
  os << AlignFields(c) << " | " << c.speaker_stream << ' ' << c.hmm.var_floor_factor;
  return os.str();
}

}  // namespace

const Gmm &Experiment::Ubm(const SystemConfig &config) {
  return Cached(&ubms_, StageKey("ubm", UbmFields(config)), [&] {
    return InStage("train-ubm", [&] {
      Eigen::Index total = 0;
      for (const Utterance *u : background_) total += Frames(*u, config.speaker_stream).rows();
      if (background_.empty()) throw Error(Errc::kInsufficientData, "no background utterances");
      Matrix pooled(total, Frames(*background_.front(), config.speaker_stream).cols());
      Eigen::Index row = 0;
      for (const Utterance *u : background_) {
        const Matrix &f = Frames(*u, config.speaker_stream);
        pooled.middleRows(row, f.rows()) = f;
        row += f.rows();
      }
      return TrainGmmEm(pooled, config.ubm_components, config.gmm_em).gmm;
    });
  });
}

const PhoneHmmSet &Experiment::Hmm(const SystemConfig &config) {
  return Cached(&hmms_, StageKey("hmm", HmmFields(config)), [&] {
    return InStage("train-hmm", [&] {
      std::vector<HmmTrainingUtterance> train;
      for (const Utterance *u : background_) {
        const std::vector<std::string> *transcript = &u->transcript;
        if (transcript->empty()) {
          auto it = corpus_.phrase_transcripts.find(u->phrase_id);
          if (it != corpus_.phrase_transcripts.end()) transcript = &it->second;
        }
        train.push_back({transcript, &Frames(*u, config.align_stream)});
      }
      return TrainMonophoneHmms(train, corpus_.phones, config.hmm).hmm;
    });
  });
}

const Alignment &Experiment::AlignmentFor(const SystemConfig &config, const Utterance &utt,
                                          const std::vector<std::string> &transcript) {
  const PhoneHmmSet &hmm = Hmm(config);
  std::string fields = AlignFields(config) + " | " + utt.utt_id;
  for (const auto &p : transcript) fields += ' ' + p;
  const std::string key = StageKey("align", fields);
  {
    std::lock_guard<std::mutex> lock(alignment_mutex_);
    auto it = alignments_.find(key);
    if (it != alignments_.end()) return *it->second;
  }
  auto ali = InStage("align " + utt.utt_id, [&] {
    const CompositeHmm graph = BuildCompositeGraph(hmm, transcript, config.hmm.silence);
    return std::make_unique<Alignment>(Align(config.align.value_or(AlignAlgo::kViterbi), graph, hmm.pdfs,
                                             Frames(utt, config.align_stream), AlignOptions{config.prune_threshold}));
  });
  std::lock_guard<std::mutex> lock(alignment_mutex_);
  return *alignments_.emplace(key, std::move(ali)).first->second;
}

const StateModels &Experiment::BackgroundStateModels(const SystemConfig &config) {
  const PhoneHmmSet &hmm = Hmm(config);
  const std::string key = StageKey("states", StateFields(config));
  if (state_models_.count(key)) return *state_models_.at(key);
  // Alignments are computed up front so the cache lookup below stays single
  // threaded.
  std::vector<const Alignment *> alis(background_.size());
  ParallelFor(static_cast<int>(background_.size()), opts_.workers, [&](int i) {
    const Utterance &u = *background_[i];
    const auto &transcript = u.transcript.empty() ? corpus_.phrase_transcripts.at(u.phrase_id) : u.transcript;
    alis[i] = &AlignmentFor(config, u, transcript);
  });
  return Cached(&state_models_, key, [&] {
    return InStage("reestimate-states", [&] {
      std::vector<Alignment> copies;
      std::vector<const Matrix *> feats;
      for (std::size_t i = 0; i < background_.size(); ++i) {
        copies.push_back(*alis[i]);
        feats.push_back(&Frames(*background_[i], config.speaker_stream));
      }
      StateReestimateOptions opts;
      opts.var_floor_factor = config.hmm.var_floor_factor;
      return ReestimateStateGmms(hmm, copies, feats, opts);
    });
  });
}

const TotalVariability &Experiment::TMatrix(const SystemConfig &config) {
  std::ostringstream fields;
  fields << config.ivector_rank << ' ' << config.tmatrix_iterations << ' ' << config.seed << " | ";
  if (config.kind == SystemKind::kIVector) {
    fields << UbmFields(config);
  } else {
    fields << StateFields(config) << ' ' << config.exclude_silence;
  }
  const std::string key = StageKey("tmatrix", fields.str());
  if (tmatrices_.count(key)) return *tmatrices_.at(key);

  std::vector<SuffStats> stats(background_.size());
  Matrix means, vars;
  if (config.kind == SystemKind::kIVector) {
    const Gmm &ubm = Ubm(config);
    means = ubm.means();
    vars = ubm.vars();
    ParallelFor(static_cast<int>(background_.size()), opts_.workers, [&](int i) {
      stats[i] = AccumulateStats(ubm, Frames(*background_[i], config.speaker_stream));
    });
  } else {
    const StateModels &bg = BackgroundStateModels(config);
    means = bg.StackedMeans();
    vars = bg.StackedVars();
    ParallelFor(static_cast<int>(background_.size()), opts_.workers, [&](int i) {
      const Utterance &u = *background_[i];
      const auto &transcript = u.transcript.empty() ? corpus_.phrase_transcripts.at(u.phrase_id) : u.transcript;
      stats[i] = AccumulateHmmStats(AlignmentFor(config, u, transcript), Frames(u, config.speaker_stream), bg,
                                    config.exclude_silence);
    });
  }
  return Cached(&tmatrices_, key, [&] {
    return InStage("train-tmatrix", [&] {
      TMatrixOptions topts;
      topts.rank = config.ivector_rank;
      topts.iterations = config.tmatrix_iterations;
      topts.seed = config.seed;
      topts.workers = opts_.workers;
      return TrainTMatrix(stats, means, vars, topts).tv;
    });
  });
}

EnrolledModels Experiment::Enroll(const SystemConfig &config) {
  config.Validate();
  EnrolledModels out;
  out.kind = config.kind;
  std::vector<std::string> model_list;
  for (const auto &[m, list] : corpus_.enrollment)
    if (!list.empty()) model_list.push_back(m);
  auto enroll_utts = [&](const std::string &model) {
    std::vector<const Utterance *> utts;
    for (const auto &id : corpus_.enrollment.at(model)) utts.push_back(&Utt(id));
    return utts;
  };
  const int n = static_cast<int>(model_list.size());

  switch (config.kind) {
    case SystemKind::kGmmUbm: {
      const Gmm &ubm = Ubm(config);
      std::vector<Gmm> adapted(n);
      InStage("enroll", [&] {
        ParallelFor(n, opts_.workers, [&](int i) {
          GmmStats stats(ubm.NumComponents(), ubm.Dim());
          for (const Utterance *u : enroll_utts(model_list[i]))
            stats += AccumulateStats(ubm, Frames(*u, config.speaker_stream));
          adapted[i] = MapAdapt(ubm, stats, config.map);
        });
      });
      for (int i = 0; i < n; ++i) out.gmms.emplace(model_list[i], std::move(adapted[i]));
      break;
    }
    case SystemKind::kIVector: {
      const Gmm &ubm = Ubm(config);
      const TotalVariability &tv = TMatrix(config);
      std::vector<Vector> ws(n);
      InStage("enroll", [&] {
        ParallelFor(n, opts_.workers, [&](int i) {
          std::vector<SuffStats> stats;
          for (const Utterance *u : enroll_utts(model_list[i]))
            stats.push_back(AccumulateStats(ubm, Frames(*u, config.speaker_stream)));
          ws[i] = EnrollIVector(tv, stats, config.enroll_mode).w;
        });
      });
      for (int i = 0; i < n; ++i) out.ivectors.emplace(model_list[i], std::move(ws[i]));
      break;
    }
    case SystemKind::kGmmHmm:
    case SystemKind::kIVectorHmm: {
      const StateModels &bg = BackgroundStateModels(config);
      const TotalVariability *tv = config.kind == SystemKind::kIVectorHmm ? &TMatrix(config) : nullptr;
      std::vector<std::vector<HmmStats>> per_utt(n);
      InStage("enroll", [&] {
        ParallelFor(n, opts_.workers, [&](int i) {
          const auto &transcript = ModelTranscript(model_list[i]);
          for (const Utterance *u : enroll_utts(model_list[i]))
            per_utt[i].push_back(AccumulateHmmStats(AlignmentFor(config, *u, transcript),
                                                    Frames(*u, config.speaker_stream), bg, config.exclude_silence));
        });
        for (int i = 0; i < n; ++i) {
          if (tv != nullptr) {
            out.ivectors.emplace(model_list[i], EnrollIVector(*tv, per_utt[i], config.enroll_mode).w);
          } else {
            HmmStats total(bg.NumSlots(), bg.Dim());
            for (const auto &st : per_utt[i]) total += st;
            out.states.emplace(model_list[i], HmmMapAdapt(bg, total, config.map));
          }
        }
      });
      break;
    }
  }
  return out;
}

SystemReport Experiment::RunSystem(const SystemConfig &config) {
  config.Validate();
  SystemReport report;
  report.label = config.Label();
  report.config_hash = HexDigest(config.Hash());
  report.seed = config.seed;

  std::set<std::string> models, utts;
  for (const auto &[m, list] : corpus_.enrollment)
    if (!list.empty()) models.insert(m);
  for (const auto &[id, u] : by_id_) utts.insert(id);
  // Test-side work is done up front for the trials that resolve; the rest
  // are reported by RunProtocol.
  std::vector<std::pair<std::string, std::string>> pairs;  // (utt, model)
  {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto &t : corpus_.trials)
      if (models.count(t.model_id) && utts.count(t.test_utt_id) && seen.insert({t.test_utt_id, t.model_id}).second)
        pairs.emplace_back(t.test_utt_id, t.model_id);
  }
  const int workers = opts_.workers;
  const EnrolledModels enrolled = Enroll(config);

  TrialScorer scorer;
  std::map<std::string, Vector> test_ivectors;  // keyed by "utt model"
  switch (config.kind) {
    case SystemKind::kGmmUbm: {
      const Gmm &ubm = Ubm(config);
      scorer = [&](const Trial &t) {
        return ScoreGmmUbm(enrolled.gmms.at(t.model_id), ubm, Frames(Utt(t.test_utt_id), config.speaker_stream));
      };
      break;
    }
    case SystemKind::kIVector: {
      const Gmm &ubm = Ubm(config);
      const TotalVariability &tv = TMatrix(config);
      std::vector<std::string> tests;
      for (const auto &p : pairs) tests.push_back(p.first);
      std::sort(tests.begin(), tests.end());
      tests.erase(std::unique(tests.begin(), tests.end()), tests.end());
      std::vector<Vector> tw(tests.size());
      InStage("extract", [&] {
        ParallelFor(static_cast<int>(tests.size()), workers, [&](int i) {
          tw[i] = ExtractIVector(tv, AccumulateStats(ubm, Frames(Utt(tests[i]), config.speaker_stream))).w;
        });
      });
      for (std::size_t i = 0; i < tests.size(); ++i) test_ivectors.emplace(tests[i], std::move(tw[i]));
      scorer = [&](const Trial &t) {
        return IVectorTrialScore(enrolled.ivectors.at(t.model_id), test_ivectors.at(t.test_utt_id));
      };
      break;
    }
    case SystemKind::kGmmHmm:
    case SystemKind::kIVectorHmm: {
      const StateModels &bg = BackgroundStateModels(config);
      std::vector<const Alignment *> alis(pairs.size());
      InStage("align-tests", [&] {
        ParallelFor(static_cast<int>(pairs.size()), workers, [&](int i) {
          alis[i] = &AlignmentFor(config, Utt(pairs[i].first), ModelTranscript(pairs[i].second));
        });
      });
      if (config.kind == SystemKind::kIVectorHmm) {
        const TotalVariability &tv = TMatrix(config);
        std::vector<Vector> tw(pairs.size());
        InStage("extract", [&] {
          ParallelFor(static_cast<int>(pairs.size()), workers, [&](int i) {
            tw[i] = ExtractIVector(tv, AccumulateHmmStats(*alis[i], Frames(Utt(pairs[i].first), config.speaker_stream),
                                                          bg, config.exclude_silence))
                        .w;
          });
        });
        for (std::size_t i = 0; i < pairs.size(); ++i)
          test_ivectors.emplace(pairs[i].first + " " + pairs[i].second, std::move(tw[i]));
        scorer = [&](const Trial &t) {
          return IVectorTrialScore(enrolled.ivectors.at(t.model_id), test_ivectors.at(t.test_utt_id + " " + t.model_id));
        };
      } else {
        scorer = [&](const Trial &t) {
          const Utterance &u = Utt(t.test_utt_id);
          return ScoreHmm(enrolled.states.at(t.model_id), bg, AlignmentFor(config, u, ModelTranscript(t.model_id)),
                          Frames(u, config.speaker_stream), config.exclude_silence);
        };
      }
      break;
    }
  }

  report.scores = InStage("score", [&] { return RunProtocol(corpus_.trials, scorer, models, utts, workers); });
  report.metrics = EvaluateScores(report.label, report.scores, opts_.mdcf08, opts_.mdcf10);
  return report;
}

ExperimentReport Experiment::CompareSystems(const std::vector<SystemConfig> &configs) {
  if (configs.empty()) throw Error(Errc::kConfigError, "no systems configured");
  ExperimentReport report;
  report.corpus_hash = corpus_hash_;
  for (const auto &c : configs) report.systems.push_back(RunSystem(c));
  return report;
}

}  // namespace tdsv
