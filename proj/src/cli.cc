// src/cli.cc

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

#include "tdsv/cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "tdsv/config.h"
#include "tdsv/feature-io.h"
#include "tdsv/model-io.h"
#include "tdsv/wave-io.h"

namespace tdsv {

namespace {

struct Options {
  std::string config_file;
  std::vector<std::string> sets;
  int workers = 0;

  std::string corpus_dir;
  std::string out;
  std::string system;
  std::string algo = "viterbi";
  std::string utt;
  std::string phrase;
  std::string wav;
  std::string wav_list;
  std::string scores;
  std::string kv_out;
  std::string trials;

  // synth-corpus
  std::uint64_t seed = 0;
  int speakers = 0, phrases = 0, phones_per_phrase = 0, utterances = 0, background = -1;
};

std::ofstream OpenOut(const std::string &path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::kIo, "cannot open " + path + " for writing");
  return os;
}

Config BuildConfig(const Options &o, std::ostream &err) {
  Config config;
  if (!o.config_file.empty()) config.MergeFile(o.config_file);
  for (const auto &s : o.sets) config.Set(s);
  if (o.workers > 0) config.Set("pipeline.workers", std::to_string(o.workers));
  config.WriteHeader(err);
  return config;
}

Corpus RequireCorpus(const Options &o) {
  if (o.corpus_dir.empty()) throw Error(Errc::kConfigError, "--corpus is required");
  return LoadCorpusDir(o.corpus_dir);
}

int ExtractFeaturesCmd(const Options &o, const Config &config, std::ostream &out) {
  const FrontendConfig fe = config.Frontend();
  const FeatureKind kind = config.FrontendKind();
  std::vector<std::pair<std::string, std::string>> jobs;  // (input wav, output path)
  if (!o.wav.empty()) {
    if (o.out.empty()) throw Error(Errc::kConfigError, "--wav needs --out");
    jobs.emplace_back(o.wav, o.out);
  } else if (!o.wav_list.empty()) {
    if (o.out.empty()) throw Error(Errc::kConfigError, "--wav-list needs --out (a directory)");
    std::ifstream is(o.wav_list);
    if (!is) throw Error(Errc::kIo, "cannot open " + o.wav_list);
    std::filesystem::create_directories(o.out);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      std::istringstream ls(line);
      std::string id, path;
      if (!(ls >> id)) continue;
      if (!(ls >> path)) throw Error(Errc::kParseError, o.wav_list + ":" + std::to_string(lineno) + ": expected 'utt_id path'");
      jobs.emplace_back(path, (std::filesystem::path(o.out) / (id + ".feat")).string());
    }
  } else {
    throw Error(Errc::kConfigError, "give --wav or --wav-list");
  }
  for (const auto &[in, dst] : jobs) {
    FeatureMatrix f = ExtractFeatures(ReadWav(in), fe, kind);
    WriteFeatureFile(dst, f.frames);
    out << dst << ' ' << f.NumFrames() << 'x' << f.Dim() << '\n';
  }
  return kExitOk;
}

std::string SystemLabel(const Options &o, const std::string &fallback) {
  return o.system.empty() ? fallback : o.system;
}

int SynthCorpusCmd(const Options &o, Config &config, std::ostream &out) {
  if (o.out.empty()) throw Error(Errc::kConfigError, "--out is required");
  SyntheticSpec spec = config.Synthetic();
  if (o.seed != 0) spec.seed = o.seed;
  if (o.speakers != 0) spec.num_speakers = o.speakers;
  if (o.phrases != 0) spec.num_phrases = o.phrases;
  if (o.phones_per_phrase != 0) spec.phones_per_phrase = o.phones_per_phrase;
  if (o.utterances != 0) spec.utterances_per_cell = o.utterances;
  if (o.background >= 0) spec.background_speakers = o.background;
  const Corpus corpus = GenerateSyntheticCorpus(spec);
  WriteCorpusDir(o.out, corpus);
  out << "wrote " << corpus.utterances.size() << " utterances, " << corpus.trials.size() << " trials to " << o.out
      << '\n';
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Text-dependent speaker verification toolkit", "tdsv"};
  app.require_subcommand(1, 1);
  Options o;
  app.add_option("--config", o.config_file, "Configuration file (key = value lines)");
  app.add_option("--set", o.sets, "Override a configuration key: key=value (repeatable)");
  app.add_option("--workers", o.workers, "Worker threads for per-utterance work");

  auto *extract = app.add_subcommand("extract-features", "Compute features from 16 kHz mono WAV files");
  extract->add_option("--wav", o.wav, "Single input WAV");
  extract->add_option("--wav-list", o.wav_list, "File of 'utt_id path' lines");
  extract->add_option("--out", o.out, "Output feature file, or directory with --wav-list");

  auto *train_ubm = app.add_subcommand("train-ubm", "Train the universal background model");
  auto *train_hmm = app.add_subcommand("train-hmm", "Train mono-phone HMMs");
  auto *train_t = app.add_subcommand("train-tmatrix", "Train a total variability matrix");
  auto *enroll = app.add_subcommand("enroll", "Enroll every model of a corpus");
  auto *score = app.add_subcommand("score", "Score the trial list of a corpus");
  for (auto *sub : {train_ubm, train_hmm, train_t, enroll, score}) {
    sub->add_option("--corpus", o.corpus_dir, "Corpus directory")->required();
    sub->add_option("--out", o.out, "Output file")->required();
  }
  for (auto *sub : {train_t, enroll, score})
    sub->add_option("--system", o.system, "System: gmm-ubm, ivector, gmm-hmm/{viterbi,fb}, ivector-hmm/{viterbi,fb}");
  score->add_option("--trials", o.trials, "Trial list replacing the corpus one");

  auto *evaluate = app.add_subcommand("evaluate", "Compute EER and minDCF from a score file");
  evaluate->add_option("--scores", o.scores, "Score file")->required();
  evaluate->add_option("--kv", o.kv_out, "Also write key-value metrics here");

  auto *align_dump = app.add_subcommand("align-dump", "Write per-frame state posteriors as CSV");
  align_dump->add_option("--corpus", o.corpus_dir, "Corpus directory")->required();
  align_dump->add_option("--utt", o.utt, "Utterance id")->required();
  align_dump->add_option("--phrase", o.phrase, "Align against this phrase instead of the utterance's own");
  align_dump->add_option("--algo", o.algo, "viterbi or fb")->check(CLI::IsMember({"viterbi", "fb"}));
  align_dump->add_option("--out", o.out, "Output CSV")->required();

  auto *synth = app.add_subcommand("synth-corpus", "Generate a synthetic corpus");
  synth->add_option("--seed", o.seed, "Seed (overrides pipeline.seed)");
  synth->add_option("--speakers", o.speakers, "Evaluated speakers");
  synth->add_option("--phrases", o.phrases, "Phrases");
  synth->add_option("--phones-per-phrase", o.phones_per_phrase, "Phones per phrase");
  synth->add_option("--utterances", o.utterances, "Utterances per speaker and phrase");
  synth->add_option("--background-speakers", o.background, "Background-only speakers");
  synth->add_option("--out", o.out, "Output directory")->required();

  auto *run = app.add_subcommand("run-experiment", "Run and compare the configured systems");
  run->add_option("--corpus", o.corpus_dir, "Corpus directory (default: synthetic corpus from synth.*)");
  run->add_option("--out", o.out, "Output prefix: writes <prefix>.txt and <prefix>.kv");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    Config config = BuildConfig(o, err);
    const ExperimentOptions xopts = config.Experiment();
    if (extract->parsed()) return ExtractFeaturesCmd(o, config, out);
    if (synth->parsed()) return SynthCorpusCmd(o, config, out);

    if (evaluate->parsed()) {
      std::ifstream is(o.scores);
      if (!is) throw Error(Errc::kIo, "cannot open " + o.scores);
      const ScoreSet scores = ReadScores(is, o.scores);
      const auto rows = EvaluateScores("scores", scores, xopts.mdcf08, xopts.mdcf10);
      WriteMetricTable(out, rows);
      if (!o.kv_out.empty()) {
        auto os = OpenOut(o.kv_out);
        WriteMetricKeyValues(os, rows);
      } else {
        WriteMetricKeyValues(out, rows);
      }
      return kExitOk;
    }

    if (run->parsed()) {
      const Corpus corpus = o.corpus_dir.empty() ? GenerateSyntheticCorpus(config.Synthetic()) : LoadCorpusDir(o.corpus_dir);
      Experiment experiment(corpus, xopts);
      const ExperimentReport report = experiment.CompareSystems(config.Systems());
      if (o.out.empty()) {
        report.WriteTable(out);
        report.WriteKeyValues(out);
      } else {
        auto table = OpenOut(o.out + ".txt");
        report.WriteTable(table);
        auto kv = OpenOut(o.out + ".kv");
        report.WriteKeyValues(kv);
        report.WriteTable(out);
      }
      return kExitOk;
    }

    Corpus corpus = RequireCorpus(o);
    if (score->parsed() && !o.trials.empty()) corpus.trials = LoadTrials(o.trials);
    Experiment experiment(corpus, xopts);

    if (train_ubm->parsed()) {
      SaveModel(o.out, experiment.Ubm(config.System("gmm-ubm")));
    } else if (train_hmm->parsed()) {
      const PhoneHmmSet &hmm = experiment.Hmm(config.System("gmm-hmm/viterbi"));
      SaveModel(o.out, hmm);
      out << hmm.NumPhones() << " phones, " << hmm.TotalMixtures() << " Gaussians\n";
    } else if (train_t->parsed()) {
      const SystemConfig sys = config.System(SystemLabel(o, "ivector"));
      if (sys.kind != SystemKind::kIVector && sys.kind != SystemKind::kIVectorHmm)
        throw Error(Errc::kConfigError, "train-tmatrix needs an i-vector system");
      SaveModel(o.out, experiment.TMatrix(sys));
    } else if (enroll->parsed()) {
      const EnrolledModels enrolled = experiment.Enroll(config.System(SystemLabel(o, "gmm-ubm")));
      std::vector<NamedModel> models;
      for (const auto &[id, g] : enrolled.gmms) models.push_back({id, g});
      for (const auto &[id, s] : enrolled.states) models.push_back({id, s});
      for (const auto &[id, w] : enrolled.ivectors) models.push_back({id, IVector{w, Matrix()}});
      SaveModels(o.out, models);
      out << models.size() << " models enrolled\n";
    } else if (score->parsed()) {
      const SystemReport report = experiment.RunSystem(config.System(SystemLabel(o, "gmm-ubm")));
      auto os = OpenOut(o.out);
      WriteScores(os, report.scores);
      WriteMetricTable(out, report.metrics);
    } else if (align_dump->parsed()) {
      SystemConfig sys = config.System(std::string("gmm-hmm/") + o.algo);
      const PhoneHmmSet &hmm = experiment.Hmm(sys);
      const Utterance &utt = experiment.Utt(o.utt);
      std::vector<std::string> transcript = utt.transcript;
      const std::string phrase = o.phrase.empty() ? utt.phrase_id : o.phrase;
      auto it = corpus.phrase_transcripts.find(phrase);
      if (it != corpus.phrase_transcripts.end() && (!o.phrase.empty() || transcript.empty())) transcript = it->second;
      const CompositeHmm graph = BuildCompositeGraph(hmm, transcript, sys.hmm.silence);
      const Alignment ali = Align(*sys.align, graph, hmm.pdfs, utt.Stream(sys.align_stream).frames,
                                  AlignOptions{sys.prune_threshold});
      auto os = OpenOut(o.out);
      WritePosteriorCsv(os, utt.utt_id, ali, graph, hmm.phones);
      out << ali.NumFrames() << " frames\n";
    }
    return kExitOk;
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return e.code() == Errc::kConfigError ? kExitUsage : kExitData;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace tdsv
