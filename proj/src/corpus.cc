// src/corpus.cc

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

#include "tdsv/corpus.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "tdsv/feature-io.h"

namespace tdsv {

namespace {

std::ifstream OpenOrThrow(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::kIo, "cannot open " + path);
  return is;
}

/// Splits a line into whitespace-separated tokens, dropping a `#` comment.
std::vector<std::string> Tokenize(const std::string &line) {
  const std::string body = line.substr(0, line.find('#'));
  std::istringstream ss(body);
  std::vector<std::string> tokens;
  for (std::string tok; ss >> tok;) tokens.push_back(std::move(tok));
  return tokens;
}

std::string At(const std::string &what, int line_no) {
  return what + ":" + std::to_string(line_no);
}

}  // namespace

const char *TrialTypeName(TrialType type) {
  switch (type) {
    case TrialType::kTC: return "TC";
    case TrialType::kIC: return "IC";
    case TrialType::kTW: return "TW";
    case TrialType::kIW: return "IW";
  }
  return "??";
}

TrialType ParseTrialType(std::string_view name) {
  if (name == "TC") return TrialType::kTC;
  if (name == "IC") return TrialType::kIC;
  if (name == "TW") return TrialType::kTW;
  if (name == "IW") return TrialType::kIW;
  throw Error(Errc::kUnknownTrialType, "unknown trial type '" + std::string(name) + "'");
}

Trial MakeTrial(std::string model_id, std::string test_utt_id, TrialType type) {
  return Trial{std::move(model_id), std::move(test_utt_id), type, type == TrialType::kTC};
}

std::vector<Trial> ParseTrials(std::istream &is, const std::string &what) {
  std::vector<Trial> trials;
  int line_no = 0;
  for (std::string line; std::getline(is, line);) {
    ++line_no;
    const auto tok = Tokenize(line);
    if (tok.empty()) continue;
    if (tok.size() != 3)
      throw Error(Errc::kParseError,
                  At(what, line_no) + ": expected `model_id utt_id TYPE`, got " +
                      std::to_string(tok.size()) + " fields");
    TrialType type;
    try {
      type = ParseTrialType(tok[2]);
    } catch (const Error &e) {
      throw Error(Errc::kParseError, At(what, line_no) + ": " + e.what());
    }
    trials.push_back(MakeTrial(tok[0], tok[1], type));
  }
  return trials;
}

std::vector<Trial> LoadTrials(const std::string &path) {
  auto is = OpenOrThrow(path);
  return ParseTrials(is, path);
}

void WriteTrials(const std::string &path, const std::vector<Trial> &trials) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::kIo, "cannot write " + path);
  for (const auto &t : trials)
    os << t.model_id << ' ' << t.test_utt_id << ' ' << TrialTypeName(t.type) << '\n';
}

TranscriptMap ParseTranscripts(std::istream &is, const std::string &what) {
  TranscriptMap out;
  int line_no = 0;
  for (std::string line; std::getline(is, line);) {
    ++line_no;
    auto tok = Tokenize(line);
    if (tok.empty()) continue;
    if (tok.size() < 2)
      throw Error(Errc::kParseError, At(what, line_no) + ": transcript has no phones");
    std::string key = tok.front();
    tok.erase(tok.begin());
    if (!out.emplace(key, std::move(tok)).second)
      throw Error(Errc::kParseError, At(what, line_no) + ": duplicate key " + key);
  }
  return out;
}

TranscriptMap LoadTranscripts(const std::string &path) {
  auto is = OpenOrThrow(path);
  return ParseTranscripts(is, path);
}

EnrollmentMap LoadEnrollment(const std::string &path) {
  auto is = OpenOrThrow(path);
  EnrollmentMap out;
  int line_no = 0;
  for (std::string line; std::getline(is, line);) {
    ++line_no;
    auto tok = Tokenize(line);
    if (tok.empty()) continue;
    if (tok.size() < 2)
      throw Error(Errc::kParseError, At(path, line_no) + ": model without utterances");
    std::string model = tok.front();
    tok.erase(tok.begin());
    out[model] = std::move(tok);
  }
  return out;
}

const FeatureMatrix &Utterance::Stream(const std::string &name) const {
  if (name.empty() || name == "base") return features;
  auto it = streams.find(name);
  if (it == streams.end())
    throw Error(Errc::kMissingUtterance, "utterance " + utt_id + " has no stream '" + name + "'");
  return it->second;
}

const Utterance *Corpus::Find(const std::string &utt_id) const {
  for (const auto &u : utterances)
    if (u.utt_id == utt_id) return &u;
  return nullptr;
}

std::vector<const Utterance *> Corpus::BackgroundUtterances() const {
  std::set<std::string> used;
  for (const auto &[model, utts] : enrollment) used.insert(utts.begin(), utts.end());
  for (const auto &t : trials) used.insert(t.test_utt_id);
  std::vector<const Utterance *> out;
  for (const auto &u : utterances)
    if (!used.count(u.utt_id)) out.push_back(&u);
  return out;
}

std::string Corpus::ModelPhrase(const std::string &model_id) const {
  auto it = enrollment.find(model_id);
  if (it == enrollment.end() || it->second.empty())
    throw Error(Errc::kMissingModel, "no enrollment for model " + model_id);
  const Utterance *u = Find(it->second.front());
  if (u == nullptr) throw Error(Errc::kMissingUtterance, it->second.front());
  return u->phrase_id;
}

std::uint64_t Corpus::ContentHash() const {
  Hasher h;
  for (const auto &p : phones) h.Add(p);
  for (const auto &u : utterances) {
    h.Add(u.utt_id);
    h.Add(u.speaker_id);
    h.Add(u.phrase_id);
    for (const auto &p : u.transcript) h.Add(p);
    h.Add(u.features.frames);
    for (const auto &[name, fm] : u.streams) {
      h.Add(name);
      h.Add(fm.frames);
    }
  }
  for (const auto &[k, v] : phrase_transcripts) {
    h.Add(k);
    for (const auto &p : v) h.Add(p);
  }
  for (const auto &[k, v] : enrollment) {
    h.Add(k);
    for (const auto &p : v) h.Add(p);
  }
  for (const auto &t : trials) {
    h.Add(t.model_id);
    h.Add(t.test_utt_id);
    h.Add(static_cast<std::int64_t>(t.type));
  }
  return h.value();
}

void WriteCorpusDir(const std::string &dir, const Corpus &corpus) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "feats");
  std::ofstream manifest(fs::path(dir) / "manifest.txt");
  std::ofstream transcripts(fs::path(dir) / "transcripts.txt");
  std::ofstream phones(fs::path(dir) / "phones.txt");
  std::ofstream enroll(fs::path(dir) / "enroll.txt");
  if (!manifest || !transcripts || !phones || !enroll)
    throw Error(Errc::kIo, "cannot write corpus files under " + dir);

  for (const auto &p : corpus.phones) phones << p << '\n';
  for (const auto &[key, seq] : corpus.phrase_transcripts) {
    transcripts << key;
    for (const auto &p : seq) transcripts << ' ' << p;
    transcripts << '\n';
  }
  for (const auto &u : corpus.utterances) {
    const std::string rel = "feats/" + u.utt_id + ".feat";
    WriteFeatureFile((fs::path(dir) / rel).string(), u.features.frames);
    std::string ref = "-";
    auto it = corpus.phrase_transcripts.find(u.phrase_id);
    if (it != corpus.phrase_transcripts.end() && it->second == u.transcript) {
      ref = u.phrase_id;
    } else if (!u.transcript.empty()) {
      ref = u.utt_id;
      transcripts << u.utt_id;
      for (const auto &p : u.transcript) transcripts << ' ' << p;
      transcripts << '\n';
    }
    manifest << u.utt_id << ' ' << u.speaker_id << ' ' << u.phrase_id << ' ' << rel << ' ' << ref
             << '\n';
  }
  for (const auto &[model, utts] : corpus.enrollment) {
    enroll << model;
    for (const auto &u : utts) enroll << ' ' << u;
    enroll << '\n';
  }
  WriteTrials((fs::path(dir) / "trials.txt").string(), corpus.trials);
}

Corpus LoadCorpusDir(const std::string &dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  Corpus corpus;
  TranscriptMap transcripts;
  if (fs::exists(root / "transcripts.txt"))
    transcripts = LoadTranscripts((root / "transcripts.txt").string());

  const std::string manifest_path = (root / "manifest.txt").string();
  auto is = OpenOrThrow(manifest_path);
  std::set<std::string> seen;
  int line_no = 0;
  for (std::string line; std::getline(is, line);) {
    ++line_no;
    const auto tok = Tokenize(line);
    if (tok.empty()) continue;
    if (tok.size() != 5)
      throw Error(Errc::kParseError,
                  At(manifest_path, line_no) +
                      ": expected `utt_id speaker phrase path transcript_ref`");
    if (!seen.insert(tok[0]).second)
      throw Error(Errc::kParseError, At(manifest_path, line_no) + ": duplicate utterance " + tok[0]);
    Utterance u;
    u.utt_id = tok[0];
    u.speaker_id = tok[1];
    u.phrase_id = tok[2];
    const fs::path feat = fs::path(tok[3]).is_absolute() ? fs::path(tok[3]) : root / tok[3];
    u.features.frames = ReadFeatureFile(feat.string());
    if (tok[4] != "-") {
      auto it = transcripts.find(tok[4]);
      if (it == transcripts.end())
        throw Error(Errc::kParseError,
                    At(manifest_path, line_no) + ": unknown transcript ref " + tok[4]);
      u.transcript = it->second;
    }
    corpus.utterances.push_back(std::move(u));
  }
  // Keep phrase-keyed transcripts verbatim, including those not referenced.
  for (const auto &u : corpus.utterances) transcripts.erase(u.utt_id);
  for (auto &[k, v] : transcripts) corpus.phrase_transcripts[k] = v;

  if (fs::exists(root / "phones.txt")) {
    std::ifstream ps(root / "phones.txt");
    for (std::string p; ps >> p;) corpus.phones.push_back(p);
  } else {
    std::set<std::string> inv;
    for (const auto &u : corpus.utterances) inv.insert(u.transcript.begin(), u.transcript.end());
    corpus.phones.assign(inv.begin(), inv.end());
  }
  if (fs::exists(root / "enroll.txt")) corpus.enrollment = LoadEnrollment((root / "enroll.txt").string());
  if (fs::exists(root / "trials.txt")) corpus.trials = LoadTrials((root / "trials.txt").string());
  return corpus;
}

void AttachStream(Corpus *corpus, const std::string &name, const std::string &dir) {
  namespace fs = std::filesystem;
  for (auto &u : corpus->utterances) {
    FeatureMatrix fm;
    fm.frames = ReadFeatureFile((fs::path(dir) / (u.utt_id + ".feat")).string());
    fm.kind = FeatureKind::kExternal;
    u.streams[name] = std::move(fm);
  }
}

}  // namespace tdsv
