// tdsv/corpus.h

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

#ifndef TDSV_CORPUS_H_
#define TDSV_CORPUS_H_

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "tdsv/feature-matrix.h"

namespace tdsv {

/// Target-Correct is the only genuine trial; the other three are the error
/// types of text-dependent verification.
enum class TrialType { kTC, kIC, kTW, kIW };

const char *TrialTypeName(TrialType type);
/// Throws Errc::kUnknownTrialType.
TrialType ParseTrialType(std::string_view name);

struct Trial {
  std::string model_id;
  std::string test_utt_id;
  TrialType type = TrialType::kTC;
  bool is_target = true;
};

Trial MakeTrial(std::string model_id, std::string test_utt_id, TrialType type);

/// `model_id utt_id TYPE` per line; `#` starts a comment.
std::vector<Trial> ParseTrials(std::istream &is, const std::string &what);
std::vector<Trial> LoadTrials(const std::string &path);
void WriteTrials(const std::string &path, const std::vector<Trial> &trials);

/// `key phone1 phone2 ...` per line.  Keys are utterance or phrase ids.
using TranscriptMap = std::map<std::string, std::vector<std::string>>;
TranscriptMap ParseTranscripts(std::istream &is, const std::string &what);
TranscriptMap LoadTranscripts(const std::string &path);

/// `model_id utt1 utt2 ...` per line.
using EnrollmentMap = std::map<std::string, std::vector<std::string>>;
EnrollmentMap LoadEnrollment(const std::string &path);

struct Utterance {
  std::string utt_id;
  std::string speaker_id;
  std::string phrase_id;
  std::vector<std::string> transcript;  // phone sequence, may be empty
  FeatureMatrix features;
  /// Additional frame-synchronous streams (e.g. tandem features), by name.
  std::map<std::string, FeatureMatrix> streams;

  /// "" and "base" name `features`; anything else must be in `streams`.
  const FeatureMatrix &Stream(const std::string &name) const;
};

struct Corpus {
  std::vector<std::string> phones;  // speech phone inventory, silence excluded
  std::vector<Utterance> utterances;
  TranscriptMap phrase_transcripts;
  EnrollmentMap enrollment;  // model id -> enrollment utterance ids
  std::vector<Trial> trials;

  const Utterance *Find(const std::string &utt_id) const;
  /// Utterances used neither for enrollment nor as a trial test segment.
  std::vector<const Utterance *> BackgroundUtterances() const;
  /// Phrase of a model, taken from its first enrollment utterance.
  std::string ModelPhrase(const std::string &model_id) const;
  /// Order-sensitive hash of ids, transcripts and feature bits.
  std::uint64_t ContentHash() const;
};

/// Corpus directory layout:
///   manifest.txt     utt_id speaker_id phrase_id feature_path transcript_ref
///   transcripts.txt  key phone...   (transcript_ref is a key in this file)
///   phones.txt       one speech phone per line
///   enroll.txt       model_id utt...
///   trials.txt       model_id utt_id TYPE
/// feature_path is relative to the directory.
void WriteCorpusDir(const std::string &dir, const Corpus &corpus);
Corpus LoadCorpusDir(const std::string &dir);

/// Loads `<dir>/<utt_id>.feat` into Utterance::streams[name] for every
/// utterance.
void AttachStream(Corpus *corpus, const std::string &name, const std::string &dir);

}  // namespace tdsv

#endif  // TDSV_CORPUS_H_
