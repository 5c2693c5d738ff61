// src/base.cc

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

#include "tdsv/base.h"

#include <iostream>
#include <mutex>

namespace tdsv {

const char *ErrcName(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument: return "invalid-argument";
    case Errc::kDimensionMismatch: return "dimension-mismatch";
    case Errc::kIo: return "io-error";
    case Errc::kNotAWav: return "not-a-wav";
    case Errc::kUnsupportedEncoding: return "unsupported-encoding";
    case Errc::kUnsupportedChannels: return "unsupported-channels";
    case Errc::kUnsupportedRate: return "unsupported-rate";
    case Errc::kBadMagic: return "bad-magic";
    case Errc::kTruncatedFile: return "truncated-file";
    case Errc::kDimensionOverflow: return "dimension-overflow";
    case Errc::kParseError: return "parse-error";
    case Errc::kUnknownTrialType: return "unknown-trial-type";
    case Errc::kInvalidSpec: return "invalid-spec";
    case Errc::kVersionMismatch: return "version-mismatch";
    case Errc::kCorruptPayload: return "corrupt-payload";
    case Errc::kUtteranceTooShort: return "utterance-too-short";
    case Errc::kFrameCountMismatch: return "frame-count-mismatch";
    case Errc::kInsufficientData: return "insufficient-data";
    case Errc::kModelShapeMismatch: return "model-shape-mismatch";
    case Errc::kPhoneMissingFromCorpus: return "phone-missing-from-corpus";
    case Errc::kInsufficientFrames: return "insufficient-frames";
    case Errc::kUnknownPhone: return "unknown-phone";
    case Errc::kEmptyTranscript: return "empty-transcript";
    case Errc::kNoValidPath: return "no-valid-path";
    case Errc::kLayoutMismatch: return "layout-mismatch";
    case Errc::kNonFiniteStats: return "non-finite-stats";
    case Errc::kInsufficientUtterances: return "insufficient-utterances";
    case Errc::kZeroVector: return "zero-vector";
    case Errc::kEmptyEnrollment: return "empty-enrollment";
    case Errc::kMissingModel: return "missing-model";
    case Errc::kMissingUtterance: return "missing-utterance";
    case Errc::kEmptyClass: return "empty-class";
    case Errc::kConfigError: return "config-error";
  }
  return "unknown-error";
}

std::string HexDigest(std::uint64_t h) {
  static const char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = kDigits[h & 0xf];
  return out;
}

namespace {
std::mutex g_sink_mutex;
WarningSink g_sink;
}  // namespace

void SetWarningSink(WarningSink sink) {
  std::lock_guard<std::mutex> lock(g_sink_mutex);
  g_sink = std::move(sink);
}

void Warn(std::string_view message) {
  std::lock_guard<std::mutex> lock(g_sink_mutex);
  if (g_sink) {
    g_sink(message);
  } else {
    std::cerr << "WARNING: " << message << '\n';
  }
}

}  // namespace tdsv
