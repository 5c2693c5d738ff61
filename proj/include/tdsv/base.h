// tdsv/base.h

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

#ifndef TDSV_BASE_H_
#define TDSV_BASE_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace tdsv {

/// Row-major so that a row is one frame and frames are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();
inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// Error categories.  Every failure that can reach the command line maps onto
/// one of these; the CLI uses the category to pick an exit code.
enum class Errc {
  kInvalidArgument,
  kDimensionMismatch,
  // corpus-io
  kIo,
  kNotAWav,
  kUnsupportedEncoding,
  kUnsupportedChannels,
  kUnsupportedRate,
  kBadMagic,
  kTruncatedFile,
  kDimensionOverflow,
  kParseError,
  kUnknownTrialType,
  kInvalidSpec,
  kVersionMismatch,
  kCorruptPayload,
  // features
  kUtteranceTooShort,
  kFrameCountMismatch,
  // gmm
  kInsufficientData,
  kModelShapeMismatch,
  // hmm
  kPhoneMissingFromCorpus,
  kInsufficientFrames,
  kUnknownPhone,
  kEmptyTranscript,
  kNoValidPath,
  // ivector
  kLayoutMismatch,
  kNonFiniteStats,
  kInsufficientUtterances,
  kZeroVector,
  kEmptyEnrollment,
  // eval
  kMissingModel,
  kMissingUtterance,
  kEmptyClass,
  // pipeline / cli
  kConfigError,
};

const char *ErrcName(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string &what)
      : std::runtime_error(std::string(ErrcName(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// log(exp(a) + exp(b)) without overflow.
inline double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

/// FNV-1a, 64-bit.  Used for content hashes (cache keys, alignment
/// fingerprints), never for anything security related.
class Hasher {
 public:
  void AddBytes(const void *data, std::size_t n) {
    const auto *p = static_cast<const unsigned char *>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void Add(std::string_view s) {
    const std::uint64_t n = s.size();
    AddBytes(&n, sizeof(n));
    AddBytes(s.data(), s.size());
  }
  void Add(double v) { AddBytes(&v, sizeof(v)); }
  void Add(std::int64_t v) { AddBytes(&v, sizeof(v)); }
  void Add(const Matrix &m) {
    Add(static_cast<std::int64_t>(m.rows()));
    Add(static_cast<std::int64_t>(m.cols()));
    AddBytes(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string HexDigest(std::uint64_t h);

/// Warnings go through a replaceable sink so tests can observe them.
using WarningSink = std::function<void(std::string_view)>;
void SetWarningSink(WarningSink sink);
void Warn(std::string_view message);

}  // namespace tdsv

#endif  // TDSV_BASE_H_
