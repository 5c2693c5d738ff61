// tdsv/features.h

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

#ifndef TDSV_FEATURES_H_
#define TDSV_FEATURES_H_

#include <cstdint>

#include "tdsv/feature-matrix.h"
#include "tdsv/wave-io.h"

namespace tdsv {

struct FrontendConfig {
  int num_filters = 40;
  int num_cepstra = 19;
  bool include_energy = true;
  int delta_window = 2;
  double frame_length_s = 0.025;
  double frame_shift_s = 0.010;
  double preemphasis = 0.97;
  double low_freq = 0.0;
  double high_freq = 8000.0;
  double energy_floor = 1e-10;
  /// Amplitude of uniform dither added to every sample; 0 disables it.
  double dither = 0.0;
  std::uint64_t dither_seed = 0;

  /// Throws Errc::kInvalidArgument.
  void Validate() const;
  int WindowSamples(int sample_rate) const;
  int ShiftSamples(int sample_rate) const;
};

/// Number of frames for n samples: floor((n - window) / shift) + 1, or 0 when
/// n < window.
int NumFrames(std::size_t num_samples, int window, int shift);

/// Center frequency in Hz of each mel filter.
std::vector<double> MelFilterCenters(const FrontendConfig &config);

double MelScale(double hz);
double InverseMelScale(double mel);

/// Static MFCCs: num_cepstra coefficients (c1..cK, c0 dropped) followed by
/// log frame energy when include_energy is set.
FeatureMatrix ComputeMfcc(const Waveform &wave, const FrontendConfig &config);

/// Static log mel filterbank energies, num_filters per frame.
FeatureMatrix ComputeFbank(const Waveform &wave, const FrontendConfig &config);

/// [x, delta(x), delta(delta(x))] with the usual regression window
///   d_t = sum_n n (x_{t+n} - x_{t-n}) / (2 sum_n n^2),  n = 1..window,
/// replicating the first and last frames at the edges.
FeatureMatrix AppendDeltas(const FeatureMatrix &features, int window);

/// Per-utterance mean and variance normalization.  Dimensions whose variance
/// is below 1e-12 become zero; a single-frame utterance gets mean
/// normalization only.
FeatureMatrix ApplyCmvn(const FeatureMatrix &features);

/// Frame-wise concatenation [base, external]; throws
/// Errc::kFrameCountMismatch.
FeatureMatrix TandemConcat(const FeatureMatrix &base, const FeatureMatrix &external);

/// MFCC or FBANK, then deltas, then CMVN: the front end used for modeling.
FeatureMatrix ExtractFeatures(const Waveform &wave, const FrontendConfig &config, FeatureKind kind);

}  // namespace tdsv

#endif  // TDSV_FEATURES_H_
