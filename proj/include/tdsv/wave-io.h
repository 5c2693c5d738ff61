// tdsv/wave-io.h

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

#ifndef TDSV_WAVE_IO_H_
#define TDSV_WAVE_IO_H_

#include <string>
#include <vector>

namespace tdsv {

inline constexpr int kRequiredSampleRate = 16000;

struct Waveform {
  std::vector<double> samples;  // in [-1, 1)
  int sample_rate = kRequiredSampleRate;
};

/// Reads a RIFF/WAVE file holding mono 16-bit PCM at 16 kHz.  Anything else
/// is rejected, not converted.
Waveform ReadWav(const std::string &path);

/// Writes mono s16le at wave.sample_rate; samples are clipped to [-1, 1).
void WriteWav(const std::string &path, const Waveform &wave);

}  // namespace tdsv

#endif  // TDSV_WAVE_IO_H_
