// src/features.cc

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

#include "tdsv/features.h"

#include <complex>
#include <numbers>
#include <vector>

#include "tdsv/rng.h"

namespace tdsv {

const char *FeatureKindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMfcc: return "MFCC";
    case FeatureKind::kFbank: return "FBANK";
    case FeatureKind::kExternal: return "EXTERNAL";
    case FeatureKind::kTandem: return "TANDEM";
  }
  return "?";
}

void FrontendConfig::Validate() const {
  if (num_filters < 2) throw Error(Errc::kInvalidArgument, "num_filters must be >= 2");
  if (num_cepstra < 1 || num_cepstra >= num_filters)
    throw Error(Errc::kInvalidArgument, "need 1 <= num_cepstra < num_filters");
  if (frame_length_s <= 0 || frame_shift_s <= 0 || frame_shift_s > frame_length_s)
    throw Error(Errc::kInvalidArgument, "need 0 < frame_shift_s <= frame_length_s");
  if (delta_window < 1) throw Error(Errc::kInvalidArgument, "delta_window must be >= 1");
  if (!(low_freq >= 0 && high_freq > low_freq))
    throw Error(Errc::kInvalidArgument, "need 0 <= low_freq < high_freq");
  if (energy_floor <= 0) throw Error(Errc::kInvalidArgument, "energy_floor must be positive");
}

int FrontendConfig::WindowSamples(int sample_rate) const {
  return static_cast<int>(std::lround(frame_length_s * sample_rate));
}
int FrontendConfig::ShiftSamples(int sample_rate) const {
  return static_cast<int>(std::lround(frame_shift_s * sample_rate));
}

int NumFrames(std::size_t num_samples, int window, int shift) {
  if (num_samples < static_cast<std::size_t>(window)) return 0;
  return static_cast<int>((num_samples - window) / shift) + 1;
}

double MelScale(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double InverseMelScale(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> MelFilterCenters(const FrontendConfig &config) {
  const double lo = MelScale(config.low_freq), hi = MelScale(config.high_freq);
  const double step = (hi - lo) / (config.num_filters + 1);
  std::vector<double> centers(config.num_filters);
  for (int f = 0; f < config.num_filters; ++f) centers[f] = InverseMelScale(lo + (f + 1) * step);
  return centers;
}

namespace {

// In-place iterative radix-2 FFT; data.size() must be a power of two.
void Fft(std::vector<std::complex<double>> *data) {
  auto &a = *data;
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k], v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

/// Filter weights over FFT bins, triangles linear on the mel axis.
Matrix MelBank(const FrontendConfig &config, int fft_size, int sample_rate) {
  const int num_bins = fft_size / 2 + 1;
  const double lo = MelScale(config.low_freq), hi = MelScale(config.high_freq);
  const double step = (hi - lo) / (config.num_filters + 1);
  Matrix bank = Matrix::Zero(config.num_filters, num_bins);
  for (int f = 0; f < config.num_filters; ++f) {
    const double left = lo + f * step, center = left + step, right = center + step;
    for (int k = 0; k < num_bins; ++k) {
      const double mel = MelScale(static_cast<double>(k) * sample_rate / fft_size);
      if (mel > left && mel <= center) {
        bank(f, k) = (mel - left) / (center - left);
      } else if (mel > center && mel < right) {
        bank(f, k) = (right - mel) / (right - center);
      }
    }
  }
  return bank;
}

struct Framed {
  Matrix log_mel;        // T x num_filters
  Vector log_energy;     // T
};

Framed AnalyzeFrames(const Waveform &wave, const FrontendConfig &config) {
  config.Validate();
  if (wave.sample_rate != kRequiredSampleRate)
    throw Error(Errc::kUnsupportedRate, "front end expects 16 kHz audio");
  const int window = config.WindowSamples(wave.sample_rate);
  const int shift = config.ShiftSamples(wave.sample_rate);
  const int num_frames = NumFrames(wave.samples.size(), window, shift);
  if (num_frames == 0)
    throw Error(Errc::kUtteranceTooShort, std::to_string(wave.samples.size()) +
                                              " samples is less than one " +
                                              std::to_string(window) + "-sample window");
  int fft_size = 1;
  while (fft_size < window) fft_size <<= 1;
  const Matrix bank = MelBank(config, fft_size, wave.sample_rate);

  std::vector<double> hamming(window);
  for (int n = 0; n < window; ++n)
    hamming[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (window - 1));

  std::vector<double> samples = wave.samples;
  if (config.dither > 0.0) {
    Rng rng(config.dither_seed);
    for (auto &s : samples) s += config.dither * (2.0 * rng.Uniform() - 1.0);
  }

  Framed out{Matrix(num_frames, config.num_filters), Vector(num_frames)};
  std::vector<double> frame(window);
  std::vector<std::complex<double>> spectrum(fft_size);
  Vector power(fft_size / 2 + 1);
  for (int t = 0; t < num_frames; ++t) {
    const double *src = samples.data() + static_cast<std::size_t>(t) * shift;
    double energy = 0.0;
    for (int n = 0; n < window; ++n) {
      frame[n] = src[n];
      energy += src[n] * src[n];
    }
    out.log_energy(t) = std::log(std::max(energy, config.energy_floor));
    for (int n = window - 1; n > 0; --n) frame[n] -= config.preemphasis * frame[n - 1];
    frame[0] -= config.preemphasis * frame[0];
    std::fill(spectrum.begin(), spectrum.end(), std::complex<double>(0.0));
    for (int n = 0; n < window; ++n) spectrum[n] = frame[n] * hamming[n];
    Fft(&spectrum);
    for (int k = 0; k <= fft_size / 2; ++k) power(k) = std::norm(spectrum[k]);
    const Vector mel = bank * power;
    for (int f = 0; f < config.num_filters; ++f)
      out.log_mel(t, f) = std::log(std::max(mel(f), config.energy_floor));
  }
  return out;
}

}  // namespace

FeatureMatrix ComputeFbank(const Waveform &wave, const FrontendConfig &config) {
  Framed framed = AnalyzeFrames(wave, config);
  FeatureMatrix fm;
  fm.frames = std::move(framed.log_mel);
  fm.frame_shift = config.frame_shift_s;
  fm.kind = FeatureKind::kFbank;
  return fm;
}

FeatureMatrix ComputeMfcc(const Waveform &wave, const FrontendConfig &config) {
  const Framed framed = AnalyzeFrames(wave, config);
  const int nf = config.num_filters, nc = config.num_cepstra;
  // Orthonormal DCT-II rows 1..nc.
  Matrix dct(nc, nf);
  for (int k = 1; k <= nc; ++k)
    for (int n = 0; n < nf; ++n)
      dct(k - 1, n) = std::sqrt(2.0 / nf) * std::cos(std::numbers::pi * k * (n + 0.5) / nf);
  FeatureMatrix fm;
  const int dim = nc + (config.include_energy ? 1 : 0);
  fm.frames.resize(framed.log_mel.rows(), dim);
  // Frame by frame through an aligned copy: a blocked matrix product may round
  // rows differently depending on where they fall, and identical inputs must
  // give identical frames.
  Vector log_mel(nf), cep(nc);
  for (Eigen::Index t = 0; t < framed.log_mel.rows(); ++t) {
    log_mel = framed.log_mel.row(t).transpose();
    cep.noalias() = dct * log_mel;
    fm.frames.row(t).head(nc) = cep.transpose();
  }
  if (config.include_energy) fm.frames.col(nc) = framed.log_energy;
  fm.frame_shift = config.frame_shift_s;
  fm.kind = FeatureKind::kMfcc;
  return fm;
}

namespace {

Matrix Delta(const Matrix &x, int window) {
  const Eigen::Index num_frames = x.rows();
  double denom = 0.0;
  for (int n = 1; n <= window; ++n) denom += n * n;
  denom *= 2.0;
  Matrix d = Matrix::Zero(num_frames, x.cols());
  for (Eigen::Index t = 0; t < num_frames; ++t) {
    for (int n = 1; n <= window; ++n) {
      const Eigen::Index fwd = std::min<Eigen::Index>(t + n, num_frames - 1);
      const Eigen::Index back = std::max<Eigen::Index>(t - n, 0);
      d.row(t) += n * (x.row(fwd) - x.row(back));
    }
  }
  return d / denom;
}

}  // namespace

FeatureMatrix AppendDeltas(const FeatureMatrix &features, int window) {
  if (window < 1) throw Error(Errc::kInvalidArgument, "delta window must be >= 1");
  if (features.NumFrames() < 1) throw Error(Errc::kInvalidArgument, "no frames");
  const Matrix d1 = Delta(features.frames, window);
  const Matrix d2 = Delta(d1, window);
  FeatureMatrix out = features;
  const Eigen::Index dim = features.frames.cols();
  out.frames.resize(features.frames.rows(), 3 * dim);
  out.frames << features.frames, d1, d2;
  return out;
}

FeatureMatrix ApplyCmvn(const FeatureMatrix &features) {
  FeatureMatrix out = features;
  const Eigen::Index num_frames = features.frames.rows();
  if (num_frames == 0) return out;
  const Eigen::RowVectorXd mean = features.frames.colwise().mean();
  out.frames.rowwise() -= mean;
  if (num_frames < 2) return out;
  for (Eigen::Index d = 0; d < out.frames.cols(); ++d) {
    const double var = out.frames.col(d).squaredNorm() / static_cast<double>(num_frames);
    if (var < 1e-12) {
      out.frames.col(d).setZero();
    } else {
      out.frames.col(d) /= std::sqrt(var);
    }
  }
  return out;
}

FeatureMatrix TandemConcat(const FeatureMatrix &base, const FeatureMatrix &external) {
  if (base.NumFrames() != external.NumFrames())
    throw Error(Errc::kFrameCountMismatch, "base has " + std::to_string(base.NumFrames()) +
                                               " frames, external has " +
                                               std::to_string(external.NumFrames()));
  FeatureMatrix out;
  out.frame_shift = base.frame_shift;
  out.kind = FeatureKind::kTandem;
  out.frames.resize(base.frames.rows(), base.frames.cols() + external.frames.cols());
  out.frames.leftCols(base.frames.cols()) = base.frames;
  out.frames.rightCols(external.frames.cols()) = external.frames;
  return out;
}

FeatureMatrix ExtractFeatures(const Waveform &wave, const FrontendConfig &config,
                              FeatureKind kind) {
  FeatureMatrix stat;
  if (kind == FeatureKind::kMfcc) {
    stat = ComputeMfcc(wave, config);
  } else if (kind == FeatureKind::kFbank) {
    stat = ComputeFbank(wave, config);
  } else {
    throw Error(Errc::kInvalidArgument, "front end only computes MFCC or FBANK");
  }
  return ApplyCmvn(AppendDeltas(stat, config.delta_window));
}

}  // namespace tdsv
