// src/hmm-speaker.cc

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

#include "tdsv/hmm-speaker.h"

#include <algorithm>

namespace tdsv {

int StateModels::NumSlots() const {
  int n = 0;
  for (const auto &g : pdfs) n += g.NumComponents();
  return n;
}

std::vector<int> StateModels::SlotOffsets() const {
  std::vector<int> off(pdfs.size() + 1, 0);
  for (std::size_t j = 0; j < pdfs.size(); ++j) off[j + 1] = off[j] + pdfs[j].NumComponents();
  return off;
}

Matrix StateModels::StackedMeans() const {
  Matrix m(NumSlots(), Dim());
  int row = 0;
  for (const auto &g : pdfs) {
    m.middleRows(row, g.NumComponents()) = g.means();
    row += g.NumComponents();
  }
  return m;
}

Matrix StateModels::StackedVars() const {
  Matrix v(NumSlots(), Dim());
  int row = 0;
  for (const auto &g : pdfs) {
    v.middleRows(row, g.NumComponents()) = g.vars();
    row += g.NumComponents();
  }
  return v;
}

void StateModels::Validate() const {
  if (pdfs.empty()) throw Error(Errc::kInvalidArgument, "state model set is empty");
  if (is_silence.size() != pdfs.size())
    throw Error(Errc::kInvalidArgument, "silence flags do not match the state count");
  for (const auto &g : pdfs)
    if (g.Dim() != Dim()) throw Error(Errc::kDimensionMismatch, "state models differ in dimension");
}

StateModels StateModels::FromHmm(const PhoneHmmSet &hmm) {
  StateModels m;
  m.pdfs = hmm.pdfs;
  for (int p = 0; p < hmm.NumPdfs(); ++p) m.is_silence.push_back(hmm.IsSilencePdf(p));
  return m;
}

bool CountedEntries(const Alignment &alignment, int t, const StateModels &models,
                    bool exclude_silence, std::vector<AlignEntry> *out) {
  const auto &frame = alignment.frames[t];
  out->clear();
  if (!exclude_silence) {
    out->assign(frame.begin(), frame.end());
    return !out->empty();
  }
  double sil = 0.0, speech = 0.0;
  for (const auto &e : frame) {
    if (models.is_silence[e.pdf]) {
      sil += e.post;
    } else {
      speech += e.post;
      out->push_back(e);
    }
  }
  if (sil >= 0.5 || out->empty() || speech <= 0.0) {
    out->clear();
    return false;
  }
  if (sil > 0.0)
    for (auto &e : *out) e.post /= speech;
  return true;
}

namespace {

void CheckSync(const Alignment &alignment, const Matrix &frames) {
  if (alignment.NumFrames() != frames.rows())
    throw Error(Errc::kFrameCountMismatch,
                "alignment has " + std::to_string(alignment.NumFrames()) +
                    " frames, speaker features have " + std::to_string(frames.rows()));
}

void CheckShapes(const StateModels &a, const StateModels &b) {
  if (a.NumPdfs() != b.NumPdfs() || a.Dim() != b.Dim())
    throw Error(Errc::kModelShapeMismatch, "speaker and background state models differ in shape");
  for (int j = 0; j < a.NumPdfs(); ++j)
    if (a.pdfs[j].NumComponents() != b.pdfs[j].NumComponents())
      throw Error(Errc::kModelShapeMismatch, "state " + std::to_string(j) + " mixture counts differ");
}

double LogSumExp(const Vector &v) {
  const double max = v.maxCoeff();
  if (max == kLogZero) return kLogZero;
  return max + std::log((v.array() - max).exp().sum());
}

}  // namespace

StateModels ReestimateStateGmms(const PhoneHmmSet &hmm, std::span<const Alignment> alignments,
                                std::span<const Matrix *const> speaker_frames,
                                const StateReestimateOptions &opts) {
  if (alignments.size() != speaker_frames.size())
    throw Error(Errc::kFrameCountMismatch, "alignment and feature lists differ in length");
  if (alignments.empty()) throw Error(Errc::kInsufficientData, "no utterances for state re-estimation");
  const int dim = static_cast<int>(speaker_frames.front()->cols());
  StateModels background = StateModels::FromHmm(hmm);

  Eigen::Index total_frames = 0;
  for (std::size_t u = 0; u < alignments.size(); ++u) {
    CheckSync(alignments[u], *speaker_frames[u]);
    if (speaker_frames[u]->cols() != dim)
      throw Error(Errc::kDimensionMismatch, "speaker features differ in dimension");
    total_frames += speaker_frames[u]->rows();
  }
  Matrix pooled(total_frames, dim);
  {
    Eigen::Index row = 0;
    for (const Matrix *m : speaker_frames) {
      pooled.middleRows(row, m->rows()) = *m;
      row += m->rows();
    }
  }
  GmmUpdateOptions update;
  update.var_floor = VarianceFloor(pooled, opts.var_floor_factor);

  std::vector<Gmm> priors;
  if (dim == hmm.Dim()) {
    priors = hmm.pdfs;
  } else {
    const Gmm global = GlobalGaussian(pooled, update.var_floor);
    for (const auto &g : hmm.pdfs) {
      const int c = g.NumComponents();
      priors.emplace_back(g.weights(), global.means().replicate(c, 1), global.vars().replicate(c, 1));
    }
  }

  std::vector<GmmAccumulator> acc;
  for (const auto &g : priors) acc.emplace_back(g.NumComponents(), dim);
  std::vector<AlignEntry> entries;
  for (std::size_t u = 0; u < alignments.size(); ++u) {
    const Matrix &x = *speaker_frames[u];
    for (int t = 0; t < alignments[u].NumFrames(); ++t) {
      if (!CountedEntries(alignments[u], t, background, opts.exclude_silence, &entries)) continue;
      for (const auto &e : entries) acc[e.pdf].AddFrame(x.row(t), e.mix, e.post);
    }
  }

  StateModels out;
  out.is_silence = background.is_silence;
  for (std::size_t j = 0; j < priors.size(); ++j)
    out.pdfs.push_back(acc[j].TotalOccupancy() > 0.0 ? UpdateGmm(priors[j], acc[j], update)
                                                     : priors[j]);
  return out;
}

HmmStats AccumulateHmmStats(const Alignment &alignment, const Matrix &speaker_frames,
                            const StateModels &models, bool exclude_silence) {
  HmmStats stats(models.NumSlots(), models.Dim());
  if (alignment.NumFrames() == 0 && speaker_frames.rows() == 0) return stats;
  CheckSync(alignment, speaker_frames);
  if (speaker_frames.cols() != models.Dim())
    throw Error(Errc::kDimensionMismatch, "speaker features do not match the state models");
  const std::vector<int> offsets = models.SlotOffsets();
  std::vector<AlignEntry> entries;
  for (int t = 0; t < alignment.NumFrames(); ++t) {
    if (!CountedEntries(alignment, t, models, exclude_silence, &entries)) continue;
    for (const auto &e : entries) {
      const int slot = offsets[e.pdf] + e.mix;
      stats.occupancy(slot) += e.post;
      stats.first.row(slot) += e.post * (speaker_frames.row(t) - models.pdfs[e.pdf].means().row(e.mix));
    }
  }
  return stats;
}

StateModels HmmMapAdapt(const StateModels &background, const HmmStats &stats,
                        const MapConfig &config) {
  if (stats.NumSlots() != background.NumSlots() || stats.Dim() != background.Dim())
    throw Error(Errc::kLayoutMismatch, "HMM stats do not match the state models");
  const std::vector<int> offsets = background.SlotOffsets();
  StateModels out;
  out.is_silence = background.is_silence;
  for (int j = 0; j < background.NumPdfs(); ++j) {
    const int c = background.pdfs[j].NumComponents();
    GmmStats sub;
    sub.occupancy = stats.occupancy.segment(offsets[j], c);
    sub.first = stats.first.middleRows(offsets[j], c);
    out.pdfs.push_back(MapAdapt(background.pdfs[j], sub, config));
  }
  return out;
}

double ScoreHmmViterbi(const StateModels &adapted, const StateModels &background,
                       const Alignment &alignment, const Matrix &speaker_frames,
                       bool exclude_silence) {
  CheckShapes(adapted, background);
  CheckSync(alignment, speaker_frames);
  double llr = 0.0;
  std::vector<AlignEntry> entries;
  for (int t = 0; t < alignment.NumFrames(); ++t) {
    if (!CountedEntries(alignment, t, background, exclude_silence, &entries)) continue;
    const int pdf = entries.front().pdf;
    llr += adapted.pdfs[pdf].LogLikelihood(speaker_frames.row(t)) -
           background.pdfs[pdf].LogLikelihood(speaker_frames.row(t));
  }
  return llr;
}

double ScoreHmmFb(const StateModels &adapted, const StateModels &background,
                  const Alignment &alignment, const Matrix &speaker_frames, bool exclude_silence) {
  CheckShapes(adapted, background);
  CheckSync(alignment, speaker_frames);
  double llr = 0.0;
  std::vector<AlignEntry> entries;
  Vector spk_dens, bg_dens, num, den;
  for (int t = 0; t < alignment.NumFrames(); ++t) {
    if (!CountedEntries(alignment, t, background, exclude_silence, &entries)) continue;
    num.resize(entries.size());
    den.resize(entries.size());
    int cached_pdf = -1;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const AlignEntry &e = entries[k];
      if (e.pdf != cached_pdf) {
        adapted.pdfs[e.pdf].ComponentLogDensities(speaker_frames.row(t), &spk_dens);
        background.pdfs[e.pdf].ComponentLogDensities(speaker_frames.row(t), &bg_dens);
        cached_pdf = e.pdf;
      }
      const double log_post = std::log(e.post);
      num(k) = log_post + spk_dens(e.mix);
      den(k) = log_post + bg_dens(e.mix);
    }
    llr += LogSumExp(num) - LogSumExp(den);
  }
  return llr;
}

double ScoreHmm(const StateModels &adapted, const StateModels &background,
                const Alignment &alignment, const Matrix &speaker_frames, bool exclude_silence) {
  return alignment.algo == AlignAlgo::kViterbi
             ? ScoreHmmViterbi(adapted, background, alignment, speaker_frames, exclude_silence)
             : ScoreHmmFb(adapted, background, alignment, speaker_frames, exclude_silence);
}

}  // namespace tdsv
