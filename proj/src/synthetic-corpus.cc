// src/synthetic-corpus.cc

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

#include "tdsv/synthetic-corpus.h"

#include <cstdio>
#include <set>

#include "tdsv/feature-io.h"
#include "tdsv/phone-hmm.h"
#include "tdsv/rng.h"

namespace tdsv {

void SyntheticSpec::Validate() const {
  auto require = [](bool ok, const char *what) {
    if (!ok) throw Error(Errc::kInvalidSpec, what);
  };
  require(num_speakers >= 1, "num_speakers must be >= 1");
  require(num_phrases >= 1, "num_phrases must be >= 1");
  require(phones_per_phrase >= 1, "phones_per_phrase must be >= 1");
  require(utterances_per_cell >= 1, "utterances_per_cell must be >= 1");
  require(num_phones >= 1, "num_phones must be >= 1");
  require(dim >= 1, "dim must be >= 1");
  require(background_speakers >= 0, "background_speakers must be >= 0");
  require(min_state_frames >= 3 && max_state_frames >= min_state_frames,
          "state durations must satisfy 3 <= min <= max");
  require(min_silence_frames >= 3 && max_silence_frames >= min_silence_frames,
          "silence durations must satisfy 3 <= min <= max");
  require(speaker_shift >= 0 && speaker_state_shift >= 0 && noise_scale > 0 && phone_scale >= 0,
          "scales must be non-negative (noise positive)");
}

namespace {

std::uint64_t Tag(const std::string &s) {
  Hasher h;
  h.Add(s);
  return h.value();
}

std::string Id(const char *fmt, int a) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), fmt, a);
  return buf;
}

Matrix NormalMatrix(Rng *rng, int rows, int cols, double scale) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng->Normal();
  return m;
}

}  // namespace

Corpus GenerateSyntheticCorpus(const SyntheticSpec &spec) {
  spec.Validate();
  const int num_states = kStatesPerPhone * (spec.num_phones + 1);  // silence last
  const int sil = spec.num_phones;

  Corpus corpus;
  std::vector<std::string> phone_names;
  for (int p = 0; p < spec.num_phones; ++p) phone_names.push_back(Id("ph%02d", p));

  Rng mean_rng(Rng::Derive(spec.seed, Tag("state-means")));
  const Matrix state_means = NormalMatrix(&mean_rng, num_states, spec.dim, spec.phone_scale);

  // Phrases: distinct phone sequences without immediate repeats.
  std::vector<std::vector<int>> phrases;
  {
    Rng rng(Rng::Derive(spec.seed, Tag("phrases")));
    std::set<std::vector<int>> seen;
    int attempts = 0;
    while (static_cast<int>(phrases.size()) < spec.num_phrases) {
      std::vector<int> seq;
      if (spec.phones_per_phrase <= spec.num_phones) {
        // Partial Fisher-Yates: distinct phones in random order.
        std::vector<int> pool(spec.num_phones);
        for (int i = 0; i < spec.num_phones; ++i) pool[i] = i;
        for (int i = 0; i < spec.phones_per_phrase; ++i) {
          std::swap(pool[i], pool[rng.UniformInt(i, spec.num_phones - 1)]);
          seq.push_back(pool[i]);
        }
      } else {
        for (int i = 0; i < spec.phones_per_phrase; ++i) {
          int p = rng.UniformInt(0, spec.num_phones - 1);
          if (!seq.empty() && spec.num_phones > 1)
            while (p == seq.back()) p = rng.UniformInt(0, spec.num_phones - 1);
          seq.push_back(p);
        }
      }
      if (seen.insert(seq).second || ++attempts > 1000) phrases.push_back(seq);
    }
    // The inventory lists only phones some phrase uses.
    std::set<int> used;
    for (const auto &seq : phrases) used.insert(seq.begin(), seq.end());
    for (int p : used) corpus.phones.push_back(phone_names[p]);
    for (int k = 0; k < spec.num_phrases; ++k) {
      std::vector<std::string> transcript;
      for (int p : phrases[k]) transcript.push_back(phone_names[p]);
      corpus.phrase_transcripts[Id("p%02d", k)] = transcript;
    }
  }

  auto make_speaker = [&](const std::string &spk, bool evaluated) {
    Rng srng(Rng::Derive(spec.seed, Tag("speaker/" + spk)));
    const Matrix global = NormalMatrix(&srng, 1, spec.dim, spec.speaker_shift);
    Matrix offsets = NormalMatrix(&srng, num_states, spec.dim, spec.speaker_state_shift);
    for (int s = 0; s < num_states; ++s) offsets.row(s) += global.row(0);
    offsets.middleRows(kStatesPerPhone * sil, kStatesPerPhone).setZero();

    for (int k = 0; k < spec.num_phrases; ++k) {
      const std::string phrase = Id("p%02d", k);
      const std::string model = spk + "-" + phrase;
      const int n_enroll = spec.utterances_per_cell == 1 ? 1 : std::min(3, spec.utterances_per_cell - 1);
      for (int u = 0; u < spec.utterances_per_cell; ++u) {
        Utterance utt;
        utt.utt_id = model + Id("-u%02d", u);
        utt.speaker_id = spk;
        utt.phrase_id = phrase;
        utt.transcript = corpus.phrase_transcripts[phrase];
        Rng urng(Rng::Derive(spec.seed, Tag("utterance/" + utt.utt_id)));

        std::vector<int> states;
        auto add_phone = [&](int phone, int lo, int hi) {
          for (int s = 0; s < kStatesPerPhone; ++s) {
            const int dur = urng.UniformInt(lo, hi);
            states.insert(states.end(), dur, kStatesPerPhone * phone + s);
          }
        };
        add_phone(sil, spec.min_silence_frames, spec.max_silence_frames);
        for (int p : phrases[k]) add_phone(p, spec.min_state_frames, spec.max_state_frames);
        add_phone(sil, spec.min_silence_frames, spec.max_silence_frames);

        Matrix frames(static_cast<Eigen::Index>(states.size()), spec.dim);
        for (std::size_t t = 0; t < states.size(); ++t)
          for (int d = 0; d < spec.dim; ++d)
            frames(t, d) = state_means(states[t], d) + offsets(states[t], d) + spec.noise_scale * urng.Normal();
        RoundToFloat(&frames);
        utt.features.frames = std::move(frames);
        utt.features.kind = FeatureKind::kExternal;
        if (evaluated && u < n_enroll) corpus.enrollment[model].push_back(utt.utt_id);
        corpus.utterances.push_back(std::move(utt));
      }
    }
  };

  std::vector<std::string> speakers;
  for (int s = 0; s < spec.num_speakers; ++s) {
    speakers.push_back(Id("s%03d", s));
    make_speaker(speakers.back(), true);
  }
  for (int b = 0; b < spec.background_speakers; ++b) make_speaker(Id("b%03d", b), false);

  // Trials: every model against every test utterance of the evaluated speakers.
  std::set<std::string> enrolled;
  for (const auto &[model, utts] : corpus.enrollment) enrolled.insert(utts.begin(), utts.end());
  for (const auto &[model, utts] : corpus.enrollment) {
    const Utterance *first = corpus.Find(utts.front());
    for (const auto &utt : corpus.utterances) {
      if (utt.speaker_id[0] != 's' || enrolled.count(utt.utt_id)) continue;
      const bool same_spk = utt.speaker_id == first->speaker_id;
      const bool same_phrase = utt.phrase_id == first->phrase_id;
      const TrialType type = same_spk ? (same_phrase ? TrialType::kTC : TrialType::kTW)
                                      : (same_phrase ? TrialType::kIC : TrialType::kIW);
      corpus.trials.push_back(MakeTrial(model, utt.utt_id, type));
    }
  }
  return corpus;
}

}  // namespace tdsv
