// tdsv/suff-stats.h

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

#ifndef TDSV_SUFF_STATS_H_
#define TDSV_SUFF_STATS_H_

#include "tdsv/base.h"

namespace tdsv {

/// Zero- and first-order statistics over a set of slots.  A slot is a GMM
/// component, or a (state, mixture) pair for HMM alignments.  The first-order
/// term is centered on the slot mean:
///   N_s = sum_t P_t(s),   F_s = sum_t P_t(s) (x_t - mu_s).
struct SuffStats {
  Vector occupancy;  // N, one entry per slot
  Matrix first;      // F, slots x dim

  SuffStats() = default;
  SuffStats(int num_slots, int dim)
      : occupancy(Vector::Zero(num_slots)), first(Matrix::Zero(num_slots, dim)) {}

  int NumSlots() const { return static_cast<int>(occupancy.size()); }
  int Dim() const { return static_cast<int>(first.cols()); }
  double TotalOccupancy() const { return occupancy.sum(); }

  /// Elementwise merge; throws Errc::kLayoutMismatch.
  SuffStats &operator+=(const SuffStats &other);
  SuffStats &operator*=(double scale);
};

inline SuffStats operator+(SuffStats a, const SuffStats &b) { return a += b; }

using GmmStats = SuffStats;
using HmmStats = SuffStats;

}  // namespace tdsv

#endif  // TDSV_SUFF_STATS_H_
