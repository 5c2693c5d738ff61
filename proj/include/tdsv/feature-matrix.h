// tdsv/feature-matrix.h

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

#ifndef TDSV_FEATURE_MATRIX_H_
#define TDSV_FEATURE_MATRIX_H_

#include "tdsv/base.h"

namespace tdsv {

enum class FeatureKind { kMfcc, kFbank, kExternal, kTandem };

const char *FeatureKindName(FeatureKind kind);

/// T x D observations, one frame per row.
struct FeatureMatrix {
  Matrix frames;
  double frame_shift = 0.01;
  FeatureKind kind = FeatureKind::kExternal;

  int NumFrames() const { return static_cast<int>(frames.rows()); }
  int Dim() const { return static_cast<int>(frames.cols()); }
};

}  // namespace tdsv

#endif  // TDSV_FEATURE_MATRIX_H_
