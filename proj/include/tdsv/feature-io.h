// tdsv/feature-io.h

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

#ifndef TDSV_FEATURE_IO_H_
#define TDSV_FEATURE_IO_H_

#include <string>

#include "tdsv/base.h"

namespace tdsv {

/// Feature file layout (all little-endian):
///   "TDSV" | u16 version | u32 rows | u32 cols | rows*cols f32, row-major.
/// Values are stored at single precision, so a round trip is exact for any
/// matrix whose entries are representable as float.
inline constexpr std::uint16_t kFeatureFileVersion = 1;

void WriteFeatureFile(const std::string &path, const Matrix &m);
Matrix ReadFeatureFile(const std::string &path);

/// In-memory encode/decode; the file functions are thin wrappers.
std::string EncodeFeatures(const Matrix &m);
Matrix DecodeFeatures(std::string_view bytes, const std::string &what = "<buffer>");

/// Rounds every entry to the nearest float, which is what a write/read
/// round trip does.  Producers call this so in-memory and on-disk features
/// agree bit for bit.
void RoundToFloat(Matrix *m);

}  // namespace tdsv

#endif  // TDSV_FEATURE_IO_H_
