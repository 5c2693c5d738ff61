// tdsv/model-io.h

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

#ifndef TDSV_MODEL_IO_H_
#define TDSV_MODEL_IO_H_

#include <string>
#include <variant>
#include <vector>

#include "tdsv/hmm-speaker.h"
#include "tdsv/ivector.h"

namespace tdsv {

using Model = std::variant<Gmm, PhoneHmmSet, StateModels, TotalVariability, IVector>;

struct NamedModel {
  std::string name;
  Model model;
};

/// Container layout (little-endian):
///   "TDSM" | u16 version | u32 section count
///   per section: u32 kind | string name | u64 offset | u64 size | u64 checksum
///   payloads, all reals as f64
/// Strings are u32 length + bytes.  The checksum is FNV-1a of the payload.
inline constexpr std::uint16_t kModelFileVersion = 1;

std::string EncodeModels(const std::vector<NamedModel> &models);
/// Throws kBadMagic, kVersionMismatch, kCorruptPayload.
std::vector<NamedModel> DecodeModels(std::string_view bytes, const std::string &what = "<buffer>");

void SaveModels(const std::string &path, const std::vector<NamedModel> &models);
std::vector<NamedModel> LoadModels(const std::string &path);

void SaveModel(const std::string &path, const Model &model);
/// Loads a single-model file.
Model LoadModel(const std::string &path);

/// Convenience: load a single model of the requested type; throws
/// kCorruptPayload when the file holds something else.
template <typename T>
T LoadModelAs(const std::string &path) {
  Model m = LoadModel(path);
  if (auto *p = std::get_if<T>(&m)) return std::move(*p);
  throw Error(Errc::kCorruptPayload, path + ": unexpected model type");
}

}  // namespace tdsv

#endif  // TDSV_MODEL_IO_H_
