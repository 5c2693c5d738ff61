// src/feature-io.cc

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

#include "tdsv/feature-io.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace tdsv {

namespace {

constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 4;
// Refuse anything above 2^31 floats; real utterances are many orders smaller.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

void PutLe(std::string *out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
std::uint64_t GetLe(const unsigned char *p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::string EncodeFeatures(const Matrix &m) {
  if (m.rows() == 0 || m.cols() == 0)
    throw Error(Errc::kInvalidArgument, "feature matrix is empty");
  if (static_cast<std::uint64_t>(m.rows()) > std::numeric_limits<std::uint32_t>::max() ||
      static_cast<std::uint64_t>(m.cols()) > std::numeric_limits<std::uint32_t>::max() ||
      static_cast<std::uint64_t>(m.rows()) * static_cast<std::uint64_t>(m.cols()) > kMaxElements)
    throw Error(Errc::kDimensionOverflow, "feature matrix too large for the file format");
  std::string out;
  out.reserve(kHeaderBytes + 4 * m.size());
  out += "TDSV";
  PutLe(&out, kFeatureFileVersion, 2);
  PutLe(&out, static_cast<std::uint64_t>(m.rows()), 4);
  PutLe(&out, static_cast<std::uint64_t>(m.cols()), 4);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      if (!std::isfinite(v) || std::abs(v) > std::numeric_limits<float>::max())
        throw Error(Errc::kInvalidArgument, "non-finite or out-of-range feature value at (" +
                                                std::to_string(r) + ", " + std::to_string(c) + ")");
      PutLe(&out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
    }
  }
  return out;
}

Matrix DecodeFeatures(std::string_view bytes, const std::string &what) {
  const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
  if (bytes.size() < 4 || std::memcmp(p, "TDSV", 4) != 0)
    throw Error(Errc::kBadMagic, what + ": not a feature file");
  if (bytes.size() < kHeaderBytes) throw Error(Errc::kTruncatedFile, what + ": short header");
  const auto version = GetLe(p + 4, 2);
  if (version != kFeatureFileVersion)
    throw Error(Errc::kVersionMismatch, what + ": feature file version " + std::to_string(version));
  const std::uint64_t rows = GetLe(p + 6, 4);
  const std::uint64_t cols = GetLe(p + 10, 4);
  if (rows * cols > kMaxElements)
    throw Error(Errc::kDimensionOverflow,
                what + ": " + std::to_string(rows) + "x" + std::to_string(cols) + " is too large");
  if (rows == 0 || cols == 0) throw Error(Errc::kCorruptPayload, what + ": empty matrix");
  const std::uint64_t need = kHeaderBytes + 4 * rows * cols;
  if (bytes.size() < need)
    throw Error(Errc::kTruncatedFile, what + ": header claims " + std::to_string(rows) + "x" +
                                          std::to_string(cols) + " but payload is short");
  Matrix m(rows, cols);
  const unsigned char *q = p + kHeaderBytes;
  for (std::uint64_t r = 0; r < rows; ++r)
    for (std::uint64_t c = 0; c < cols; ++c, q += 4)
      m(r, c) = std::bit_cast<float>(static_cast<std::uint32_t>(GetLe(q, 4)));
  return m;
}

void WriteFeatureFile(const std::string &path, const Matrix &m) {
  const std::string bytes = EncodeFeatures(m);
  std::ofstream os(path, std::ios::binary);
  if (!os.write(bytes.data(), static_cast<std::streamsize>(bytes.size())))
    throw Error(Errc::kIo, "cannot write " + path);
}

Matrix ReadFeatureFile(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::kIo, "cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return DecodeFeatures(bytes, path);
}

void RoundToFloat(Matrix *m) {
  for (Eigen::Index i = 0; i < m->size(); ++i)
    m->data()[i] = static_cast<double>(static_cast<float>(m->data()[i]));
}

}  // namespace tdsv
