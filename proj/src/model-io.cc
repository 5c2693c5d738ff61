// src/model-io.cc

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

#include "tdsv/model-io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tdsv {

namespace {

enum class Kind : std::uint32_t { kGmm = 1, kPhoneHmmSet = 2, kStateModels = 3, kTotalVariability = 4, kIVector = 5 };

static_assert(sizeof(double) == 8);
static_assert(std::endian::native == std::endian::little, "model files are written in host byte order");

class Writer {
 public:
  void U16(std::uint16_t v) { Raw(&v, 2); }
  void U32(std::uint32_t v) { Raw(&v, 4); }
  void U64(std::uint64_t v) { Raw(&v, 8); }
  void F64(double v) { Raw(&v, 8); }
  void Str(const std::string &s) {
    U32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void Mat(const Matrix &m) {
    U32(static_cast<std::uint32_t>(m.rows()));
    U32(static_cast<std::uint32_t>(m.cols()));
    Raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
  void Vec(const Vector &v) {
    U32(static_cast<std::uint32_t>(v.size()));
    Raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  std::string &buf() { return buf_; }

 private:
  void Raw(const void *p, std::size_t n) { buf_.append(static_cast<const char *>(p), n); }
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}
  std::uint16_t U16() { return Get<std::uint16_t>(); }
  std::uint32_t U32() { return Get<std::uint32_t>(); }
  std::uint64_t U64() { return Get<std::uint64_t>(); }
  double F64() { return Get<double>(); }
  std::string Str() {
    const std::uint32_t n = U32();
    Need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  Matrix Mat() {
    const std::uint32_t r = U32(), c = U32();
    const std::size_t bytes = sizeof(double) * static_cast<std::size_t>(r) * c;
    Need(bytes);
    Matrix m(r, c);
    if (bytes) std::memcpy(m.data(), data_.data() + pos_, bytes);
    pos_ += bytes;
    return m;
  }
  Vector Vec() {
    const std::uint32_t n = U32();
    Need(sizeof(double) * static_cast<std::size_t>(n));
    Vector v(n);
    if (n) std::memcpy(v.data(), data_.data() + pos_, sizeof(double) * n);
    pos_ += sizeof(double) * n;
    return v;
  }
  bool AtEnd() const { return pos_ == data_.size(); }
  [[noreturn]] void Fail(const std::string &msg) const {
    throw Error(Errc::kCorruptPayload, what_ + ": " + msg);
  }

 private:
  template <typename T>
  T Get() {
    Need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void Need(std::size_t n) const {
    if (data_.size() - pos_ < n) Fail("unexpected end of data");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
  std::string what_;
};

void WriteGmm(Writer *w, const Gmm &g) {
  w->Vec(g.weights());
  w->Mat(g.means());
  w->Mat(g.vars());
}

Gmm ReadGmm(Reader *r) {
  Vector weights = r->Vec();
  Matrix means = r->Mat();
  Matrix vars = r->Mat();
  return Gmm(std::move(weights), std::move(means), std::move(vars));
}

struct PayloadWriter {
  Writer *w;
  Kind operator()(const Gmm &g) const {
    WriteGmm(w, g);
    return Kind::kGmm;
  }
  Kind operator()(const PhoneHmmSet &h) const {
    w->U32(static_cast<std::uint32_t>(h.phones.size()));
    for (const auto &p : h.phones) w->Str(p);
    w->Str(h.silence_phone);
    w->U32(static_cast<std::uint32_t>(h.num_mix));
    w->U32(static_cast<std::uint32_t>(h.num_sil_mix));
    w->U32(static_cast<std::uint32_t>(h.pdfs.size()));
    for (std::size_t i = 0; i < h.pdfs.size(); ++i) {
      WriteGmm(w, h.pdfs[i]);
      w->F64(h.self_loop[i]);
    }
    return Kind::kPhoneHmmSet;
  }
  Kind operator()(const StateModels &m) const {
    w->U32(static_cast<std::uint32_t>(m.pdfs.size()));
    for (std::size_t i = 0; i < m.pdfs.size(); ++i) {
      WriteGmm(w, m.pdfs[i]);
      w->U32(m.is_silence[i] ? 1 : 0);
    }
    return Kind::kStateModels;
  }
  Kind operator()(const TotalVariability &tv) const {
    w->Mat(tv.t());
    w->Mat(tv.means());
    w->Mat(tv.vars());
    return Kind::kTotalVariability;
  }
  Kind operator()(const IVector &iv) const {
    w->Vec(iv.w);
    w->Mat(iv.precision);
    return Kind::kIVector;
  }
};

Model ReadPayload(Kind kind, Reader *r) {
  switch (kind) {
    case Kind::kGmm:
      return ReadGmm(r);
    case Kind::kPhoneHmmSet: {
      PhoneHmmSet h;
      const std::uint32_t n = r->U32();
      for (std::uint32_t i = 0; i < n; ++i) h.phones.push_back(r->Str());
      h.silence_phone = r->Str();
      h.num_mix = static_cast<int>(r->U32());
      h.num_sil_mix = static_cast<int>(r->U32());
      const std::uint32_t pdfs = r->U32();
      for (std::uint32_t i = 0; i < pdfs; ++i) {
        h.pdfs.push_back(ReadGmm(r));
        h.self_loop.push_back(r->F64());
      }
      h.Validate();
      return h;
    }
    case Kind::kStateModels: {
      StateModels m;
      const std::uint32_t n = r->U32();
      for (std::uint32_t i = 0; i < n; ++i) {
        m.pdfs.push_back(ReadGmm(r));
        m.is_silence.push_back(r->U32() != 0);
      }
      return m;
    }
    case Kind::kTotalVariability: {
      Matrix t = r->Mat();
      Matrix means = r->Mat();
      Matrix vars = r->Mat();
      return TotalVariability(std::move(t), std::move(means), std::move(vars));
    }
    case Kind::kIVector: {
      IVector iv;
      iv.w = r->Vec();
      iv.precision = r->Mat();
      return iv;
    }
  }
  r->Fail("unknown model kind " + std::to_string(static_cast<std::uint32_t>(kind)));
}

std::uint64_t Checksum(std::string_view bytes) {
  Hasher h;
  h.AddBytes(bytes.data(), bytes.size());
  return h.value();
}

}  // namespace

std::string EncodeModels(const std::vector<NamedModel> &models) {
  std::vector<std::pair<Kind, std::string>> payloads;
  for (const auto &nm : models) {
    Writer w;
    const Kind kind = std::visit(PayloadWriter{&w}, nm.model);
    payloads.emplace_back(kind, std::move(w.buf()));
  }
  // Header size is needed for the offsets, so build the table twice.
  auto header = [&](std::uint64_t base) {
    Writer w;
    w.buf().append("TDSM", 4);
    w.U16(kModelFileVersion);
    w.U32(static_cast<std::uint32_t>(models.size()));
    std::uint64_t offset = base;
    for (std::size_t i = 0; i < models.size(); ++i) {
      w.U32(static_cast<std::uint32_t>(payloads[i].first));
      w.Str(models[i].name);
      w.U64(offset);
      w.U64(payloads[i].second.size());
      w.U64(Checksum(payloads[i].second));
      offset += payloads[i].second.size();
    }
    return std::move(w.buf());
  };
  std::string out = header(0);
  out = header(out.size());
  for (const auto &p : payloads) out += p.second;
  return out;
}

std::vector<NamedModel> DecodeModels(std::string_view bytes, const std::string &what) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != "TDSM") throw Error(Errc::kBadMagic, what + ": not a model file");
  Reader r(bytes.substr(4), what);
  const std::uint16_t version = r.U16();
  if (version != kModelFileVersion)
    throw Error(Errc::kVersionMismatch, what + ": format version " + std::to_string(version) +
                                            ", this build reads version " + std::to_string(kModelFileVersion));
  const std::uint32_t count = r.U32();
  struct Entry {
    Kind kind;
    std::string name;
    std::uint64_t offset, size, checksum;
  };
  std::vector<Entry> table;
  for (std::uint32_t i = 0; i < count; ++i) {
    Entry e;
    e.kind = static_cast<Kind>(r.U32());
    e.name = r.Str();
    e.offset = r.U64();
    e.size = r.U64();
    e.checksum = r.U64();
    table.push_back(std::move(e));
  }
  std::vector<NamedModel> out;
  for (const auto &e : table) {
    if (e.offset > bytes.size() || e.size > bytes.size() - e.offset)
      throw Error(Errc::kCorruptPayload, what + ": section '" + e.name + "' lies outside the file");
    const std::string_view payload = bytes.substr(e.offset, e.size);
    if (Checksum(payload) != e.checksum)
      throw Error(Errc::kCorruptPayload, what + ": checksum mismatch in section '" + e.name + "'");
    Reader pr(payload, what + ":" + e.name);
    Model m = [&]() -> Model {
      try {
        return ReadPayload(e.kind, &pr);
      } catch (const Error &err) {
        if (err.code() == Errc::kCorruptPayload) throw;
        throw Error(Errc::kCorruptPayload, what + ": section '" + e.name + "': " + err.what());
      }
    }();
    if (!pr.AtEnd()) pr.Fail("trailing bytes in section");
    out.push_back({e.name, std::move(m)});
  }
  return out;
}

void SaveModels(const std::string &path, const std::vector<NamedModel> &models) {
  const std::string bytes = EncodeModels(models);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::kIo, "cannot open " + path + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error(Errc::kIo, "write failed: " + path);
}

std::vector<NamedModel> LoadModels(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  const std::string bytes = ss.str();
  return DecodeModels(bytes, path);
}

void SaveModel(const std::string &path, const Model &model) { SaveModels(path, {NamedModel{"model", model}}); }

Model LoadModel(const std::string &path) {
  auto models = LoadModels(path);
  if (models.size() != 1)
    throw Error(Errc::kCorruptPayload, path + ": expected one model, found " + std::to_string(models.size()));
  return std::move(models.front().model);
}

}  // namespace tdsv
