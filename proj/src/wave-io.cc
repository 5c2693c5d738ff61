// src/wave-io.cc

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

#include "tdsv/wave-io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tdsv/base.h"

namespace tdsv {

namespace {

std::uint32_t ReadLe32(const unsigned char *p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}
std::uint16_t ReadLe16(const unsigned char *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
void PutLe32(std::string *out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void PutLe16(std::string *out, std::uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>(v >> 8));
}

}  // namespace

Waveform ReadWav(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::kIo, "cannot open " + path);
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)),
                                       std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw Error(Errc::kNotAWav, path + " is not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const unsigned char *chunk = buf.data() + pos;
    const std::uint32_t size = ReadLe32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > buf.size())
        throw Error(Errc::kNotAWav, path + ": short fmt chunk");
      format = ReadLe16(buf.data() + body);
      channels = ReadLe16(buf.data() + body + 2);
      rate = ReadLe32(buf.data() + body + 4);
      bits = ReadLe16(buf.data() + body + 14);
      // WAVE_FORMAT_EXTENSIBLE carries the real format tag in the sub-format GUID.
      if (format == 0xFFFE && size >= 40 && body + 26 <= buf.size())
        format = ReadLe16(buf.data() + body + 24);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw Error(Errc::kNotAWav, path + ": data chunk before fmt chunk");
      if (format != 1 || bits != 16)
        throw Error(Errc::kUnsupportedEncoding,
                    path + ": only 16-bit PCM is supported (format " + std::to_string(format) +
                        ", " + std::to_string(bits) + " bits)");
      if (channels != 1)
        throw Error(Errc::kUnsupportedChannels,
                    path + ": expected mono, got " + std::to_string(channels) + " channels");
      if (rate != static_cast<std::uint32_t>(kRequiredSampleRate))
        throw Error(Errc::kUnsupportedRate,
                    path + ": expected 16000 Hz, got " + std::to_string(rate));
      const std::size_t avail = std::min<std::size_t>(size, buf.size() - body);
      const std::size_t count = avail / 2;
      if (count == 0) throw Error(Errc::kNotAWav, path + ": no samples");
      Waveform wave;
      wave.sample_rate = static_cast<int>(rate);
      wave.samples.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        const auto s = static_cast<std::int16_t>(ReadLe16(buf.data() + body + 2 * i));
        wave.samples[i] = s / 32768.0;
      }
      return wave;
    }
    pos = body + size + (size & 1);
  }
  throw Error(Errc::kNotAWav, path + ": no data chunk");
}

void WriteWav(const std::string &path, const Waveform &wave) {
  const auto n = static_cast<std::uint32_t>(wave.samples.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  PutLe32(&out, 36 + 2 * n);
  out += "WAVEfmt ";
  PutLe32(&out, 16);
  PutLe16(&out, 1);
  PutLe16(&out, 1);
  PutLe32(&out, static_cast<std::uint32_t>(wave.sample_rate));
  PutLe32(&out, static_cast<std::uint32_t>(wave.sample_rate) * 2);
  PutLe16(&out, 2);
  PutLe16(&out, 16);
  out += "data";
  PutLe32(&out, 2 * n);
  for (double x : wave.samples) {
    const double scaled = std::round(std::clamp(x, -1.0, 1.0) * 32768.0);
    const auto s = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    PutLe16(&out, static_cast<std::uint16_t>(s));
  }
  std::ofstream os(path, std::ios::binary);
  if (!os.write(out.data(), static_cast<std::streamsize>(out.size())))
    throw Error(Errc::kIo, "cannot write " + path);
}

}  // namespace tdsv
