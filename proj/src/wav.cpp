// src/wav.cpp

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "diar/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "diar/serialize.hpp"

namespace diar {
namespace formats {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

// In-memory cursor over the container; whole files fit comfortably at the
// corpus sizes this toolkit handles.
struct Cursor {
  const unsigned char *p;
  std::size_t n;
  std::size_t pos = 0;

  void need(std::size_t k, const char *what) const {
    if (pos + k > n)
      throw FormatError(std::string("truncated WAV while reading ") + what +
                            ": expected " + std::to_string(k) + " bytes, got " +
                            std::to_string(n - pos),
                        pos);
  }
  void bytes(void *dst, std::size_t k, const char *what) {
    need(k, what);
    std::memcpy(dst, p + pos, k);
    pos += k;
  }
  std::uint16_t u16(const char *what) {
    need(2, what);
    const std::uint16_t v =
        static_cast<std::uint16_t>(p[pos] | (p[pos + 1] << 8));
    pos += 2;
    return v;
  }
  std::uint32_t u32(const char *what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
};

}  // namespace

WavData read_wav_pcm(std::istream &is, bool downmix_mono) {
  std::vector<unsigned char> buf{std::istreambuf_iterator<char>(is),
                                 std::istreambuf_iterator<char>()};
  Cursor c{buf.data(), buf.size()};

  char tag[4];
  c.bytes(tag, 4, "RIFF tag");
  if (std::memcmp(tag, "RIFF", 4) != 0) throw BadMagicError("not a RIFF file", 0);
  c.u32("RIFF size");
  c.bytes(tag, 4, "WAVE tag");
  if (std::memcmp(tag, "WAVE", 4) != 0) throw BadMagicError("not a WAVE file", 8);

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;

  while (c.pos < c.n) {
    c.bytes(tag, 4, "chunk id");
    const std::uint32_t size = c.u32("chunk size");
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("fmt chunk too small", c.pos);
      const std::size_t fmt_at = c.pos;
      c.need(size, "fmt chunk");
      format = static_cast<std::uint16_t>(c.p[fmt_at] | (c.p[fmt_at + 1] << 8));
      channels = static_cast<std::uint16_t>(c.p[fmt_at + 2] | (c.p[fmt_at + 3] << 8));
      sample_rate = 0;
      for (int i = 0; i < 4; ++i)
        sample_rate |= static_cast<std::uint32_t>(c.p[fmt_at + 4 + i]) << (8 * i);
      bits = static_cast<std::uint16_t>(c.p[fmt_at + 14] | (c.p[fmt_at + 15] << 8));
      if (format == kFormatExtensible && size >= 26)
        format = static_cast<std::uint16_t>(c.p[fmt_at + 24] | (c.p[fmt_at + 25] << 8));
      c.pos = fmt_at + size + (size & 1);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("data chunk before fmt chunk", c.pos);
      if (format != kFormatPcm && format != kFormatFloat)
        throw FormatError("unsupported WAV codec (format tag " +
                              std::to_string(format) +
                              "); only PCM16 and IEEE float32 are supported",
                          c.pos);
      if (channels < 1 || channels > 2)
        throw FormatError("unsupported channel count " + std::to_string(channels),
                          c.pos);
      if ((format == kFormatPcm && bits != 16) ||
          (format == kFormatFloat && bits != 32))
        throw FormatError("unsupported sample width " + std::to_string(bits) +
                              " bits for format tag " + std::to_string(format),
                          c.pos);
      if (c.pos + size > c.n)
        throw FormatError("truncated data chunk: expected " + std::to_string(size) +
                              " bytes, got " + std::to_string(c.n - c.pos),
                          c.pos);
      const int bytes_per_sample = bits / 8;
      const std::size_t nsamp = size / bytes_per_sample;
      WavData out;
      out.samples.resize(nsamp);
      const unsigned char *d = c.p + c.pos;
      if (format == kFormatPcm) {
        for (std::size_t i = 0; i < nsamp; ++i) {
          const std::int16_t s =
              static_cast<std::int16_t>(d[2 * i] | (d[2 * i + 1] << 8));
          out.samples[i] = s / 32768.0;
        }
      } else {
        for (std::size_t i = 0; i < nsamp; ++i) {
          std::uint32_t bv = 0;
          for (int k = 0; k < 4; ++k)
            bv |= static_cast<std::uint32_t>(d[4 * i + k]) << (8 * k);
          float f;
          std::memcpy(&f, &bv, 4);
          out.samples[i] = f;
        }
      }
      out.sample_rate = static_cast<int>(sample_rate);
      out.channels = channels;
      if (downmix_mono && channels == 2) {
        std::vector<double> mono(nsamp / 2);
        for (std::size_t i = 0; i < mono.size(); ++i)
          mono[i] = 0.5 * (out.samples[2 * i] + out.samples[2 * i + 1]);
        out.samples = std::move(mono);
        out.channels = 1;
      }
      return out;
    } else {
      const std::size_t skip = size + (size & 1);
      c.need(skip, "chunk body");
      c.pos += skip;
    }
  }
  throw FormatError("no data chunk found", c.pos);
}

WavData read_wav_file(const std::string &path, bool downmix_mono) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open WAV file: " + path);
  return read_wav_pcm(f, downmix_mono);
}

void write_wav_pcm16(std::ostream &os, const std::vector<double> &samples,
                     int sample_rate) {
  if (sample_rate <= 0) throw InvalidArgument("write_wav_pcm16: bad sample rate");
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  write_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  write_u32(os, 16);
  write_u16(os, kFormatPcm);
  write_u16(os, 1);  // mono
  write_u32(os, static_cast<std::uint32_t>(sample_rate));
  write_u32(os, static_cast<std::uint32_t>(sample_rate * 2));  // byte rate
  write_u16(os, 2);   // block align
  write_u16(os, 16);  // bits
  os.write("data", 4);
  write_u32(os, data_bytes);
  for (const double s : samples) {
    const double clamped = std::clamp(s, -1.0, 1.0);
    const std::int16_t v = static_cast<std::int16_t>(std::lrint(clamped * 32767.0));
    write_u16(os, static_cast<std::uint16_t>(v));
  }
}

void write_wav_file(const std::string &path, const std::vector<double> &samples,
                    int sample_rate) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open WAV file for writing: " + path);
  write_wav_pcm16(f, samples, sample_rate);
  if (!f) throw IoError("failed writing WAV file: " + path);
}

}  // namespace formats
}  // namespace diar
