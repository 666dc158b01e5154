// diar/serialize.hpp

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

// Little-endian binary stream helpers shared by the EMB1/IVM1/PLD1 containers.

#ifndef DIAR_SERIALIZE_HPP_
#define DIAR_SERIALIZE_HPP_

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diar/error.hpp"

namespace diar {

// All containers are explicitly little-endian. The hosts this toolkit targets
// are little-endian; the byte-level loops below keep the format well-defined
// regardless.

inline void write_u16(std::ostream &os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  os.write(reinterpret_cast<const char *>(b), 2);
}

inline void write_u32(std::ostream &os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char *>(b), 4);
}

inline void write_f32(std::ostream &os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(os, bits);
}

inline void write_f64(std::ostream &os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char *>(b), 8);
}

class ByteReader {
 public:
  explicit ByteReader(std::istream &is) : is_(is) {}

  std::uint64_t offset() const { return offset_; }

  void read_bytes(void *dst, std::size_t n, const char *what) {
    is_.read(reinterpret_cast<char *>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n)
      throw FormatError(std::string("truncated input while reading ") + what +
                            ": wanted " + std::to_string(n) + " bytes, got " +
                            std::to_string(is_.gcount()),
                        offset_);
    offset_ += n;
  }

  std::uint16_t read_u16(const char *what) {
    unsigned char b[2];
    read_bytes(b, 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }

  std::uint32_t read_u32(const char *what) {
    unsigned char b[4];
    read_bytes(b, 4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }

  float read_f32(const char *what) {
    const std::uint32_t bits = read_u32(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  double read_f64(const char *what) {
    unsigned char b[8];
    read_bytes(b, 8, what);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  void expect_magic(const char magic[4], const char *container) {
    char got[4];
    read_bytes(got, 4, "magic");
    if (std::memcmp(got, magic, 4) != 0)
      throw BadMagicError(std::string("bad magic for ") + container +
                              " container: expected '" + std::string(magic, 4) +
                              "', got '" + std::string(got, 4) + "'",
                          0);
  }

 private:
  std::istream &is_;
  std::uint64_t offset_ = 0;
};

inline void write_matrix_f64(std::ostream &os, const Eigen::MatrixXd &m) {
  write_u32(os, static_cast<std::uint32_t>(m.rows()));
  write_u32(os, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) write_f64(os, m(r, c));
}

inline Eigen::MatrixXd read_matrix_f64(ByteReader &br, const char *what) {
  const std::uint32_t rows = br.read_u32(what);
  const std::uint32_t cols = br.read_u32(what);
  Eigen::MatrixXd m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = br.read_f64(what);
  return m;
}

inline void write_vector_f64(std::ostream &os, const Eigen::VectorXd &v) {
  write_u32(os, static_cast<std::uint32_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) write_f64(os, v(i));
}

inline Eigen::VectorXd read_vector_f64(ByteReader &br, const char *what) {
  const std::uint32_t n = br.read_u32(what);
  Eigen::VectorXd v(n);
  for (std::uint32_t i = 0; i < n; ++i) v(i) = br.read_f64(what);
  return v;
}

}  // namespace diar

#endif  // DIAR_SERIALIZE_HPP_
