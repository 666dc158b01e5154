// src/embeddings.cpp

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

#include "diar/embeddings.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "diar/serialize.hpp"

namespace diar {

std::size_t EmbeddingSet::index_of(const std::string &key) const {
  const auto it = index_.find(key);
  if (it == index_.end())
    throw DataError("EmbeddingSet: no embedding for key '" + key + "'");
  return it->second;
}

void EmbeddingSet::add(const std::string &key, const Eigen::VectorXd &v) {
  if (dim_ == 0) {
    if (v.size() == 0) throw InvalidArgument("EmbeddingSet: empty vector");
    dim_ = static_cast<int>(v.size());
  }
  if (v.size() != dim_)
    throw DimMismatchError("EmbeddingSet: expected dim " + std::to_string(dim_) +
                               ", got " + std::to_string(v.size()),
                           0);
  if (!v.allFinite())
    throw NonFiniteError("EmbeddingSet: non-finite component in key '" + key + "'", 0);
  if (index_.count(key))
    throw InvalidArgument("EmbeddingSet: duplicate key '" + key + "'");
  const std::size_t r = keys_.size();
  keys_.push_back(key);
  data_.insert(data_.end(), v.data(), v.data() + dim_);
  index_[key] = r;
}

Eigen::MatrixXd EmbeddingSet::to_matrix() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(size()), dim_);
  for (std::size_t r = 0; r < size(); ++r) m.row(static_cast<Eigen::Index>(r)) = row(r);
  return m;
}

namespace formats {

EmbeddingSet read_emb1(std::istream &is) {
  ByteReader br(is);
  br.expect_magic("EMB1", "EMB1");
  const std::uint32_t dim = br.read_u32("dim");
  if (dim == 0 || dim > (1u << 20))
    throw FormatError("EMB1: implausible dim " + std::to_string(dim), br.offset());
  const std::uint32_t count = br.read_u32("row count");
  EmbeddingSet set(static_cast<int>(dim));
  Eigen::VectorXd v(dim);
  for (std::uint32_t r = 0; r < count; ++r) {
    const std::uint16_t keylen = br.read_u16("key length");
    std::string key(keylen, '\0');
    if (keylen) br.read_bytes(key.data(), keylen, "key");
    for (std::uint32_t d = 0; d < dim; ++d) {
      const float f = br.read_f32("component");
      if (!std::isfinite(f))
        throw NonFiniteError("EMB1: non-finite component in row " + std::to_string(r) +
                                 " ('" + key + "')",
                             br.offset());
      v(d) = f;
    }
    set.add(key, v);
  }
  return set;
}

EmbeddingSet read_emb1_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open embeddings file: " + path);
  return read_emb1(f);
}

void write_emb1(std::ostream &os, const EmbeddingSet &set) {
  os.write("EMB1", 4);
  write_u32(os, static_cast<std::uint32_t>(set.dim()));
  write_u32(os, static_cast<std::uint32_t>(set.size()));
  for (std::size_t r = 0; r < set.size(); ++r) {
    const std::string &key = set.keys()[r];
    if (key.size() > 0xffff)
      throw InvalidArgument("EMB1: key longer than 65535 bytes");
    write_u16(os, static_cast<std::uint16_t>(key.size()));
    os.write(key.data(), static_cast<std::streamsize>(key.size()));
    const auto v = set.row(r);
    for (int d = 0; d < set.dim(); ++d) write_f32(os, static_cast<float>(v(d)));
  }
}

void write_emb1_file(const std::string &path, const EmbeddingSet &set) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open embeddings file for writing: " + path);
  write_emb1(f, set);
  if (!f) throw IoError("failed writing embeddings file: " + path);
}

EmbeddingSet read_embeddings_tsv(std::istream &is) {
  EmbeddingSet set;
  std::string line;
  std::size_t lineno = 0;
  int dim = 0;
  std::vector<double> vals;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream iss(line);
    std::string key;
    if (!std::getline(iss, key, '\t'))
      throw ParseError("embeddings TSV: missing key", lineno);
    vals.clear();
    std::string tok;
    while (std::getline(iss, tok, '\t')) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &pos);
      } catch (const std::exception &) {
        throw ParseError("embeddings TSV: bad value '" + tok + "'", lineno);
      }
      if (pos != tok.size())
        throw ParseError("embeddings TSV: bad value '" + tok + "'", lineno);
      if (!std::isfinite(v))
        throw ParseError("embeddings TSV: non-finite value '" + tok + "'", lineno);
      vals.push_back(v);
    }
    if (vals.empty()) throw ParseError("embeddings TSV: row has no values", lineno);
    if (dim == 0) dim = static_cast<int>(vals.size());
    if (static_cast<int>(vals.size()) != dim)
      throw ParseError("embeddings TSV: expected " + std::to_string(dim) +
                           " values, got " + std::to_string(vals.size()),
                       lineno);
    Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(vals.data(), dim);
    try {
      set.add(key, v);
    } catch (const Error &e) {
      throw ParseError(std::string("embeddings TSV: ") + e.what(), lineno);
    }
  }
  return set;
}

void write_embeddings_tsv(std::ostream &os, const EmbeddingSet &set) {
  char buf[64];
  for (std::size_t r = 0; r < set.size(); ++r) {
    os << set.keys()[r];
    const auto v = set.row(r);
    for (int d = 0; d < set.dim(); ++d) {
      std::snprintf(buf, sizeof(buf), "%.8g", v(d));
      os << '\t' << buf;
    }
    os << '\n';
  }
}

EmbeddingSet read_embeddings_auto(const std::string &path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".tsv") {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open embeddings file: " + path);
    return read_embeddings_tsv(f);
  }
  return read_emb1_file(path);
}

}  // namespace formats
}  // namespace diar
