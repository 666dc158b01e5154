// diar/embeddings.hpp

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

// EmbeddingSet and its two on-disk carriers.
//
// EMB1 binary layout (all little-endian):
//   bytes 0..3   magic 'E' 'M' 'B' '1'
//   u32          dim
//   u32          row count
//   per row:     u16 key length, UTF-8 key bytes, dim x float32
//
// TSV alternative: one row per line, key followed by dim tab-separated
// decimals written with 8 significant digits.

#ifndef DIAR_EMBEDDINGS_HPP_
#define DIAR_EMBEDDINGS_HPP_

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diar/error.hpp"

namespace diar {

class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  explicit EmbeddingSet(int dim) : dim_(dim) {
    if (dim <= 0) throw InvalidArgument("EmbeddingSet: dim must be positive");
  }

  int dim() const { return dim_; }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }

  const std::vector<std::string> &keys() const { return keys_; }
  Eigen::Map<const Eigen::VectorXd> row(std::size_t i) const {
    return Eigen::Map<const Eigen::VectorXd>(data_.data() + i * dim_, dim_);
  }
  /// Materialized size() x dim matrix, one embedding per row.
  Eigen::MatrixXd to_matrix() const;

  bool contains(const std::string &key) const { return index_.count(key) > 0; }
  std::size_t index_of(const std::string &key) const;
  Eigen::VectorXd at(const std::string &key) const { return row(index_of(key)); }

  void add(const std::string &key, const Eigen::VectorXd &v);

 private:
  int dim_ = 0;
  std::vector<std::string> keys_;
  std::vector<double> data_;  // row-major, size() * dim
  std::map<std::string, std::size_t> index_;
};

namespace formats {

EmbeddingSet read_emb1(std::istream &is);
EmbeddingSet read_emb1_file(const std::string &path);
void write_emb1(std::ostream &os, const EmbeddingSet &set);
void write_emb1_file(const std::string &path, const EmbeddingSet &set);

EmbeddingSet read_embeddings_tsv(std::istream &is);
void write_embeddings_tsv(std::ostream &os, const EmbeddingSet &set);

/// Dispatch on extension: ".tsv" text, anything else EMB1.
EmbeddingSet read_embeddings_auto(const std::string &path);

}  // namespace formats
}  // namespace diar

#endif  // DIAR_EMBEDDINGS_HPP_
