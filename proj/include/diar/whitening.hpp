// diar/whitening.hpp

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

// Embedding post-processing: centering/whitening with length normalization,
// and conversation-dependent PCA.

#ifndef DIAR_WHITENING_HPP_
#define DIAR_WHITENING_HPP_

#include <iosfwd>

#include <Eigen/Dense>

#include "diar/error.hpp"

namespace diar {
namespace backend {

/// Centering + symmetric (inverse square root) whitening transform.
struct Whitener {
  Eigen::VectorXd mean;       // D
  Eigen::MatrixXd transform;  // D x D

  int dim() const { return static_cast<int>(mean.size()); }

  /// Whitened and length-normalized (unit Euclidean norm) vector.
  Eigen::VectorXd apply(const Eigen::VectorXd &v) const;
  /// Row-wise apply.
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd &rows) const;

  void write(std::ostream &os) const;
  static Whitener read(std::istream &is);
};

/// Fits mean and C^{-1/2} on the rows of `embeddings`. With fewer than D+1
/// rows the covariance is shrunk toward a scaled identity before inversion.
Whitener fit_whitener(const Eigen::MatrixXd &embeddings);

struct ConversationPca {
  Eigen::VectorXd center;  // D, segment mean of the conversation
  Eigen::MatrixXd basis;   // k x D, orthonormal rows
  int kept() const { return static_cast<int>(basis.rows()); }

  Eigen::MatrixXd project_rows(const Eigen::MatrixXd &rows) const;
};

/// PCA on one conversation's segment embeddings keeping the smallest k whose
/// cumulative explained variance reaches `variance_fraction` (k >= 1, and k
/// never exceeds the scatter rank). A single segment yields an identity
/// passthrough with `degenerate` set.
ConversationPca fit_conversation_pca(const Eigen::MatrixXd &segments,
                                     double variance_fraction = 0.30,
                                     bool *degenerate = nullptr);

}  // namespace backend
}  // namespace diar

#endif  // DIAR_WHITENING_HPP_
