// src/whitening.cpp

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

#include "diar/whitening.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "diar/serialize.hpp"

namespace diar {
namespace backend {

Eigen::VectorXd Whitener::apply(const Eigen::VectorXd &v) const {
  if (v.size() != mean.size())
    throw InvalidArgument("Whitener::apply: dim mismatch");
  Eigen::VectorXd w = transform * (v - mean);
  const double n = w.norm();
  if (n <= 0.0) throw DataError("Whitener::apply: zero vector after whitening");
  return w / n;
}

Eigen::MatrixXd Whitener::apply_rows(const Eigen::MatrixXd &rows) const {
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    out.row(i) = apply(rows.row(i).transpose()).transpose();
  return out;
}

void Whitener::write(std::ostream &os) const {
  write_vector_f64(os, mean);
  write_matrix_f64(os, transform);
}

Whitener Whitener::read(std::istream &is) {
  ByteReader br(is);
  Whitener w;
  w.mean = read_vector_f64(br, "whitener mean");
  w.transform = read_matrix_f64(br, "whitener transform");
  if (w.transform.rows() != w.mean.size() || w.transform.cols() != w.mean.size())
    throw DimMismatchError("whitener transform dims inconsistent with mean", br.offset());
  return w;
}

Whitener fit_whitener(const Eigen::MatrixXd &embeddings) {
  const Eigen::Index n = embeddings.rows();
  const Eigen::Index d = embeddings.cols();
  if (d < 1) throw InvalidArgument("fit_whitener: zero-dimensional embeddings");
  if (n < 2) throw DataError("fit_whitener: need at least 2 vectors");

  Whitener w;
  w.mean = embeddings.colwise().mean();
  const Eigen::MatrixXd centered = embeddings.rowwise() - w.mean.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  if (n < d + 1) {
    // Rank-deficient sample covariance: shrink toward the scaled identity.
    const double tr = cov.trace() / static_cast<double>(d);
    cov = 0.9 * cov + 0.1 * tr * Eigen::MatrixXd::Identity(d, d);
  }

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error("fit_whitener: eigendecomposition failed");
  const double floor = 1e-12 * std::max(eig.eigenvalues().maxCoeff(), 1e-300);
  Eigen::VectorXd inv_sqrt(d);
  for (Eigen::Index i = 0; i < d; ++i)
    inv_sqrt(i) = 1.0 / std::sqrt(std::max(eig.eigenvalues()(i), floor));
  // Symmetric whitening U diag(l^-1/2) U^T: identity covariance maps to the
  // identity transform.
  w.transform = eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
  return w;
}

Eigen::MatrixXd ConversationPca::project_rows(const Eigen::MatrixXd &rows) const {
  return (rows.rowwise() - center.transpose()) * basis.transpose();
}

ConversationPca fit_conversation_pca(const Eigen::MatrixXd &segments,
                                     double variance_fraction, bool *degenerate) {
  const Eigen::Index n = segments.rows();
  const Eigen::Index d = segments.cols();
  if (n < 1) throw InvalidArgument("fit_conversation_pca: no segments");
  if (!(variance_fraction > 0.0) || variance_fraction > 1.0)
    throw InvalidArgument("fit_conversation_pca: fraction must be in (0, 1]");
  if (degenerate) *degenerate = false;

  ConversationPca pca;
  pca.center = segments.colwise().mean();
  if (n == 1) {
    pca.center.setZero();
    pca.basis = Eigen::MatrixXd::Identity(d, d);
    if (degenerate) *degenerate = true;
    return pca;
  }

  const Eigen::MatrixXd centered = segments.rowwise() - pca.center.transpose();
  const Eigen::MatrixXd scatter = (centered.transpose() * centered) / static_cast<double>(n - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
  if (eig.info() != Eigen::Success)
    throw Error("fit_conversation_pca: eigendecomposition failed");

  // Eigenvalues ascending; walk from the largest down.
  const Eigen::VectorXd evals = eig.eigenvalues().cwiseMax(0.0);
  const double total = evals.sum();
  const double rank_tol = 1e-12 * std::max(evals.maxCoeff(), 1e-300);
  int rank = 0;
  for (Eigen::Index i = 0; i < d; ++i)
    if (evals(i) > rank_tol) ++rank;
  rank = std::max(rank, 1);

  int k = 0;
  double cum = 0.0;
  for (Eigen::Index i = d - 1; i >= 0 && k < rank; --i) {
    ++k;
    cum += evals(i);
    if (total > 0.0 && cum >= variance_fraction * total - 1e-12) break;
  }
  k = std::max(k, 1);

  pca.basis.resize(k, d);
  for (int j = 0; j < k; ++j) pca.basis.row(j) = eig.eigenvectors().col(d - 1 - j).transpose();
  return pca;
}

}  // namespace backend
}  // namespace diar
