// diar/plda.hpp

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

// Two-covariance Gaussian PLDA: speaker means are N(mu, B), sessions around
// the speaker mean are N(., W). Scores are same-versus-different-speaker
// log-likelihood ratios in closed form.

#ifndef DIAR_PLDA_HPP_
#define DIAR_PLDA_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diar/error.hpp"
#include "diar/whitening.hpp"

namespace diar {
namespace backend {

struct PldaModel {
  Eigen::VectorXd mu;  // D
  Eigen::MatrixXd B;   // D x D between-speaker covariance, PSD
  Eigen::MatrixXd W;   // D x D within-speaker covariance, PD

  int dim() const { return static_cast<int>(mu.size()); }
  void validate() const;

  /// Congruence transform into a conversation's PCA basis.
  PldaModel project(const ConversationPca &pca) const;

  void write(std::ostream &os) const;
  static PldaModel read(std::istream &is);
};

struct PldaTrainOptions {
  int n_iter = 20;
};

/// Two-covariance EM from labeled embeddings (labels index speakers).
/// The data log-likelihood is non-decreasing across iterations.
PldaModel plda_train_em(const Eigen::MatrixXd &embeddings,
                        const std::vector<int> &speaker_labels,
                        const PldaTrainOptions &opts = {},
                        std::vector<double> *loglik_trace = nullptr);

/// Same-vs-different-speaker LLR; symmetric in its arguments.
double plda_score(const PldaModel &model, const Eigen::VectorXd &v1,
                  const Eigen::VectorXd &v2);

/// Precomputed quadratic form for batch scoring:
///   LLR(v1, v2) = q(v1) + q(v2) + 2 (v1-mu)' P (v2-mu) + constant.
class PldaScorer {
 public:
  explicit PldaScorer(const PldaModel &model);
  double score(const Eigen::VectorXd &v1, const Eigen::VectorXd &v2) const;
  /// Symmetric N x N matrix of pairwise LLRs over the rows.
  Eigen::MatrixXd score_matrix(const Eigen::MatrixXd &rows) const;

 private:
  Eigen::VectorXd mu_;
  Eigen::MatrixXd Q_;  // -(A - S_t^{-1}) / 2
  Eigen::MatrixXd P_;  // -B2 / 2
  double constant_;
};

/// Unsupervised covariance-interpolation adaptation: the PSD part of the
/// excess of the adaptation-data covariance over B + W is split between W
/// and B with the given weights.
PldaModel plda_adapt(const PldaModel &model, const Eigen::MatrixXd &adaptation,
                     double w_within = 0.75, double w_between = 0.25);

/// Backend bundle (whitener + PLDA), magic "PLD1".
struct Backend {
  Whitener whitener;
  PldaModel plda;

  void save(const std::string &path) const;
  static Backend load(const std::string &path);
};

}  // namespace backend
}  // namespace diar

#endif  // DIAR_PLDA_HPP_
