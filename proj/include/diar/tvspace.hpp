// diar/tvspace.hpp

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

// Total-variability model: supervectors are modeled as m + T x with a
// standard-normal latent x. EM training over Baum-Welch statistics with a
// minimum-divergence step; extraction returns the posterior mean of x.

#ifndef DIAR_TVSPACE_HPP_
#define DIAR_TVSPACE_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diar/gmm.hpp"

namespace diar {
namespace ivector {

struct TvModel {
  DiagGmm ubm;
  Eigen::MatrixXd T;  // (C*F) x R, rows grouped per component

  int rank() const { return static_cast<int>(T.cols()); }
  int supervector_dim() const { return static_cast<int>(T.rows()); }
  /// Rows of T for component c, an F x R block.
  Eigen::Block<const Eigen::MatrixXd> component_block(int c) const {
    return T.block(c * ubm.dim(), 0, ubm.dim(), rank());
  }
  /// Concatenated UBM means (the supervector m).
  Eigen::VectorXd supervector_mean() const;

  void validate() const;

  void write(std::ostream &os) const;  // magic "IVM1"
  static TvModel read(std::istream &is);
  void save(const std::string &path) const;
  static TvModel load(const std::string &path);
};

struct TvTrainOptions {
  int n_iter = 10;
  std::uint64_t seed = 0;
  bool min_divergence = true;
};

/// EM for the factor model over per-utterance statistics. The marginal
/// log-likelihood (up to a T-independent constant) is non-decreasing across
/// iterations; the trace holds one value per iteration.
TvModel train_tv_em(const std::vector<BwStats> &stats, const DiagGmm &ubm, int rank,
                    const TvTrainOptions &opts, std::vector<double> *objective_trace = nullptr);

/// Posterior mean of x given the utterance statistics.
Eigen::VectorXd extract_ivector(const TvModel &tv, const BwStats &stats);

}  // namespace ivector
}  // namespace diar

#endif  // DIAR_TVSPACE_HPP_
