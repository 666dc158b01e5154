// diar/gmm.hpp

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

// Diagonal-covariance GMM trained with EM, and the Baum-Welch sufficient
// statistics used by the total-variability model.

#ifndef DIAR_GMM_HPP_
#define DIAR_GMM_HPP_

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "diar/error.hpp"

namespace diar {
namespace ivector {

/// Diagonal GMM with C components over F-dimensional features.
struct DiagGmm {
  Eigen::VectorXd weights;  // C, positive, sums to 1
  Eigen::MatrixXd means;    // C x F
  Eigen::MatrixXd vars;     // C x F, floored

  int num_components() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(means.cols()); }

  void validate() const;

  /// Per-frame posteriors (responsibilities), rows sum to 1.
  /// Also returns the total data log-likelihood if `loglik` is non-null.
  Eigen::MatrixXd posteriors(const Eigen::MatrixXd &features,
                             double *loglik = nullptr) const;

  void write(std::ostream &os) const;
  static DiagGmm read(std::istream &is);
};

struct UbmTrainOptions {
  int n_iter = 20;
  std::uint64_t seed = 0;
  double var_floor_fraction = 1e-4;   // of the global per-dim variance
  std::size_t kmeans_subsample = 100000;
  int kmeans_iters = 10;
};

/// EM training with k-means++ initialization on a fixed-seed subsample.
/// The per-iteration data log-likelihood is non-decreasing (checked to 1e-6
/// relative); the returned trace holds one value per EM iteration.
DiagGmm train_ubm_em(const Eigen::MatrixXd &features, int num_components,
                     const UbmTrainOptions &opts, std::vector<double> *loglik_trace = nullptr);

/// Zeroth- and centered first-order Baum-Welch statistics.
struct BwStats {
  Eigen::VectorXd zeroth;  // C
  Eigen::MatrixXd first;   // C x F, centered on UBM means

  BwStats() = default;
  BwStats(int C, int F) : zeroth(Eigen::VectorXd::Zero(C)), first(Eigen::MatrixXd::Zero(C, F)) {}

  BwStats &operator+=(const BwStats &o);
  double total_occupancy() const { return zeroth.sum(); }
};

BwStats accumulate_bw_stats(const Eigen::MatrixXd &features, const DiagGmm &ubm);

}  // namespace ivector
}  // namespace diar

#endif  // DIAR_GMM_HPP_
