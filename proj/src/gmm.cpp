// src/gmm.cpp

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

#include "diar/gmm.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "diar/rng.hpp"
#include "diar/serialize.hpp"

namespace diar {
namespace ivector {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

void DiagGmm::validate() const {
  const int C = num_components();
  if (C < 1) throw InvalidArgument("DiagGmm: no components");
  if (means.rows() != C || vars.rows() != C || means.cols() != vars.cols())
    throw InvalidArgument("DiagGmm: inconsistent dimensions");
  if ((weights.array() <= 0.0).any())
    throw InvalidArgument("DiagGmm: weights must be positive");
  if (std::fabs(weights.sum() - 1.0) > 1e-8)
    throw InvalidArgument("DiagGmm: weights must sum to 1");
  if ((vars.array() <= 0.0).any())
    throw InvalidArgument("DiagGmm: variances must be positive");
}

Eigen::MatrixXd DiagGmm::posteriors(const Eigen::MatrixXd &features,
                                    double *loglik) const {
  const int C = num_components();
  const Eigen::Index T = features.rows();
  if (features.cols() != dim())
    throw InvalidArgument("DiagGmm::posteriors: feature dim " +
                          std::to_string(features.cols()) + " != model dim " +
                          std::to_string(dim()));

  // log N(x; mu_c, diag(var_c)) = -0.5 * (F log 2pi + sum log var + maha)
  Eigen::VectorXd log_const(C);
  for (int c = 0; c < C; ++c)
    log_const(c) = std::log(weights(c)) -
                   0.5 * (dim() * kLog2Pi + vars.row(c).array().log().sum());
  const Eigen::MatrixXd inv_vars = vars.array().inverse();

  Eigen::MatrixXd logp(T, C);
  for (int c = 0; c < C; ++c) {
    const auto diff = (features.rowwise() - means.row(c)).array();
    logp.col(c) =
        (log_const(c) -
         0.5 * (diff.square().rowwise() * inv_vars.row(c).array()).rowwise().sum())
            .matrix();
  }

  double total = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    const double mx = logp.row(t).maxCoeff();
    const double lse = mx + std::log((logp.row(t).array() - mx).exp().sum());
    logp.row(t) = (logp.row(t).array() - lse).exp();
    total += lse;
  }
  if (loglik) *loglik = total;
  return logp;
}

void DiagGmm::write(std::ostream &os) const {
  write_vector_f64(os, weights);
  write_matrix_f64(os, means);
  write_matrix_f64(os, vars);
}

DiagGmm DiagGmm::read(std::istream &is) {
  ByteReader br(is);
  DiagGmm g;
  g.weights = read_vector_f64(br, "gmm weights");
  g.means = read_matrix_f64(br, "gmm means");
  g.vars = read_matrix_f64(br, "gmm vars");
  g.validate();
  return g;
}

namespace {

// k-means++ seeding followed by Lloyd iterations on a subsample.
Eigen::MatrixXd kmeans_init(const Eigen::MatrixXd &data, int C,
                            const UbmTrainOptions &opts) {
  const Eigen::Index N = data.rows();
  Rng rng(opts.seed);

  std::vector<Eigen::Index> pick;
  if (static_cast<std::size_t>(N) > opts.kmeans_subsample) {
    const auto perm = rng.permutation(static_cast<std::size_t>(N));
    pick.assign(perm.begin(),
                perm.begin() + static_cast<std::ptrdiff_t>(opts.kmeans_subsample));
  } else {
    pick.resize(static_cast<std::size_t>(N));
    for (Eigen::Index i = 0; i < N; ++i) pick[static_cast<std::size_t>(i)] = i;
  }
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(pick.size()), data.cols());
  for (std::size_t i = 0; i < pick.size(); ++i)
    sub.row(static_cast<Eigen::Index>(i)) = data.row(pick[i]);

  const Eigen::Index M = sub.rows();
  Eigen::MatrixXd centers(C, data.cols());
  centers.row(0) = sub.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(M))));
  Eigen::VectorXd d2 = (sub.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < C; ++c) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      for (Eigen::Index i = 0; i < M; ++i) {
        r -= d2(i);
        if (r <= 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(M)));
    }
    centers.row(c) = sub.row(chosen);
    d2 = d2.cwiseMin((sub.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> assign(static_cast<std::size_t>(M), 0);
  for (int iter = 0; iter < opts.kmeans_iters; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < M; ++i) {
      int best = 0;
      double bestd = std::numeric_limits<double>::max();
      for (int c = 0; c < C; ++c) {
        const double d = (sub.row(i) - centers.row(c)).squaredNorm();
        if (d < bestd) {
          bestd = d;
          best = c;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(C, data.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(C);
    for (Eigen::Index i = 0; i < M; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += sub.row(i);
      counts(assign[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (int c = 0; c < C; ++c)
      if (counts(c) > 0.0) centers.row(c) = sums.row(c) / counts(c);
    if (!changed) break;
  }
  return centers;
}

}  // namespace

DiagGmm train_ubm_em(const Eigen::MatrixXd &features, int num_components,
                     const UbmTrainOptions &opts, std::vector<double> *loglik_trace) {
  const Eigen::Index N = features.rows();
  if (num_components < 1) throw InvalidArgument("train_ubm_em: C must be >= 1");
  if (N < 10 * num_components)
    throw DataError("train_ubm_em: need at least 10*C frames, got " +
                    std::to_string(N));

  const Eigen::RowVectorXd global_mean = features.colwise().mean();
  const Eigen::RowVectorXd global_var =
      (features.rowwise() - global_mean).array().square().colwise().mean();
  if ((global_var.array() <= 0.0).all())
    throw DataError("train_ubm_em: degenerate features (zero variance)");
  const Eigen::RowVectorXd var_floor =
      (global_var.array() * opts.var_floor_fraction).max(1e-20);

  DiagGmm gmm;
  gmm.weights = Eigen::VectorXd::Constant(num_components, 1.0 / num_components);
  gmm.means = kmeans_init(features, num_components, opts);
  gmm.vars = global_var.replicate(num_components, 1);

  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < opts.n_iter; ++iter) {
    double loglik = 0.0;
    const Eigen::MatrixXd post = gmm.posteriors(features, &loglik);
    if (loglik_trace) loglik_trace->push_back(loglik);
    if (loglik + 1e-6 * (1.0 + std::fabs(loglik)) < prev)
      throw Error("train_ubm_em: log-likelihood decreased at iteration " +
                  std::to_string(iter));
    prev = loglik;

    const Eigen::VectorXd occ = post.colwise().sum();
    for (int c = 0; c < num_components; ++c) {
      if (occ(c) < 1e-8) continue;  // starved component keeps its parameters
      const Eigen::RowVectorXd mean_c = (post.col(c).transpose() * features) / occ(c);
      const Eigen::RowVectorXd second =
          (post.col(c).transpose() * features.array().square().matrix()) / occ(c);
      gmm.means.row(c) = mean_c;
      gmm.vars.row(c) =
          (second.array() - mean_c.array().square()).max(var_floor.array());
    }
    Eigen::VectorXd w = occ / static_cast<double>(N);
    w = w.array().max(1e-10);
    gmm.weights = w / w.sum();
  }
  gmm.validate();
  return gmm;
}

BwStats &BwStats::operator+=(const BwStats &o) {
  if (zeroth.size() == 0) {
    zeroth = o.zeroth;
    first = o.first;
  } else {
    zeroth += o.zeroth;
    first += o.first;
  }
  return *this;
}

BwStats accumulate_bw_stats(const Eigen::MatrixXd &features, const DiagGmm &ubm) {
  if (features.cols() != ubm.dim())
    throw InvalidArgument("accumulate_bw_stats: feature dim " +
                          std::to_string(features.cols()) + " != UBM dim " +
                          std::to_string(ubm.dim()));
  const Eigen::MatrixXd post = ubm.posteriors(features);
  BwStats stats(ubm.num_components(), ubm.dim());
  stats.zeroth = post.colwise().sum();
  stats.first = post.transpose() * features;
  stats.first -= stats.zeroth.asDiagonal() * ubm.means;  // center on UBM means
  return stats;
}

}  // namespace ivector
}  // namespace diar
