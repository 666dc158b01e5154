// src/resegment.cpp

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

#include "diar/resegment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace diar {
namespace diarize {

namespace {

std::vector<int> renumber_first_appearance(const std::vector<int> &labels) {
  std::vector<int> out(labels.size());
  std::vector<int> remap;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    int found = -1;
    for (std::size_t k = 0; k < remap.size(); ++k)
      if (remap[k] == l) {
        found = static_cast<int>(k);
        break;
      }
    if (found < 0) {
      found = static_cast<int>(remap.size());
      remap.push_back(l);
    }
    out[i] = found;
  }
  return out;
}

}  // namespace

std::vector<int> resegment_hmm(const Eigen::MatrixXd &segment_embeddings,
                               const std::vector<int> &initial_labels,
                               const backend::PldaModel &plda,
                               const ResegmentOptions &opts) {
  const Eigen::Index n = segment_embeddings.rows();
  if (n == 0) throw InvalidArgument("resegment_hmm: no segments");
  if (static_cast<std::size_t>(n) != initial_labels.size())
    throw InvalidArgument("resegment_hmm: label count mismatch");
  if (!(opts.p_loop > 0.0) || opts.p_loop > 1.0)
    throw InvalidArgument("resegment_hmm: p_loop must be in (0, 1]");

  std::vector<int> labels = renumber_first_appearance(initial_labels);
  int K = *std::max_element(labels.begin(), labels.end()) + 1;
  if (K <= 1) return labels;

  // Indistinguishable segments carry no evidence; keep the first pass.
  const Eigen::RowVectorXd first_row = segment_embeddings.row(0);
  if (((segment_embeddings.rowwise() - first_row).cwiseAbs().maxCoeff()) < 1e-12)
    return labels;

  const backend::PldaScorer scorer(plda);

  for (int iter = 0; iter < opts.n_iter; ++iter) {
    // Centroid per cluster in the embedding space.
    Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(K, segment_embeddings.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
    for (Eigen::Index i = 0; i < n; ++i) {
      centroids.row(labels[static_cast<std::size_t>(i)]) += segment_embeddings.row(i);
      counts(labels[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (int k = 0; k < K; ++k)
      if (counts(k) > 0.0) centroids.row(k) /= counts(k);

    // Emission log-likelihoods: kappa-scaled PLDA LLR of segment vs centroid.
    Eigen::MatrixXd emission(n, K);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int k = 0; k < K; ++k)
        emission(i, k) = opts.acoustic_scale *
                         scorer.score(segment_embeddings.row(i).transpose(),
                                      centroids.row(k).transpose());

    // Viterbi with sticky transitions; uniform initial distribution.
    const double log_stay = std::log(opts.p_loop);
    const double log_switch =
        opts.p_loop >= 1.0
            ? -std::numeric_limits<double>::infinity()
            : std::log((1.0 - opts.p_loop) / static_cast<double>(std::max(K - 1, 1)));

    Eigen::MatrixXd delta(n, K);
    Eigen::MatrixXi psi(n, K);
    delta.row(0) = emission.row(0);
    psi.row(0).setZero();
    for (Eigen::Index t = 1; t < n; ++t) {
      for (int k = 0; k < K; ++k) {
        int best_prev = k;
        double best = delta(t - 1, k) + log_stay;
        for (int j = 0; j < K; ++j) {
          if (j == k) continue;
          const double cand = delta(t - 1, j) + log_switch;
          if (cand > best) {
            best = cand;
            best_prev = j;
          }
        }
        delta(t, k) = best + emission(t, k);
        psi(t, k) = best_prev;
      }
    }
    std::vector<int> refined(static_cast<std::size_t>(n));
    Eigen::Index best_k = 0;
    delta.row(n - 1).maxCoeff(&best_k);
    refined[static_cast<std::size_t>(n - 1)] = static_cast<int>(best_k);
    for (Eigen::Index t = n - 1; t > 0; --t)
      refined[static_cast<std::size_t>(t - 1)] =
          psi(t, refined[static_cast<std::size_t>(t)]);
    labels = std::move(refined);

    // Drop empty clusters before any further pass.
    labels = renumber_first_appearance(labels);
    K = *std::max_element(labels.begin(), labels.end()) + 1;
    if (K <= 1) break;
  }
  return labels;
}

}  // namespace diarize
}  // namespace diar
