// src/ahc.cpp

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

#include "diar/ahc.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace diar {
namespace diarize {

AhcTrace::AhcTrace(const Eigen::MatrixXd &scores) {
  const Eigen::Index n = scores.rows();
  if (n == 0) throw InvalidArgument("AhcTrace: empty score matrix");
  if (scores.cols() != n) throw InvalidArgument("AhcTrace: matrix must be square");
  if (!scores.allFinite()) throw InvalidArgument("AhcTrace: non-finite scores");
  if ((scores - scores.transpose()).cwiseAbs().maxCoeff() >
      1e-9 * (1.0 + scores.cwiseAbs().maxCoeff()))
    throw InvalidArgument("AhcTrace: matrix must be symmetric");

  n_ = static_cast<std::size_t>(n);
  merges_.reserve(n_ - 1);

  Eigen::MatrixXd linkage = scores;
  std::vector<int> sizes(n_, 1);
  std::vector<bool> active(n_, true);

  for (std::size_t step = 0; step + 1 < n_; ++step) {
    int best_i = -1, best_j = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        if (linkage(i, j) > best) {
          best = linkage(i, j);
          best_i = static_cast<int>(i);
          best_j = static_cast<int>(j);
        }
        // equal scores keep the earlier (i, j): loop order is the tie-break
      }
    }
    // Lance-Williams update for average linkage; cluster best_i survives.
    const double si = sizes[static_cast<std::size_t>(best_i)];
    const double sj = sizes[static_cast<std::size_t>(best_j)];
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!active[static_cast<std::size_t>(k)] || k == best_i || k == best_j) continue;
      const double merged =
          (si * linkage(best_i, k) + sj * linkage(best_j, k)) / (si + sj);
      linkage(best_i, k) = merged;
      linkage(k, best_i) = merged;
    }
    active[static_cast<std::size_t>(best_j)] = false;
    sizes[static_cast<std::size_t>(best_i)] += sizes[static_cast<std::size_t>(best_j)];
    merges_.push_back({best_i, best_j, best});
  }
}

std::vector<int> AhcTrace::labels_at(double threshold) const {
  std::vector<int> parent(n_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  // Merge scores are non-increasing (UPGMA reducibility), so the prefix with
  // score >= threshold is exactly the set of merges the stopping rule takes.
  for (const auto &m : merges_) {
    if (m.score < threshold) break;
    parent[static_cast<std::size_t>(find(m.b))] = find(m.a);
  }
  std::vector<int> labels(n_);
  std::vector<int> first_seen(n_, -1);
  int next = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    const int root = find(static_cast<int>(i));
    if (first_seen[static_cast<std::size_t>(root)] < 0)
      first_seen[static_cast<std::size_t>(root)] = next++;
    labels[i] = first_seen[static_cast<std::size_t>(root)];
  }
  return labels;
}

std::vector<int> ahc_cluster(const Eigen::MatrixXd &scores, double threshold) {
  return AhcTrace(scores).labels_at(threshold);
}

}  // namespace diarize
}  // namespace diar
