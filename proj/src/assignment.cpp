// src/assignment.cpp

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

#include "diar/assignment.hpp"

#include <limits>

namespace diar {
namespace scoring {

// Lopatin's O(n^3) potentials formulation, padded to square on the negated
// weights (cost minimization). Row/column 0 are dummies.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd &weights) {
  const int n_rows = static_cast<int>(weights.rows());
  const int n_cols = static_cast<int>(weights.cols());
  if (n_rows == 0 || n_cols == 0) return std::vector<int>(n_rows, -1);
  const int dim = std::max(n_rows, n_cols);

  // Pad with zero weight (cost 0) so dummy pairings never beat real ones
  // with positive weight and never force negative-weight pairings.
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(dim + 1, dim + 1);
  for (int i = 0; i < n_rows; ++i)
    for (int j = 0; j < n_cols; ++j) cost(i + 1, j + 1) = -weights(i, j);

  std::vector<double> u(dim + 1, 0.0), v(dim + 1, 0.0);
  std::vector<int> p(dim + 1, 0), way(dim + 1, 0);
  for (int i = 1; i <= dim; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(dim + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(dim + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= dim; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= dim; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> assignment(n_rows, -1);
  for (int j = 1; j <= dim; ++j) {
    const int i = p[j];
    if (i >= 1 && i <= n_rows && j <= n_cols) assignment[i - 1] = j - 1;
  }
  return assignment;
}

}  // namespace scoring
}  // namespace diar
