// diar/ahc.hpp

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

// Average-linkage agglomerative clustering over a similarity matrix. The
// full merge trace is computed once; cutting it at a threshold is O(N), so a
// threshold sweep reuses one trace per recording.

#ifndef DIAR_AHC_HPP_
#define DIAR_AHC_HPP_

#include <vector>

#include <Eigen/Dense>

#include "diar/error.hpp"

namespace diar {
namespace diarize {

class AhcTrace {
 public:
  /// Runs the full agglomeration on a symmetric finite similarity matrix.
  /// Ties break toward the lexicographically smallest index pair, indices
  /// being the smallest original member of each cluster.
  explicit AhcTrace(const Eigen::MatrixXd &scores);

  struct Merge {
    int a;         // surviving cluster id (smallest member index)
    int b;         // absorbed cluster id
    double score;  // average linkage at merge time; non-increasing
  };
  const std::vector<Merge> &merges() const { return merges_; }
  std::size_t size() const { return n_; }

  /// Labels after merging while linkage >= threshold; labels are 0..K-1 in
  /// first-appearance order.
  std::vector<int> labels_at(double threshold) const;

 private:
  std::size_t n_ = 0;
  std::vector<Merge> merges_;
};

/// One-shot clustering: merge while the best pair's linkage >= threshold.
std::vector<int> ahc_cluster(const Eigen::MatrixXd &scores, double threshold);

}  // namespace diarize
}  // namespace diar

#endif  // DIAR_AHC_HPP_
