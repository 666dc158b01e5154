// diar/resegment.hpp

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

// Segment-level HMM smoothing of first-pass cluster labels. Cluster centroid
// models score each segment through the PLDA LLR, scaled by an acoustic
// factor; Viterbi decoding with a sticky self-transition suppresses spurious
// speaker changes.

#ifndef DIAR_RESEGMENT_HPP_
#define DIAR_RESEGMENT_HPP_

#include <vector>

#include <Eigen/Dense>

#include "diar/plda.hpp"

namespace diar {
namespace diarize {

struct ResegmentOptions {
  double acoustic_scale = 0.3;  // kappa, scales PLDA emission LLRs
  double p_loop = 0.9;          // self-transition probability
  int n_iter = 1;               // centroid re-estimation passes
};

/// Refines per-segment labels; returns labels renumbered 0..K-1 in
/// first-appearance order with empty clusters removed. With one input
/// cluster (or indistinguishable segments) the input labels come back
/// unchanged.
std::vector<int> resegment_hmm(const Eigen::MatrixXd &segment_embeddings,
                               const std::vector<int> &initial_labels,
                               const backend::PldaModel &plda,
                               const ResegmentOptions &opts = {});

}  // namespace diarize
}  // namespace diar

#endif  // DIAR_RESEGMENT_HPP_
