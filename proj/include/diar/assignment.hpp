// diar/assignment.hpp

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

#ifndef DIAR_ASSIGNMENT_HPP_
#define DIAR_ASSIGNMENT_HPP_

#include <vector>

#include <Eigen/Dense>

namespace diar {
namespace scoring {

/// Maximum-weight one-to-one assignment on a rectangular weight matrix
/// (Kuhn-Munkres on the negated costs). Returns, per row, the assigned
/// column or -1. Unassigned rows/columns occur when the matrix is not square.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd &weights);

}  // namespace scoring
}  // namespace diar

#endif  // DIAR_ASSIGNMENT_HPP_
