// diar/adi.hpp

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

// Acoustic domain identification: per-domain centroids over recording-level
// embeddings, cosine nearest-centroid prediction, classification metrics, and
// the repeated-random-split evaluation protocol.

#ifndef DIAR_ADI_HPP_
#define DIAR_ADI_HPP_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diar/core.hpp"
#include "diar/embeddings.hpp"

namespace diar {
namespace adi {

/// Nearest-centroid model. Domains are kept in registry order, which is also
/// the deterministic tie-break order for predictions.
struct CentroidModel {
  int dim = 0;
  std::vector<std::string> domains;   // registry order
  Eigen::MatrixXd centroids;          // domains.size() x dim
  bool normalize_inputs = true;
  std::vector<std::string> warnings;  // degenerate (zero) centroids etc.

  std::size_t domain_index(const std::string &name) const;

  void save(const std::string &path) const;  // magic "ADI1"
  static CentroidModel load(const std::string &path);
};

/// Centroid = mean of the (optionally length-normalized) domain vectors.
CentroidModel adi_train(const EmbeddingSet &embeddings,
                        const std::map<std::string, std::string> &labels,
                        const DomainRegistry &registry, bool normalize = true);

struct Prediction {
  std::string domain;
  std::size_t domain_index = 0;
  Eigen::VectorXd similarities;  // cosine per domain, registry order
};

/// Argmax of cosine similarity; zero centroids score -1; ties break toward
/// the earlier registry position.
Prediction adi_predict(const CentroidModel &model, const Eigen::VectorXd &v);

struct AdiMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double uar = 0.0;
  double mcc = 0.0;
  int zero_support_classes = 0;  // excluded from UAR
};

/// Metrics from a K x K confusion matrix with rows = true, cols = predicted.
AdiMetrics adi_metrics(const Eigen::MatrixXi &confusion);

struct CrossvalOptions {
  int n_train = 200;
  int n_repeats = 1000;
  std::uint64_t seed = 0;
  bool normalize = true;
};

struct CrossvalResult {
  AdiMetrics mean;
  AdiMetrics stddev;
  int resampled_splits = 0;  // splits redrawn because a domain had no train item
  Eigen::MatrixXi pooled_confusion;
  std::vector<AdiMetrics> per_repeat;
};

/// Repeated random splits: n_train recordings train the centroids, the rest
/// are scored. Deterministic given the seed; per-repeat RNG streams are
/// derived from it, so results do not depend on evaluation order.
CrossvalResult adi_crossval(const EmbeddingSet &embeddings,
                            const std::map<std::string, std::string> &labels,
                            const DomainRegistry &registry,
                            const CrossvalOptions &opts);

}  // namespace adi
}  // namespace diar

#endif  // DIAR_ADI_HPP_
