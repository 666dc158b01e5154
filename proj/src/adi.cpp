// src/adi.cpp

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

#include "diar/adi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "diar/rng.hpp"
#include "diar/serialize.hpp"

namespace diar {
namespace adi {

std::size_t CentroidModel::domain_index(const std::string &name) const {
  for (std::size_t i = 0; i < domains.size(); ++i)
    if (domains[i] == name) return i;
  throw InvalidArgument("CentroidModel: unknown domain '" + name + "'");
}

void CentroidModel::save(const std::string &path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open ADI model for writing: " + path);
  f.write("ADI1", 4);
  write_u32(f, static_cast<std::uint32_t>(dim));
  write_u32(f, static_cast<std::uint32_t>(domains.size()));
  write_u32(f, normalize_inputs ? 1 : 0);
  for (std::size_t i = 0; i < domains.size(); ++i) {
    write_u16(f, static_cast<std::uint16_t>(domains[i].size()));
    f.write(domains[i].data(), static_cast<std::streamsize>(domains[i].size()));
    for (int d = 0; d < dim; ++d) write_f64(f, centroids(static_cast<Eigen::Index>(i), d));
  }
  if (!f) throw IoError("failed writing ADI model: " + path);
}

CentroidModel CentroidModel::load(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open ADI model: " + path);
  ByteReader br(f);
  br.expect_magic("ADI1", "ADI1");
  CentroidModel m;
  m.dim = static_cast<int>(br.read_u32("dim"));
  const std::uint32_t n = br.read_u32("domain count");
  m.normalize_inputs = br.read_u32("normalize flag") != 0;
  m.centroids.resize(n, m.dim);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint16_t len = br.read_u16("domain name length");
    std::string name(len, '\0');
    if (len) br.read_bytes(name.data(), len, "domain name");
    m.domains.push_back(name);
    for (int d = 0; d < m.dim; ++d) m.centroids(i, d) = br.read_f64("centroid");
  }
  return m;
}

CentroidModel adi_train(const EmbeddingSet &embeddings,
                        const std::map<std::string, std::string> &labels,
                        const DomainRegistry &registry, bool normalize) {
  if (embeddings.empty()) throw DataError("adi_train: no embeddings");

  // Domains in registry order, restricted to those with training data.
  std::map<std::string, std::vector<std::size_t>> by_domain;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const std::string &key = embeddings.keys()[i];
    const auto it = labels.find(key);
    if (it == labels.end())
      throw DataError("adi_train: embedding '" + key + "' has no domain label");
    by_domain[registry.resolve(it->second)].push_back(i);
  }
  if (by_domain.size() < 2)
    throw DataError("adi_train: need at least 2 labeled domains, got " +
                    std::to_string(by_domain.size()));

  CentroidModel model;
  model.dim = embeddings.dim();
  model.normalize_inputs = normalize;
  std::vector<std::pair<std::size_t, std::string>> ordered;
  for (const auto &[name, idx] : by_domain)
    ordered.emplace_back(registry.order_of(name), name);
  std::sort(ordered.begin(), ordered.end());

  model.centroids.resize(static_cast<Eigen::Index>(ordered.size()), model.dim);
  Eigen::Index row = 0;
  for (const auto &[order, name] : ordered) {
    const auto &idx = by_domain[name];
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(model.dim);
    for (const auto i : idx) {
      Eigen::VectorXd v = embeddings.row(i);
      if (normalize) {
        const double n = v.norm();
        if (n <= 0.0)
          throw DataError("adi_train: zero-norm embedding '" + embeddings.keys()[i] + "'");
        v /= n;
      }
      mean += v;
    }
    mean /= static_cast<double>(idx.size());
    if (mean.norm() <= 1e-12)
      model.warnings.push_back("domain '" + name +
                               "' has a degenerate (zero) centroid");
    model.centroids.row(row) = mean.transpose();
    model.domains.push_back(name);
    ++row;
  }
  return model;
}

Prediction adi_predict(const CentroidModel &model, const Eigen::VectorXd &v) {
  if (v.size() != model.dim) throw InvalidArgument("adi_predict: dim mismatch");
  const double vn = v.norm();
  if (vn <= 0.0) throw InvalidArgument("adi_predict: zero query vector");

  Prediction p;
  p.similarities.resize(static_cast<Eigen::Index>(model.domains.size()));
  for (Eigen::Index i = 0; i < p.similarities.size(); ++i) {
    const double cn = model.centroids.row(i).norm();
    p.similarities(i) =
        cn <= 0.0 ? -1.0 : model.centroids.row(i).dot(v.transpose()) / (cn * vn);
  }
  // argmax with tie-break toward the earlier registry position
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < p.similarities.size(); ++i)
    if (p.similarities(i) > p.similarities(best)) best = i;
  p.domain_index = static_cast<std::size_t>(best);
  p.domain = model.domains[p.domain_index];
  return p;
}

AdiMetrics adi_metrics(const Eigen::MatrixXi &confusion) {
  const Eigen::Index K = confusion.rows();
  if (K < 1 || confusion.cols() != K)
    throw InvalidArgument("adi_metrics: confusion matrix must be square");
  if ((confusion.array() < 0).any())
    throw InvalidArgument("adi_metrics: negative counts");
  const double total = confusion.cast<double>().sum();
  if (total <= 0.0) throw DataError("adi_metrics: empty confusion matrix");

  const Eigen::VectorXd row_sums = confusion.cast<double>().rowwise().sum();  // true
  const Eigen::VectorXd col_sums = confusion.cast<double>().colwise().sum();  // predicted
  const double trace = confusion.cast<double>().trace();

  AdiMetrics m;
  m.accuracy = trace / total;

  double recall_sum = 0.0;
  int recall_classes = 0;
  double f1_sum = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double tp = confusion(k, k);
    if (row_sums(k) > 0.0) {
      recall_sum += tp / row_sums(k);
      ++recall_classes;
    } else {
      ++m.zero_support_classes;
    }
    const double denom = row_sums(k) + col_sums(k);
    f1_sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;  // 0 where undefined
  }
  if (recall_classes == 0) throw DataError("adi_metrics: no class has support");
  m.uar = recall_sum / recall_classes;
  m.macro_f1 = f1_sum / static_cast<double>(K);

  // Multiclass R_K statistic.
  const double num = trace * total - row_sums.dot(col_sums);
  const double den1 = total * total - col_sums.squaredNorm();
  const double den2 = total * total - row_sums.squaredNorm();
  m.mcc = (den1 > 0.0 && den2 > 0.0) ? num / std::sqrt(den1 * den2) : 0.0;
  return m;
}

CrossvalResult adi_crossval(const EmbeddingSet &embeddings,
                            const std::map<std::string, std::string> &labels,
                            const DomainRegistry &registry,
                            const CrossvalOptions &opts) {
  const std::size_t n = embeddings.size();
  if (opts.n_train < 1 || static_cast<std::size_t>(opts.n_train) >= n)
    throw InvalidArgument("adi_crossval: n_train must be in [1, corpus size)");
  if (opts.n_repeats < 1) throw InvalidArgument("adi_crossval: n_repeats must be >= 1");

  // Resolve labels once; establish the domain set.
  std::vector<std::string> label_of(n);
  std::vector<std::string> domain_names;
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = labels.find(embeddings.keys()[i]);
    if (it == labels.end())
      throw DataError("adi_crossval: embedding '" + embeddings.keys()[i] +
                      "' has no domain label");
    label_of[i] = registry.resolve(it->second);
    if (std::find(domain_names.begin(), domain_names.end(), label_of[i]) ==
        domain_names.end())
      domain_names.push_back(label_of[i]);
  }
  std::sort(domain_names.begin(), domain_names.end(),
            [&](const std::string &a, const std::string &b) {
              return registry.order_of(a) < registry.order_of(b);
            });
  const std::size_t K = domain_names.size();
  auto domain_pos = [&](const std::string &d) {
    return static_cast<Eigen::Index>(
        std::find(domain_names.begin(), domain_names.end(), d) - domain_names.begin());
  };

  const Rng master(opts.seed);
  CrossvalResult result;
  result.pooled_confusion = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(K),
                                                  static_cast<Eigen::Index>(K));
  result.per_repeat.reserve(static_cast<std::size_t>(opts.n_repeats));

  for (int rep = 0; rep < opts.n_repeats; ++rep) {
    Rng rng = master.derive(static_cast<std::uint64_t>(rep));

    // Draw splits until every domain has a training item.
    std::vector<std::size_t> perm;
    for (int attempt = 0;; ++attempt) {
      perm = rng.permutation(n);
      std::vector<bool> seen(K, false);
      for (int i = 0; i < opts.n_train; ++i)
        seen[static_cast<std::size_t>(domain_pos(label_of[perm[static_cast<std::size_t>(i)]]))] = true;
      if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) break;
      ++result.resampled_splits;
      if (attempt > 1000)
        throw DataError("adi_crossval: cannot draw a split covering every domain");
    }

    EmbeddingSet train(embeddings.dim());
    std::map<std::string, std::string> train_labels;
    for (int i = 0; i < opts.n_train; ++i) {
      const std::size_t idx = perm[static_cast<std::size_t>(i)];
      train.add(embeddings.keys()[idx], embeddings.row(idx));
      train_labels[embeddings.keys()[idx]] = label_of[idx];
    }
    const CentroidModel model = adi_train(train, train_labels, registry, opts.normalize);

    Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(K),
                                                      static_cast<Eigen::Index>(K));
    for (std::size_t i = static_cast<std::size_t>(opts.n_train); i < n; ++i) {
      const std::size_t idx = perm[i];
      const Prediction p = adi_predict(model, embeddings.row(idx));
      confusion(domain_pos(label_of[idx]), domain_pos(p.domain)) += 1;
    }
    result.pooled_confusion += confusion;
    result.per_repeat.push_back(adi_metrics(confusion));
  }

  auto accumulate = [&](auto getter) {
    double s = 0.0, s2 = 0.0;
    for (const auto &m : result.per_repeat) {
      const double v = getter(m);
      s += v;
      s2 += v * v;
    }
    const double n_rep = static_cast<double>(result.per_repeat.size());
    const double mean = s / n_rep;
    const double var = std::max(0.0, s2 / n_rep - mean * mean);
    return std::pair<double, double>(mean, std::sqrt(var));
  };
  std::tie(result.mean.accuracy, result.stddev.accuracy) =
      accumulate([](const AdiMetrics &m) { return m.accuracy; });
  std::tie(result.mean.macro_f1, result.stddev.macro_f1) =
      accumulate([](const AdiMetrics &m) { return m.macro_f1; });
  std::tie(result.mean.uar, result.stddev.uar) =
      accumulate([](const AdiMetrics &m) { return m.uar; });
  std::tie(result.mean.mcc, result.stddev.mcc) =
      accumulate([](const AdiMetrics &m) { return m.mcc; });
  return result;
}

}  // namespace adi
}  // namespace diar
