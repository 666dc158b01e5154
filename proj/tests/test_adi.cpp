#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "diar/adi.hpp"
#include "diar/rng.hpp"

using namespace diar;
using namespace diar::adi;

namespace {

DomainRegistry three_domain_registry() {
  DomainRegistry reg;
  reg.register_domain("alpha");
  reg.register_domain("beta");
  reg.register_domain("gamma");
  return reg;
}

}  // namespace

TEST_CASE("adi_train: one vector per domain gives those vectors as centroids") {
  const DomainRegistry reg = three_domain_registry();
  EmbeddingSet set(3);
  Eigen::VectorXd a(3), b(3);
  a << 1, 0, 0;
  b << 0, 1, 0;
  set.add("r1", a);
  set.add("r2", b);
  const CentroidModel m = adi_train(set, {{"r1", "alpha"}, {"r2", "beta"}}, reg, true);
  REQUIRE(m.domains.size() == 2);
  CHECK(m.domains[0] == "alpha");  // registry order
  CHECK((m.centroids.row(0).transpose() - a).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((m.centroids.row(1).transpose() - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("adi_train centroid equals the direct mean (duplicates shift it)") {
  const DomainRegistry reg = three_domain_registry();
  EmbeddingSet set(2);
  Eigen::VectorXd a(2), b(2), c(2);
  a << 1, 0;
  b << 0, 1;
  c << 1, 0;
  set.add("r1", a);
  set.add("r2", b);
  set.add("r3", c);  // duplicate of r1's direction
  std::map<std::string, std::string> labels{
      {"r1", "alpha"}, {"r2", "alpha"}, {"r3", "alpha"}, };
  EmbeddingSet other(2);
  other.add("x", b);
  std::map<std::string, std::string> labels2 = labels;
  // need a second domain for a valid model
  set.add("r4", b);
  labels2["r4"] = "beta";
  const CentroidModel m = adi_train(set, labels2, reg, false);
  const Eigen::VectorXd expected = (a + b + c) / 3.0;  // direct mean oracle
  CHECK((m.centroids.row(0).transpose() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("adi_train flags antipodal cancellation as degenerate") {
  const DomainRegistry reg = three_domain_registry();
  EmbeddingSet set(2);
  Eigen::VectorXd a(2), b(2), c(2);
  a << 2, 0;
  b << -1, 0;  // normalized: exactly antipodal to a
  c << 0, 1;
  set.add("r1", a);
  set.add("r2", b);
  set.add("r3", c);
  const CentroidModel m = adi_train(
      set, {{"r1", "alpha"}, {"r2", "alpha"}, {"r3", "beta"}}, reg, true);
  CHECK_FALSE(m.warnings.empty());
  // prediction against the zero centroid yields similarity -1
  const Prediction p = adi_predict(m, c);
  CHECK(p.similarities(0) == doctest::Approx(-1.0));
  CHECK(p.domain == "beta");
}

TEST_CASE("adi_predict basics: exact match, orthogonality, scale invariance") {
  const DomainRegistry reg = three_domain_registry();
  EmbeddingSet set(3);
  Eigen::VectorXd a(3), b(3), c(3);
  a << 1, 0, 0;
  b << 0, 1, 0;
  c << 0, 0, 1;
  set.add("r1", a);
  set.add("r2", b);
  set.add("r3", c);
  const CentroidModel m = adi_train(
      set, {{"r1", "alpha"}, {"r2", "beta"}, {"r3", "gamma"}}, reg, true);

  const Prediction exact = adi_predict(m, a);
  CHECK(exact.domain == "alpha");
  CHECK(exact.similarities(0) == doctest::Approx(1.0));

  Eigen::VectorXd ortho(3);
  ortho << 0, 0, 2;  // orthogonal to alpha and beta centroids
  CHECK(adi_predict(m, ortho).domain == "gamma");

  Eigen::VectorXd scaled = 5.0 * a;
  CHECK(adi_predict(m, scaled).domain == "alpha");

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(adi_predict(m, zero), InvalidArgument);
}

TEST_CASE("adi_predict breaks ties toward the earlier registry domain") {
  const DomainRegistry reg = three_domain_registry();
  EmbeddingSet set(2);
  Eigen::VectorXd a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  set.add("r1", a);
  set.add("r2", b);
  const CentroidModel m = adi_train(set, {{"r1", "alpha"}, {"r2", "beta"}}, reg, true);
  Eigen::VectorXd diagonal(2);
  diagonal << 1, 1;  // equal cosine to both centroids
  CHECK(adi_predict(m, diagonal).domain == "alpha");
}

TEST_CASE("adi metrics: perfect, chance, and validation") {
  Eigen::MatrixXi diag = Eigen::MatrixXi::Zero(3, 3);
  diag(0, 0) = 10;
  diag(1, 1) = 4;
  diag(2, 2) = 7;
  const AdiMetrics perfect = adi_metrics(diag);
  CHECK(perfect.accuracy == doctest::Approx(1.0));
  CHECK(perfect.macro_f1 == doctest::Approx(1.0));
  CHECK(perfect.uar == doctest::Approx(1.0));
  CHECK(perfect.mcc == doctest::Approx(1.0));

  Eigen::MatrixXi chance(2, 2);
  chance << 25, 25, 25, 25;
  const AdiMetrics coin = adi_metrics(chance);
  CHECK(coin.accuracy == doctest::Approx(0.5));
  CHECK(coin.mcc == doctest::Approx(0.0));

  Eigen::MatrixXi zero = Eigen::MatrixXi::Zero(2, 2);
  CHECK_THROWS_AS(adi_metrics(zero), DataError);
  Eigen::MatrixXi neg(2, 2);
  neg << 1, 0, 0, -1;
  CHECK_THROWS_AS(adi_metrics(neg), InvalidArgument);
}

TEST_CASE("adi metrics: zero-support classes are excluded from UAR") {
  Eigen::MatrixXi conf = Eigen::MatrixXi::Zero(3, 3);
  conf(0, 0) = 8;
  conf(1, 1) = 2;
  conf(1, 0) = 2;  // class 2 has no true examples
  const AdiMetrics m = adi_metrics(conf);
  CHECK(m.zero_support_classes == 1);
  CHECK(m.uar == doctest::Approx(0.75));  // mean of 1.0 and 0.5
}

TEST_CASE("adi metrics invariant under simultaneous row/column permutation") {
  Rng rng(55);
  Eigen::MatrixXi conf(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      conf(i, j) = static_cast<int>(rng.below(20)) + (i == j ? 10 : 0);
  const AdiMetrics base = adi_metrics(conf);

  const std::vector<int> perm{2, 0, 3, 1};
  Eigen::MatrixXi permuted(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      permuted(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) =
          conf(i, j);
  const AdiMetrics after = adi_metrics(permuted);
  CHECK(base.accuracy == doctest::Approx(after.accuracy).epsilon(1e-12));
  CHECK(base.macro_f1 == doctest::Approx(after.macro_f1).epsilon(1e-12));
  CHECK(base.uar == doctest::Approx(after.uar).epsilon(1e-12));
  CHECK(base.mcc == doctest::Approx(after.mcc).epsilon(1e-12));
}

TEST_CASE("adi metrics ranges on random confusion matrices") {
  Rng rng(56);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXi conf(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) conf(i, j) = static_cast<int>(rng.below(30));
    if (conf.sum() == 0) conf(0, 0) = 1;
    const AdiMetrics m = adi_metrics(conf);
    CHECK(m.accuracy >= 0.0);
    CHECK(m.accuracy <= 1.0);
    CHECK(m.uar >= 0.0);
    CHECK(m.uar <= 1.0);
    CHECK(m.macro_f1 >= 0.0);
    CHECK(m.macro_f1 <= 1.0);
    CHECK(m.mcc >= -1.0 - 1e-12);
    CHECK(m.mcc <= 1.0 + 1e-12);
  }
}

namespace {

// Hierarchical Gaussian toy corpus for the split protocol.
EmbeddingSet make_corpus(int n_domains, int per_domain, double separation,
                         std::uint64_t seed,
                         std::map<std::string, std::string> *labels,
                         DomainRegistry *reg) {
  Rng rng(seed);
  const int dim = 8;
  EmbeddingSet set(dim);
  for (int d = 0; d < n_domains; ++d) {
    const std::string name = "dom" + std::to_string(d);
    reg->register_domain(name);
    Eigen::VectorXd center(dim);
    for (int j = 0; j < dim; ++j) center(j) = separation * rng.normal();
    for (int r = 0; r < per_domain; ++r) {
      Eigen::VectorXd v = center;
      for (int j = 0; j < dim; ++j) v(j) += rng.normal();
      const std::string key = name + "_r" + std::to_string(r);
      set.add(key, v);
      (*labels)[key] = name;
    }
  }
  return set;
}

}  // namespace

TEST_CASE("adi_crossval: separable domains score nearly perfectly") {
  DomainRegistry reg;
  std::map<std::string, std::string> labels;
  const EmbeddingSet set = make_corpus(5, 20, 10.0, 99, &labels, &reg);
  CrossvalOptions opts;
  opts.n_train = 60;
  opts.n_repeats = 50;
  opts.seed = 1;
  const CrossvalResult res = adi_crossval(set, labels, reg, opts);
  CHECK(res.mean.accuracy >= 0.99);
}

TEST_CASE("adi_crossval: shuffled labels score at chance") {
  DomainRegistry reg;
  std::map<std::string, std::string> labels;
  const EmbeddingSet set = make_corpus(4, 25, 10.0, 100, &labels, &reg);
  // destroy the label structure deterministically
  Rng rng(2);
  std::vector<std::string> values;
  for (const auto &[k, v] : labels) values.push_back(v);
  const auto perm = rng.permutation(values.size());
  std::size_t i = 0;
  for (auto &[k, v] : labels) v = values[perm[i++]];

  CrossvalOptions opts;
  opts.n_train = 60;
  opts.n_repeats = 100;
  opts.seed = 3;
  const CrossvalResult res = adi_crossval(set, labels, reg, opts);
  // 3 sigma of the per-repeat spread around 1/K
  CHECK(std::fabs(res.mean.accuracy - 0.25) <=
        3.0 * res.stddev.accuracy / std::sqrt(100.0) + 0.05);
}

TEST_CASE("adi_crossval with one repeat equals the manual split") {
  DomainRegistry reg;
  std::map<std::string, std::string> labels;
  const EmbeddingSet set = make_corpus(3, 10, 8.0, 101, &labels, &reg);
  CrossvalOptions opts;
  opts.n_train = 20;
  opts.n_repeats = 1;
  opts.seed = 42;
  const CrossvalResult a = adi_crossval(set, labels, reg, opts);
  const CrossvalResult b = adi_crossval(set, labels, reg, opts);
  CHECK(a.mean.accuracy == b.mean.accuracy);  // bit-identical determinism
  CHECK(a.pooled_confusion == b.pooled_confusion);
  CHECK(a.stddev.accuracy == doctest::Approx(0.0));
}

TEST_CASE("adi model file round trip") {
  DomainRegistry reg = three_domain_registry();
  EmbeddingSet set(2);
  Eigen::VectorXd a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  set.add("r1", a);
  set.add("r2", b);
  const CentroidModel m = adi_train(set, {{"r1", "alpha"}, {"r2", "beta"}}, reg, true);
  const std::string path =
      (std::filesystem::temp_directory_path() / "diar_adi_test.adi1").string();
  m.save(path);
  const CentroidModel back = CentroidModel::load(path);
  CHECK(back.domains == m.domains);
  CHECK(back.normalize_inputs == m.normalize_inputs);
  CHECK((back.centroids - m.centroids).cwiseAbs().maxCoeff() == 0.0);
}
