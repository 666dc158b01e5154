// src/plda.cpp

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

#include "diar/plda.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "diar/serialize.hpp"

namespace diar {
namespace backend {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double logdet_llt(const Eigen::LLT<Eigen::MatrixXd> &llt) {
  double s = 0.0;
  const auto &L = llt.matrixL();
  for (Eigen::Index i = 0; i < L.rows(); ++i) s += 2.0 * std::log(L(i, i));
  return s;
}

Eigen::MatrixXd psd_clip(const Eigen::MatrixXd &m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

void PldaModel::validate() const {
  const int d = dim();
  if (d < 1) throw InvalidArgument("PldaModel: empty model");
  if (B.rows() != d || B.cols() != d || W.rows() != d || W.cols() != d)
    throw InvalidArgument("PldaModel: covariance dims inconsistent with mu");
  if ((B - B.transpose()).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + B.cwiseAbs().maxCoeff()))
    throw InvalidArgument("PldaModel: B not symmetric");
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + W.cwiseAbs().maxCoeff()))
    throw InvalidArgument("PldaModel: W not symmetric");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(B);
  if (eb.eigenvalues().minCoeff() < -1e-8 * std::max(1.0, eb.eigenvalues().maxCoeff()))
    throw InvalidArgument("PldaModel: B not positive semi-definite");
  const Eigen::LLT<Eigen::MatrixXd> lw(W);
  if (lw.info() != Eigen::Success)
    throw InvalidArgument("PldaModel: W not positive definite");
}

PldaModel PldaModel::project(const ConversationPca &pca) const {
  PldaModel out;
  out.mu = pca.basis * (mu - pca.center);
  out.B = pca.basis * B * pca.basis.transpose();
  out.W = pca.basis * W * pca.basis.transpose();
  return out;
}

void PldaModel::write(std::ostream &os) const {
  write_vector_f64(os, mu);
  write_matrix_f64(os, B);
  write_matrix_f64(os, W);
}

PldaModel PldaModel::read(std::istream &is) {
  ByteReader br(is);
  PldaModel m;
  m.mu = read_vector_f64(br, "plda mu");
  m.B = read_matrix_f64(br, "plda B");
  m.W = read_matrix_f64(br, "plda W");
  m.validate();
  return m;
}

PldaModel plda_train_em(const Eigen::MatrixXd &embeddings,
                        const std::vector<int> &speaker_labels,
                        const PldaTrainOptions &opts,
                        std::vector<double> *loglik_trace) {
  const Eigen::Index N = embeddings.rows();
  const Eigen::Index D = embeddings.cols();
  if (N != static_cast<Eigen::Index>(speaker_labels.size()))
    throw InvalidArgument("plda_train_em: labels size mismatch");
  if (D < 1) throw InvalidArgument("plda_train_em: zero-dimensional embeddings");

  std::map<int, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < N; ++i) groups[speaker_labels[i]].push_back(i);
  const std::size_t S = groups.size();
  if (S < 2) throw DataError("plda_train_em: need at least 2 speakers");
  bool any_multi = false;
  for (const auto &[spk, idx] : groups) any_multi |= idx.size() >= 2;
  if (!any_multi)
    throw DataError("plda_train_em: all speakers are singletons, "
                    "within-speaker covariance unidentifiable");

  // Moment-based init: between = covariance of speaker means, within =
  // pooled residual covariance.
  PldaModel m;
  m.mu = embeddings.colwise().mean();
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(D, D);
  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(D, D);
  for (const auto &[spk, idx] : groups) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(D);
    for (const auto i : idx) mean += embeddings.row(i).transpose();
    mean /= static_cast<double>(idx.size());
    const Eigen::VectorXd dm = mean - m.mu;
    between += dm * dm.transpose();
    for (const auto i : idx) {
      const Eigen::VectorXd r = embeddings.row(i).transpose() - mean;
      within += r * r.transpose();
    }
  }
  between /= static_cast<double>(S);
  within /= static_cast<double>(N);
  const double scale = std::max(embeddings.array().abs().maxCoeff(), 1.0);
  const Eigen::MatrixXd ridge =
      1e-8 * scale * scale * Eigen::MatrixXd::Identity(D, D);
  m.B = between + ridge;
  m.W = within + ridge;

  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < opts.n_iter; ++iter) {
    const Eigen::LLT<Eigen::MatrixXd> lltB(m.B);
    const Eigen::LLT<Eigen::MatrixXd> lltW(m.W);
    if (lltB.info() != Eigen::Success || lltW.info() != Eigen::Success)
      throw Error("plda_train_em: covariance became singular at iteration " +
                  std::to_string(iter));
    const Eigen::MatrixXd Binv = lltB.solve(Eigen::MatrixXd::Identity(D, D));
    const Eigen::MatrixXd Winv = lltW.solve(Eigen::MatrixXd::Identity(D, D));
    const double logdetB = logdet_llt(lltB);
    const double logdetW = logdet_llt(lltW);
    const Eigen::VectorXd Binv_mu = Binv * m.mu;
    const double mu_B_mu = m.mu.dot(Binv_mu);

    double loglik = 0.0;
    std::vector<Eigen::VectorXd> post_means;
    std::vector<Eigen::MatrixXd> post_covs;
    std::vector<double> group_sizes;
    post_means.reserve(S);
    post_covs.reserve(S);

    for (const auto &[spk, idx] : groups) {
      const double n = static_cast<double>(idx.size());
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(D);
      double vWv = 0.0;
      for (const auto i : idx) {
        const Eigen::VectorXd v = embeddings.row(i).transpose();
        sum += v;
        vWv += v.dot(Winv * v);
      }
      const Eigen::MatrixXd lambda = Binv + n * Winv;
      const Eigen::LLT<Eigen::MatrixXd> lltL(lambda);
      if (lltL.info() != Eigen::Success)
        throw Error("plda_train_em: singular posterior precision");
      const Eigen::VectorXd b = Binv_mu + Winv * sum;
      const Eigen::VectorXd yhat = lltL.solve(b);
      post_means.push_back(yhat);
      post_covs.push_back(lltL.solve(Eigen::MatrixXd::Identity(D, D)));
      group_sizes.push_back(n);

      loglik += -0.5 * n * D * kLog2Pi - 0.5 * logdetB - 0.5 * n * logdetW -
                0.5 * logdet_llt(lltL) + 0.5 * b.dot(yhat) - 0.5 * mu_B_mu -
                0.5 * vWv;
    }
    if (loglik_trace) loglik_trace->push_back(loglik);
    if (loglik + 1e-6 * (1.0 + std::fabs(loglik)) < prev)
      throw Error("plda_train_em: log-likelihood decreased at iteration " +
                  std::to_string(iter));
    prev = loglik;

    // M-step
    Eigen::VectorXd new_mu = Eigen::VectorXd::Zero(D);
    for (const auto &ym : post_means) new_mu += ym;
    new_mu /= static_cast<double>(S);

    Eigen::MatrixXd newB = Eigen::MatrixXd::Zero(D, D);
    Eigen::MatrixXd newW = Eigen::MatrixXd::Zero(D, D);
    std::size_t g = 0;
    for (const auto &[spk, idx] : groups) {
      const Eigen::VectorXd dm = post_means[g] - new_mu;
      newB += post_covs[g] + dm * dm.transpose();
      for (const auto i : idx) {
        const Eigen::VectorXd r = embeddings.row(i).transpose() - post_means[g];
        newW += r * r.transpose();
      }
      newW += group_sizes[g] * post_covs[g];
      ++g;
    }
    m.mu = new_mu;
    m.B = newB / static_cast<double>(S) + ridge;
    m.W = newW / static_cast<double>(N) + ridge;
  }
  m.validate();
  return m;
}

PldaScorer::PldaScorer(const PldaModel &model) : mu_(model.mu) {
  const int D = model.dim();
  const Eigen::MatrixXd St = model.B + model.W;  // total covariance
  const Eigen::MatrixXd &Sa = model.B;           // across-pair covariance
  const Eigen::LLT<Eigen::MatrixXd> lltSt(St);
  if (lltSt.info() != Eigen::Success)
    throw InvalidArgument("PldaScorer: B + W not positive definite");
  const Eigen::MatrixXd St_inv = lltSt.solve(Eigen::MatrixXd::Identity(D, D));
  const Eigen::MatrixXd schur = St - Sa * St_inv * Sa;
  const Eigen::LLT<Eigen::MatrixXd> lltSchur(schur);
  if (lltSchur.info() != Eigen::Success)
    throw InvalidArgument("PldaScorer: degenerate joint covariance");
  const Eigen::MatrixXd A = lltSchur.solve(Eigen::MatrixXd::Identity(D, D));
  const Eigen::MatrixXd B2 = -A * Sa * St_inv;
  Q_ = -0.5 * (A - St_inv);
  P_ = -0.5 * B2;
  // Symmetrize: analytic A and B2 are symmetric, keep them exactly so.
  Q_ = 0.5 * (Q_ + Q_.transpose()).eval();
  P_ = 0.5 * (P_ + P_.transpose()).eval();
  constant_ = -0.5 * (logdet_llt(lltSchur) - logdet_llt(lltSt));
}

double PldaScorer::score(const Eigen::VectorXd &v1, const Eigen::VectorXd &v2) const {
  if (v1.size() != mu_.size() || v2.size() != mu_.size())
    throw InvalidArgument("PldaScorer: dim mismatch");
  if (!v1.allFinite() || !v2.allFinite())
    throw InvalidArgument("PldaScorer: non-finite input");
  const Eigen::VectorXd u1 = v1 - mu_;
  const Eigen::VectorXd u2 = v2 - mu_;
  // The cross term sums both evaluation orders so that swapping the
  // arguments is bit-exact (IEEE addition commutes).
  const double cross = u1.dot(P_ * u2) + u2.dot(P_ * u1);
  return u1.dot(Q_ * u1) + u2.dot(Q_ * u2) + cross + constant_;
}

Eigen::MatrixXd PldaScorer::score_matrix(const Eigen::MatrixXd &rows) const {
  if (rows.cols() != mu_.size())
    throw InvalidArgument("PldaScorer::score_matrix: dim mismatch");
  if (!rows.allFinite())
    throw InvalidArgument("PldaScorer::score_matrix: non-finite input");
  const Eigen::MatrixXd U = rows.rowwise() - mu_.transpose();
  const Eigen::VectorXd q = (U * Q_).cwiseProduct(U).rowwise().sum();
  Eigen::MatrixXd S = 2.0 * U * P_ * U.transpose();
  S.rowwise() += q.transpose();
  S.colwise() += q;
  S.array() += constant_;
  // exact symmetry for deterministic downstream tie-breaks
  S = 0.5 * (S + S.transpose()).eval();
  return S;
}

double plda_score(const PldaModel &model, const Eigen::VectorXd &v1,
                  const Eigen::VectorXd &v2) {
  return PldaScorer(model).score(v1, v2);
}

PldaModel plda_adapt(const PldaModel &model, const Eigen::MatrixXd &adaptation,
                     double w_within, double w_between) {
  const Eigen::Index n = adaptation.rows();
  const int D = model.dim();
  if (adaptation.cols() != D)
    throw InvalidArgument("plda_adapt: dim mismatch");
  if (n < static_cast<Eigen::Index>(D) + 1)
    throw DataError("plda_adapt: need at least D+1 adaptation vectors, got " +
                    std::to_string(n));
  if (w_within < 0.0 || w_between < 0.0)
    throw InvalidArgument("plda_adapt: weights must be non-negative");

  const Eigen::RowVectorXd mean = adaptation.colwise().mean();
  const Eigen::MatrixXd centered = adaptation.rowwise() - mean;
  const Eigen::MatrixXd total =
      (centered.transpose() * centered) / static_cast<double>(n - 1);
  const Eigen::MatrixXd excess = psd_clip(total - (model.B + model.W));

  PldaModel out = model;
  out.W += w_within * excess;
  out.B += w_between * excess;
  out.validate();
  return out;
}

void Backend::save(const std::string &path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open backend file for writing: " + path);
  f.write("PLD1", 4);
  whitener.write(f);
  plda.write(f);
  if (!f) throw IoError("failed writing backend file: " + path);
}

Backend Backend::load(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open backend file: " + path);
  {
    ByteReader br(f);
    br.expect_magic("PLD1", "PLD1");
  }
  Backend b;
  b.whitener = Whitener::read(f);
  b.plda = PldaModel::read(f);
  return b;
}

}  // namespace backend
}  // namespace diar
