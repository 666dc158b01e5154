// src/tvspace.cpp

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

#include "diar/tvspace.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "diar/rng.hpp"
#include "diar/serialize.hpp"

namespace diar {
namespace ivector {

Eigen::VectorXd TvModel::supervector_mean() const {
  const int C = ubm.num_components(), F = ubm.dim();
  Eigen::VectorXd m(C * F);
  for (int c = 0; c < C; ++c) m.segment(c * F, F) = ubm.means.row(c).transpose();
  return m;
}

void TvModel::validate() const {
  ubm.validate();
  const int CF = ubm.num_components() * ubm.dim();
  if (T.rows() != CF)
    throw InvalidArgument("TvModel: T has " + std::to_string(T.rows()) +
                          " rows, expected C*F = " + std::to_string(CF));
  if (T.cols() < 1) throw InvalidArgument("TvModel: rank must be >= 1");
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(T);
  const auto &s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-8 * s(0))
    throw Error("TvModel: T is rank-deficient (smallest/largest singular value " +
                std::to_string(s(s.size() - 1) / s(0)) + ")");
}

void TvModel::write(std::ostream &os) const {
  os.write("IVM1", 4);
  write_u32(os, static_cast<std::uint32_t>(ubm.num_components()));
  write_u32(os, static_cast<std::uint32_t>(ubm.dim()));
  write_u32(os, static_cast<std::uint32_t>(rank()));
  ubm.write(os);
  write_matrix_f64(os, T);
}

TvModel TvModel::read(std::istream &is) {
  {
    ByteReader br(is);
    br.expect_magic("IVM1", "IVM1");
    br.read_u32("C");
    br.read_u32("F");
    br.read_u32("R");
  }
  TvModel tv;
  tv.ubm = DiagGmm::read(is);
  ByteReader br2(is);
  tv.T = read_matrix_f64(br2, "T matrix");
  tv.validate();
  return tv;
}

void TvModel::save(const std::string &path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open model file for writing: " + path);
  write(f);
  if (!f) throw IoError("failed writing model file: " + path);
}

TvModel TvModel::load(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open model file: " + path);
  return read(f);
}

namespace {

struct Posterior {
  Eigen::VectorXd mean;    // R
  Eigen::MatrixXd second;  // R x R, E[x x^T]
  double objective = 0.0;  // -.5 log det L + .5 a' L^{-1} a
};

Posterior posterior_for(const Eigen::MatrixXd &T, const DiagGmm &ubm,
                        const BwStats &stats, std::size_t utt_index) {
  const int C = ubm.num_components(), F = ubm.dim();
  const int R = static_cast<int>(T.cols());
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(R, R);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(R);
  for (int c = 0; c < C; ++c) {
    const double n = stats.zeroth(c);
    const auto Tc = T.block(c * F, 0, F, R);
    const Eigen::VectorXd inv_var = ubm.vars.row(c).transpose().array().inverse();
    if (n > 0.0) L.noalias() += n * Tc.transpose() * inv_var.asDiagonal() * Tc;
    a.noalias() += Tc.transpose() * (inv_var.asDiagonal() * stats.first.row(c).transpose());
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(L);
  if (llt.info() != Eigen::Success)
    throw Error("train_tv_em: singular precision for utterance " +
                std::to_string(utt_index));
  Posterior p;
  p.mean = llt.solve(a);
  p.second = llt.solve(Eigen::MatrixXd::Identity(R, R)) + p.mean * p.mean.transpose();
  double logdet = 0.0;
  const auto &Lmat = llt.matrixL();
  for (int i = 0; i < R; ++i) logdet += 2.0 * std::log(Lmat(i, i));
  p.objective = -0.5 * logdet + 0.5 * a.dot(p.mean);
  return p;
}

}  // namespace

TvModel train_tv_em(const std::vector<BwStats> &stats, const DiagGmm &ubm, int rank,
                    const TvTrainOptions &opts, std::vector<double> *objective_trace) {
  ubm.validate();
  const int C = ubm.num_components(), F = ubm.dim();
  const int CF = C * F;
  if (rank < 1) throw InvalidArgument("train_tv_em: rank must be >= 1");
  if (rank > CF)
    throw InvalidArgument("train_tv_em: rank " + std::to_string(rank) +
                          " exceeds supervector dim " + std::to_string(CF));
  if (stats.size() < static_cast<std::size_t>(rank))
    throw DataError("train_tv_em: need at least R = " + std::to_string(rank) +
                    " utterances, got " + std::to_string(stats.size()));
  for (std::size_t u = 0; u < stats.size(); ++u)
    if (stats[u].zeroth.size() != C || stats[u].first.rows() != C ||
        stats[u].first.cols() != F)
      throw InvalidArgument("train_tv_em: stats " + std::to_string(u) +
                            " inconsistent with UBM dims");

  // Random init scaled to the average feature spread.
  Rng rng(opts.seed);
  const double scale = std::sqrt(ubm.vars.mean());
  TvModel tv;
  tv.ubm = ubm;
  tv.T.resize(CF, rank);
  for (int i = 0; i < CF; ++i)
    for (int r = 0; r < rank; ++r) tv.T(i, r) = scale * rng.normal();

  const std::size_t U = stats.size();
  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < opts.n_iter; ++iter) {
    // E-step
    std::vector<Posterior> post(U);
    double objective = 0.0;
    for (std::size_t u = 0; u < U; ++u) {
      post[u] = posterior_for(tv.T, ubm, stats[u], u);
      objective += post[u].objective;
    }
    if (objective_trace) objective_trace->push_back(objective);
    if (objective + 1e-6 * (1.0 + std::fabs(objective)) < prev)
      throw Error("train_tv_em: objective decreased at iteration " +
                  std::to_string(iter));
    prev = objective;

    // M-step: per component, T_c = C_c K_c^{-1}.
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(rank, rank);  // posterior 2nd moment
    for (int c = 0; c < C; ++c) {
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(rank, rank);
      Eigen::MatrixXd Cc = Eigen::MatrixXd::Zero(F, rank);
      for (std::size_t u = 0; u < U; ++u) {
        K.noalias() += stats[u].zeroth(c) * post[u].second;
        Cc.noalias() += stats[u].first.row(c).transpose() * post[u].mean.transpose();
      }
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
      if (ldlt.info() != Eigen::Success)
        throw Error("train_tv_em: singular M-step system for component " +
                    std::to_string(c));
      tv.T.block(c * F, 0, F, rank) = ldlt.solve(Cc.transpose()).transpose();
    }

    // Minimum-divergence: whiten the aggregate latent posterior.
    if (opts.min_divergence) {
      for (std::size_t u = 0; u < U; ++u) S += post[u].second;
      S /= static_cast<double>(U);
      const Eigen::LLT<Eigen::MatrixXd> llt(S);
      if (llt.info() == Eigen::Success)
        tv.T = tv.T * Eigen::MatrixXd(llt.matrixL());
    }
  }
  tv.validate();
  return tv;
}

Eigen::VectorXd extract_ivector(const TvModel &tv, const BwStats &stats) {
  const int C = tv.ubm.num_components(), F = tv.ubm.dim();
  if (stats.zeroth.size() != C || stats.first.rows() != C || stats.first.cols() != F)
    throw InvalidArgument("extract_ivector: stats inconsistent with model dims");
  if (stats.total_occupancy() <= 0.0)
    throw DataError("extract_ivector: zero total occupancy (no speech frames)");
  const Posterior p = posterior_for(tv.T, tv.ubm, stats, 0);
  if (!p.mean.allFinite()) throw Error("extract_ivector: non-finite i-vector");
  return p.mean;
}

}  // namespace ivector
}  // namespace diar
