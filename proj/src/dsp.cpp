// src/dsp.cpp

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

#include "diar/dsp.hpp"

#include <algorithm>
#include <cmath>

namespace diar {
namespace dsp {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLogFloor = 1e-10;   // inside MFCC log
constexpr double kLtasFloor = 1e-12;  // inside LTAS log
}  // namespace

void FrameSpec::validate() const {
  if (!(frame_len > 0.0)) throw InvalidArgument("FrameSpec: frame_len must be positive");
  if (!(frame_shift > 0.0) || frame_shift > frame_len)
    throw InvalidArgument("FrameSpec: need 0 < frame_shift <= frame_len");
  if (preemphasis < 0.0 || preemphasis >= 1.0)
    throw InvalidArgument("FrameSpec: preemphasis must be in [0, 1)");
}

void MelSpec::validate(int sample_rate) const {
  if (n_filters < 1) throw InvalidArgument("MelSpec: n_filters must be positive");
  if (n_ceps < 1 || n_ceps > n_filters)
    throw InvalidArgument("MelSpec: need 1 <= n_ceps <= n_filters");
  const double fm = fmax > 0.0 ? fmax : sample_rate / 2.0;
  if (!(fmin < fm) || fm > sample_rate / 2.0)
    throw InvalidArgument("MelSpec: need fmin < fmax <= sample_rate/2");
}

FrameSpec frame_spec_embedding() { return {0.025, 0.010, Window::kHamming, 0.97}; }
MelSpec mel_spec_embedding() { return {30, 30, 20.0, 0.0}; }

FrameSpec frame_spec_resegmentation() { return {0.015, 0.010, Window::kHamming, 0.97}; }
MelSpec mel_spec_resegmentation() { return {24, 24, 20.0, 0.0}; }

std::size_t frame_count(std::size_t n_samples, const FrameSpec &spec, int sample_rate) {
  spec.validate();
  const std::size_t len = static_cast<std::size_t>(std::lround(spec.frame_len * sample_rate));
  const std::size_t shift = static_cast<std::size_t>(std::lround(spec.frame_shift * sample_rate));
  if (len == 0 || shift == 0) throw InvalidArgument("frame_count: zero-sample frame or shift");
  if (n_samples < len) return 0;
  return (n_samples - len) / shift + 1;
}

Eigen::MatrixXd frame_signal(std::span<const double> samples, const FrameSpec &spec,
                             int sample_rate) {
  spec.validate();
  const std::size_t len = static_cast<std::size_t>(std::lround(spec.frame_len * sample_rate));
  const std::size_t shift = static_cast<std::size_t>(std::lround(spec.frame_shift * sample_rate));
  const std::size_t n_frames = frame_count(samples.size(), spec, sample_rate);
  if (n_frames == 0)
    throw DataError("frame_signal: signal shorter than one frame (" +
                    std::to_string(samples.size()) + " < " + std::to_string(len) +
                    " samples)");

  Eigen::VectorXd window(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double c = std::cos(2.0 * kPi * i / (len - 1));
    window(i) = spec.window == Window::kHamming ? 0.54 - 0.46 * c : 0.5 - 0.5 * c;
  }

  // Pre-emphasis over the whole signal so frame overlap stays consistent.
  std::vector<double> pre(samples.size());
  const double a = spec.preemphasis;
  if (!samples.empty()) pre[0] = samples[0];
  for (std::size_t i = 1; i < samples.size(); ++i) pre[i] = samples[i] - a * samples[i - 1];

  Eigen::MatrixXd frames(n_frames, len);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * shift;
    for (std::size_t i = 0; i < len; ++i) frames(f, i) = pre[start + i] * window(i);
  }
  return frames;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::vector<std::complex<double>> &x) {
  const std::size_t n = x.size();
  if (n <= 1) return;
  if (n & (n - 1)) throw InvalidArgument("fft_inplace: size must be a power of two");

  // bit-reversal permutation
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (j > i) std::swap(x[i], x[j]);
    std::size_t m = n >> 1;
    while (m >= 1 && j >= m) {
      j -= m;
      m >>= 1;
    }
    j += m;
  }

  for (std::size_t span = 2; span <= n; span <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(span);
    const std::complex<double> wroot(std::cos(ang), std::sin(ang));
    for (std::size_t k = 0; k < n; k += span) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t t = 0; t < span / 2; ++t) {
        const std::complex<double> hi = w * x[k + t + span / 2];
        const std::complex<double> lo = x[k + t];
        x[k + t] = lo + hi;
        x[k + t + span / 2] = lo - hi;
        w *= wroot;
      }
    }
  }
}

Eigen::VectorXd power_spectrum(const Eigen::VectorXd &frame, std::size_t n_fft) {
  if (n_fft & (n_fft - 1)) throw InvalidArgument("power_spectrum: n_fft must be a power of two");
  if (static_cast<std::size_t>(frame.size()) > n_fft)
    throw InvalidArgument("power_spectrum: frame longer than n_fft");
  std::vector<std::complex<double>> x(n_fft, {0.0, 0.0});
  for (Eigen::Index i = 0; i < frame.size(); ++i) x[i] = {frame(i), 0.0};
  fft_inplace(x);
  Eigen::VectorXd p(n_fft / 2 + 1);
  for (std::size_t k = 0; k <= n_fft / 2; ++k) p(k) = std::norm(x[k]);
  return p;
}

Eigen::MatrixXd mel_filterbank(const MelSpec &mel, int sample_rate, std::size_t n_fft) {
  mel.validate(sample_rate);
  const double fmax = mel.fmax > 0.0 ? mel.fmax : sample_rate / 2.0;
  const double mel_lo = hz_to_mel(mel.fmin);
  const double mel_hi = hz_to_mel(fmax);
  const int nf = mel.n_filters;

  std::vector<double> centers_hz(nf + 2);
  for (int i = 0; i < nf + 2; ++i)
    centers_hz[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (nf + 1));

  const std::size_t n_bins = n_fft / 2 + 1;
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(nf, n_bins);
  for (int m = 0; m < nf; ++m) {
    const double left = centers_hz[m], center = centers_hz[m + 1], right = centers_hz[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double hz = static_cast<double>(k) * sample_rate / static_cast<double>(n_fft);
      if (hz > left && hz < center)
        fb(m, k) = (hz - left) / (center - left);
      else if (hz >= center && hz < right)
        fb(m, k) = (right - hz) / (right - center);
    }
  }
  return fb;
}

Eigen::MatrixXd mfcc(std::span<const double> samples, int sample_rate,
                     const FrameSpec &spec, const MelSpec &mel) {
  const Eigen::MatrixXd frames = frame_signal(samples, spec, sample_rate);
  const std::size_t n_fft = next_pow2(static_cast<std::size_t>(frames.cols()));
  const Eigen::MatrixXd fb = mel_filterbank(mel, sample_rate, n_fft);

  const Eigen::Index n_frames = frames.rows();
  Eigen::MatrixXd logmel(n_frames, mel.n_filters);
  for (Eigen::Index f = 0; f < n_frames; ++f) {
    const Eigen::VectorXd p = power_spectrum(frames.row(f), n_fft);
    Eigen::VectorXd e = fb * p;
    for (int m = 0; m < mel.n_filters; ++m)
      logmel(f, m) = std::log(std::max(e(m), kLogFloor));
  }

  // Orthonormal DCT-II.
  const int nm = mel.n_filters;
  Eigen::MatrixXd dct(mel.n_ceps, nm);
  for (int k = 0; k < mel.n_ceps; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / nm) : std::sqrt(2.0 / nm);
    for (int m = 0; m < nm; ++m)
      dct(k, m) = scale * std::cos(kPi * k * (2 * m + 1) / (2.0 * nm));
  }
  return logmel * dct.transpose();
}

Eigen::VectorXd ltas(std::span<const double> samples, int sample_rate,
                     const FrameSpec &spec, std::size_t n_fft) {
  const Eigen::MatrixXd frames = frame_signal(samples, spec, sample_rate);
  if (static_cast<std::size_t>(frames.cols()) > n_fft)
    throw InvalidArgument("ltas: frame length exceeds n_fft");
  Eigen::VectorXd mean_power = Eigen::VectorXd::Zero(n_fft / 2 + 1);
  for (Eigen::Index f = 0; f < frames.rows(); ++f)
    mean_power += power_spectrum(frames.row(f), n_fft);
  mean_power /= static_cast<double>(frames.rows());
  Eigen::VectorXd db(mean_power.size());
  for (Eigen::Index k = 0; k < mean_power.size(); ++k)
    db(k) = 10.0 * std::log10(std::max(mean_power(k), kLtasFloor));
  return db;
}

}  // namespace dsp
}  // namespace diar
