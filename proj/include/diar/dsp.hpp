// diar/dsp.hpp

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

// Short-time analysis front-end: framing, power spectra, mel filterbank,
// MFCC, LTAS.

#ifndef DIAR_DSP_HPP_
#define DIAR_DSP_HPP_

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "diar/error.hpp"

namespace diar {
namespace dsp {

enum class Window { kHamming, kHann };

struct FrameSpec {
  double frame_len = 0.025;    // seconds
  double frame_shift = 0.010;  // seconds
  Window window = Window::kHamming;
  double preemphasis = 0.97;  // in [0, 1); 0 disables

  void validate() const;
};

struct MelSpec {
  int n_filters = 26;
  int n_ceps = 13;
  double fmin = 20.0;
  double fmax = 0.0;  // 0 means sample_rate / 2

  void validate(int sample_rate) const;
};

/// MFCC configuration used for diarization embeddings: 30 cepstra from
/// 25 ms frames with 10 ms shift.
FrameSpec frame_spec_embedding();
MelSpec mel_spec_embedding();

/// MFCC configuration used for re-segmentation features: 24 cepstra from
/// 15 ms frames with 10 ms shift, no normalization or deltas.
FrameSpec frame_spec_resegmentation();
MelSpec mel_spec_resegmentation();

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Number of frames the framer produces: floor((N - len) / shift) + 1.
std::size_t frame_count(std::size_t n_samples, const FrameSpec &spec, int sample_rate);

/// Pre-emphasis y[n] = x[n] - a*x[n-1], then windowed frames, one per row.
Eigen::MatrixXd frame_signal(std::span<const double> samples, const FrameSpec &spec,
                             int sample_rate);

std::size_t next_pow2(std::size_t n);

/// In-place iterative radix-2 complex FFT (decimation in time).
void fft_inplace(std::vector<std::complex<double>> &x);

/// One-sided power spectrum |X_k|^2, k = 0..n_fft/2, of a real frame
/// zero-padded to n_fft (n_fft a power of two).
Eigen::VectorXd power_spectrum(const Eigen::VectorXd &frame, std::size_t n_fft);

/// Triangular unit-peak mel filterbank on the one-sided power spectrum grid.
/// Rows are filters, columns FFT bins 0..n_fft/2.
Eigen::MatrixXd mel_filterbank(const MelSpec &mel, int sample_rate, std::size_t n_fft);

/// MFCC matrix [n_frames x n_ceps]: DCT-II (orthonormal) of log mel energies,
/// log floored at ln(1e-10).
Eigen::MatrixXd mfcc(std::span<const double> samples, int sample_rate,
                     const FrameSpec &spec, const MelSpec &mel);

/// Long-term average spectrum in dB: 10*log10 of the across-frame mean of
/// per-frame power spectra, floored at 1e-12 inside the log.
Eigen::VectorXd ltas(std::span<const double> samples, int sample_rate,
                     const FrameSpec &spec, std::size_t n_fft = 1024);

}  // namespace dsp
}  // namespace diar

#endif  // DIAR_DSP_HPP_
