#include "doctest.h"

#include <cmath>
#include <vector>

#include "diar/dsp.hpp"
#include "diar/rng.hpp"

using namespace diar;
using namespace diar::dsp;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<double> tone(double hz, int sr, double seconds, double amp = 0.5) {
  std::vector<double> x(static_cast<std::size_t>(sr * seconds));
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = amp * std::sin(2.0 * kPi * hz * static_cast<double>(i) / sr);
  return x;
}
}  // namespace

TEST_CASE("frame count: 1 s at 25 ms / 10 ms shift gives 98 frames") {
  FrameSpec spec{0.025, 0.010, Window::kHamming, 0.0};
  CHECK(frame_count(16000, spec, 16000) == 98);
}

TEST_CASE("frame_signal rejects signals shorter than one frame") {
  FrameSpec spec{0.025, 0.010, Window::kHamming, 0.0};
  std::vector<double> tiny(100, 0.1);
  CHECK_THROWS_AS(frame_signal(tiny, spec, 16000), DataError);
}

TEST_CASE("frame_signal with zero preemphasis is the raw windowed slice") {
  FrameSpec spec{0.004, 0.002, Window::kHann, 0.0};
  Rng rng(5);
  std::vector<double> x(64);
  for (auto &v : x) v = rng.normal();
  const Eigen::MatrixXd frames = frame_signal(x, spec, 4000);  // len 16, shift 8
  REQUIRE(frames.rows() == 7);
  for (int i = 0; i < 16; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * i / 15.0);
    CHECK(frames(0, i) == doctest::Approx(x[static_cast<std::size_t>(i)] * w).epsilon(1e-12));
    CHECK(frames(2, i) ==
          doctest::Approx(x[static_cast<std::size_t>(16 + i)] * w).epsilon(1e-12));
  }
}

TEST_CASE("preemphasis matches the difference formula on a step input") {
  FrameSpec spec{0.004, 0.004, Window::kHamming, 0.97};
  std::vector<double> x(32, 0.0);
  for (std::size_t i = 8; i < x.size(); ++i) x[i] = 1.0;  // step at sample 8
  const Eigen::MatrixXd frames = frame_signal(x, spec, 4000);  // len 16, shift 16
  // y[n] = x[n] - 0.97 x[n-1]: zero before the step, 1 at the step, 0.03 after
  const double w0 = 0.54 - 0.46 * std::cos(0.0);
  const double w8 = 0.54 - 0.46 * std::cos(2.0 * kPi * 8.0 / 15.0);
  const double w9 = 0.54 - 0.46 * std::cos(2.0 * kPi * 9.0 / 15.0);
  CHECK(frames(0, 0) == doctest::Approx(0.0));
  CHECK(frames(0, 8) == doctest::Approx(1.0 * w8).epsilon(1e-12));
  CHECK(frames(0, 9) == doctest::Approx(0.03 * w9).epsilon(1e-12));
  // second frame starts inside the constant region
  CHECK(frames(1, 0) == doctest::Approx(0.03 * w0).epsilon(1e-12));
}

TEST_CASE("shift == frame length partitions the signal") {
  FrameSpec spec{0.004, 0.004, Window::kHamming, 0.0};
  std::vector<double> x(64, 1.0);
  const Eigen::MatrixXd frames = frame_signal(x, spec, 4000);
  CHECK(frames.rows() == 4);  // 64 / 16
}

TEST_CASE("Parseval: power spectrum total equals windowed energy times n_fft") {
  Rng rng(17);
  Eigen::VectorXd frame(400);
  for (Eigen::Index i = 0; i < frame.size(); ++i) frame(i) = rng.normal();
  const std::size_t n_fft = 512;
  const Eigen::VectorXd p = power_spectrum(frame, n_fft);
  // full two-sided sum from the one-sided half (bins 1..N/2-1 appear twice)
  double two_sided = p(0) + p(p.size() - 1);
  for (Eigen::Index k = 1; k + 1 < p.size(); ++k) two_sided += 2.0 * p(k);
  const double energy = frame.squaredNorm();
  CHECK(two_sided == doctest::Approx(energy * n_fft).epsilon(1e-6));
}

TEST_CASE("mfcc of silence equals the DCT of the floor vector") {
  FrameSpec fspec{0.025, 0.010, Window::kHamming, 0.0};
  MelSpec mspec{26, 13, 20.0, 0.0};
  std::vector<double> zeros(8000, 0.0);
  const Eigen::MatrixXd c = mfcc(zeros, 16000, fspec, mspec);
  // analytic DCT-II of the constant ln(1e-10) vector: only k = 0 is nonzero
  const double expected0 = std::log(1e-10) * std::sqrt(26.0) ;
  for (Eigen::Index f = 0; f < c.rows(); ++f) {
    CHECK(c(f, 0) == doctest::Approx(expected0).epsilon(1e-9));
    for (int k = 1; k < 13; ++k) CHECK(c(f, k) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("pure 1 kHz tone maximizes the filter with center nearest 1 kHz") {
  const int sr = 16000;
  FrameSpec fspec{0.025, 0.010, Window::kHamming, 0.0};
  MelSpec mspec{26, 13, 20.0, 0.0};
  const auto x = tone(1000.0, sr, 1.0);
  const Eigen::MatrixXd frames = frame_signal(x, fspec, sr);
  const std::size_t n_fft = next_pow2(static_cast<std::size_t>(frames.cols()));
  const Eigen::MatrixXd fb = mel_filterbank(mspec, sr, n_fft);
  Eigen::VectorXd energy = Eigen::VectorXd::Zero(mspec.n_filters);
  for (Eigen::Index f = 0; f < frames.rows(); ++f)
    energy += fb * power_spectrum(frames.row(f), n_fft);

  Eigen::Index argmax = 0;
  energy.maxCoeff(&argmax);

  // analytic filter centers: uniform in mel between fmin and sr/2
  const double mel_lo = hz_to_mel(20.0), mel_hi = hz_to_mel(sr / 2.0);
  Eigen::Index nearest = 0;
  double best = 1e12;
  for (int m = 0; m < mspec.n_filters; ++m) {
    const double center =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * (m + 1) / (mspec.n_filters + 1));
    if (std::fabs(center - 1000.0) < best) {
      best = std::fabs(center - 1000.0);
      nearest = m;
    }
  }
  CHECK(argmax == nearest);
}

TEST_CASE("mfcc row-shift property: shifting by one hop shifts rows") {
  const int sr = 16000;
  FrameSpec fspec{0.025, 0.010, Window::kHamming, 0.97};
  MelSpec mspec{26, 13, 20.0, 0.0};
  Rng rng(31);
  std::vector<double> x(16000);
  for (auto &v : x) v = rng.normal() * 0.2;
  const Eigen::MatrixXd a = mfcc(x, sr, fspec, mspec);
  const std::vector<double> shifted(x.begin() + 160, x.end());
  const Eigen::MatrixXd b = mfcc(shifted, sr, fspec, mspec);
  // rows of b align with rows 1.. of a, except boundary effects from
  // pre-emphasis at the very first sample
  for (Eigen::Index f = 1; f < b.rows(); ++f)
    for (int k = 0; k < 13; ++k)
      CHECK(b(f, k) == doctest::Approx(a(f + 1, k)).epsilon(1e-9));
}

TEST_CASE("ltas of silence sits exactly at the -120 dB floor") {
  FrameSpec fspec{0.025, 0.010, Window::kHann, 0.0};
  std::vector<double> zeros(16000, 0.0);
  const Eigen::VectorXd db = ltas(zeros, 16000, fspec, 1024);
  REQUIRE(db.size() == 513);
  for (Eigen::Index k = 0; k < db.size(); ++k) CHECK(db(k) == doctest::Approx(-120.0));
}

TEST_CASE("ltas of a pure tone peaks at the tone bin") {
  const int sr = 16000;
  FrameSpec fspec{0.025, 0.010, Window::kHann, 0.0};
  const auto x = tone(2000.0, sr, 2.0);
  const Eigen::VectorXd db = ltas(x, sr, fspec, 1024);
  Eigen::Index argmax = 0;
  db.maxCoeff(&argmax);
  const double bin_hz = static_cast<double>(argmax) * sr / 1024.0;
  CHECK(std::fabs(bin_hz - 2000.0) < sr / 1024.0 + 1e-9);
}

TEST_CASE("ltas of long white noise is flat within +-1.5 dB") {
  const int sr = 16000;
  FrameSpec fspec{0.025, 0.010, Window::kHann, 0.0};
  Rng rng(421);
  std::vector<double> x(static_cast<std::size_t>(60.5 * sr));
  for (auto &v : x) v = rng.normal() * 0.3;
  const Eigen::VectorXd db = ltas(x, sr, fspec, 1024);
  // interior bins only: bins 0 and N/2 hold half-width components
  double mean = 0.0;
  for (Eigen::Index k = 1; k + 1 < db.size(); ++k) mean += db(k);
  mean /= static_cast<double>(db.size() - 2);
  for (Eigen::Index k = 1; k + 1 < db.size(); ++k)
    CHECK(std::fabs(db(k) - mean) < 1.5);
}
