#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "diar/analysis.hpp"
#include "diar/rng.hpp"
#include "diar/synth.hpp"

using namespace diar;
using namespace diar::analysis;

TEST_CASE("wada statistic is scale free") {
  Rng rng(2024);
  const auto x = simulate_gamma_speech(50000, 15.0, rng);
  const double snr1 = wada_snr(x);
  std::vector<double> scaled = x;
  for (auto &v : scaled) v *= 37.5;
  const double snr2 = wada_snr(scaled);
  CHECK(std::fabs(snr1 - snr2) < 1e-6);
}

TEST_CASE("wada on clean gamma speech saturates high") {
  Rng rng(2025);
  const auto x = simulate_gamma_speech(200000, 1000.0, rng);  // no noise
  CHECK(wada_snr(x) >= 40.0);
}

TEST_CASE("wada on pure Gaussian noise reads at most 0 dB") {
  Rng rng(2026);
  const auto x = simulate_gamma_speech(200000, -1000.0, rng);  // noise only
  CHECK(wada_snr(x) <= 0.0);
}

TEST_CASE("wada inverts a 10 dB mixture to within 1.5 dB") {
  Rng rng(2027);
  const auto x = simulate_gamma_speech(320000, 10.0, rng);
  const double est = wada_snr(x);
  CHECK(est > 8.5);
  CHECK(est < 11.5);
}

TEST_CASE("wada rejects all-zero input") {
  std::vector<double> zeros(16000, 0.0);
  CHECK_THROWS_AS(wada_snr(zeros), DataError);
}

TEST_CASE("wada table is monotone") {
  const WadaTable &table = WadaTable::instance();
  for (int snr = kWadaSnrMin; snr < kWadaSnrMax; ++snr)
    CHECK(table.g_at(snr) <= table.g_at(snr + 1));
  CHECK(table.g_at(kWadaSnrMin) < table.g_at(kWadaSnrMax));
}

TEST_CASE("speech to nonspeech ratio") {
  const Timeline full = Timeline::canonicalize({{0, 300}});
  auto [sp, nsp] = speech_nonspeech_ratio(full, 300.0);
  CHECK(sp == doctest::Approx(100.0));
  CHECK(nsp == doctest::Approx(0.0));

  auto [sp2, nsp2] = speech_nonspeech_ratio(Timeline(), 300.0);
  CHECK(sp2 == doctest::Approx(0.0));
  CHECK(nsp2 == doctest::Approx(100.0));

  const Timeline partial = Timeline::canonicalize({{0, 240}});
  auto [sp3, nsp3] = speech_nonspeech_ratio(partial, 300.0);
  CHECK(sp3 == doctest::Approx(80.0));
  CHECK(nsp3 == doctest::Approx(20.0));

  CHECK_THROWS_AS(speech_nonspeech_ratio(full, 0.0), InvalidArgument);
}

TEST_CASE("overlap fraction basics") {
  Annotation solo("rec");
  solo.add(Turn("rec", "a", 0.0, 10.0));
  CHECK(overlap_fraction(solo, Timeline()) == doctest::Approx(0.0));

  Annotation twins("rec");
  twins.add(Turn("rec", "a", 0.0, 10.0));
  twins.add(Turn("rec", "b", 0.0, 10.0));
  CHECK(overlap_fraction(twins, Timeline()) == doctest::Approx(100.0));
}

TEST_CASE("overlap fraction of partially overlapped speakers is region based") {
  // spkA [0,10), spkB [5,10): two-speaker time 5 s of 10 s speech time
  Annotation ann("rec");
  ann.add(Turn("rec", "A", 0.0, 10.0));
  ann.add(Turn("rec", "B", 5.0, 5.0));
  CHECK(overlap_fraction(ann, Timeline()) == doctest::Approx(50.0));
}

TEST_CASE("overlap fraction is invariant under speaker relabeling") {
  Annotation ann("rec");
  ann.add(Turn("rec", "A", 0.0, 4.0));
  ann.add(Turn("rec", "B", 2.0, 4.0));
  ann.add(Turn("rec", "C", 5.0, 3.0));
  Annotation renamed("rec");
  renamed.add(Turn("rec", "x9", 0.0, 4.0));
  renamed.add(Turn("rec", "q1", 2.0, 4.0));
  renamed.add(Turn("rec", "z0", 5.0, 3.0));
  CHECK(overlap_fraction(ann, Timeline()) ==
        doctest::Approx(overlap_fraction(renamed, Timeline())));

  // same speaker overlapping itself is not overlap
  Annotation self("rec");
  self.add(Turn("rec", "A", 0.0, 5.0));
  self.add(Turn("rec", "A", 3.0, 5.0));
  CHECK(overlap_fraction(self, Timeline()) == doctest::Approx(0.0));
}

TEST_CASE("domain report: engineered SNR gap separates the quartiles") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "diar_test_report";
  fs::remove_all(dir);

  synth::SynthSpec spec;
  spec.seed = 404;
  spec.with_wav = true;
  synth::DomainSpec quiet;
  quiet.name = "quiet";
  quiet.n_recordings = 2;
  quiet.min_speakers = quiet.max_speakers = 2;
  quiet.overlap_pct = 10.0;
  quiet.snr_db = 25.0;
  quiet.recording_duration = 20.0;
  synth::DomainSpec noisy = quiet;
  noisy.name = "noisy";
  noisy.snr_db = 5.0;
  spec.domains = {quiet, noisy};

  const auto corpus = synth::gen_corpus(spec, (dir / "corpus").string());
  const DomainReport report =
      build_domain_report(corpus.manifest, (dir / "out").string());
  REQUIRE(report.rows.size() == 2);
  const auto &q = report.rows[0].domain == "quiet" ? report.rows[0] : report.rows[1];
  const auto &n = report.rows[0].domain == "quiet" ? report.rows[1] : report.rows[0];
  REQUIRE(q.has_snr);
  REQUIRE(n.has_snr);
  // 20 dB engineered gap, allow slack for speech-gap dilution: >= 10 dB apart
  CHECK(q.snr_quartiles[1] - n.snr_quartiles[1] >= 10.0);
  CHECK(fs::exists(dir / "out" / "snr.csv"));
  CHECK(fs::exists(dir / "out" / "speech_ratio.csv"));
  CHECK(fs::exists(dir / "out" / "overlap.csv"));
  CHECK(fs::exists(dir / "out" / "ltas_quiet.csv"));
}

TEST_CASE("domain report tolerates a missing WAV") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "diar_test_report_missing";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream lab(dir / "r.lab");
    lab << "0.0 8.0 speech\n";
  }
  {
    std::ofstream m(dir / "m.cfg");
    m << "recording.r.sad = r.lab\n"
      << "recording.r.domain = solo\n"
      << "recording.r.duration = 10.0\n";
  }
  const Manifest manifest = Manifest::load((dir / "m.cfg").string());
  const DomainReport report = build_domain_report(manifest, (dir / "out").string());
  REQUIRE(report.rows.size() == 1);
  CHECK_FALSE(report.rows[0].has_snr);
  CHECK(report.rows[0].mean_speech_ratio == doctest::Approx(80.0));
  CHECK_FALSE(report.warnings.empty());
}
