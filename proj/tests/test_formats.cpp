#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "diar/embeddings.hpp"
#include "diar/manifest.hpp"
#include "diar/rng.hpp"
#include "diar/rttm.hpp"
#include "diar/uem.hpp"
#include "diar/wav.hpp"

using namespace diar;
using namespace diar::formats;

TEST_CASE("rttm parses a SPEAKER row") {
  std::istringstream in("SPEAKER rec1 1 0.500 2.000 <NA> <NA> spkA <NA> <NA>\n");
  const auto anns = parse_rttm(in);
  REQUIRE(anns.size() == 1);
  const auto &ann = anns.at("rec1");
  REQUIRE(ann.turns().size() == 1);
  CHECK(ann.turns()[0].speaker_id == "spkA");
  CHECK(ann.turns()[0].onset == doctest::Approx(0.5));
  CHECK(ann.turns()[0].duration == doctest::Approx(2.0));
}

TEST_CASE("rttm empty stream yields empty map") {
  std::istringstream in("");
  CHECK(parse_rttm(in).empty());
}

TEST_CASE("rttm rejects zero duration with the line number") {
  std::istringstream in(
      "SPEAKER rec1 1 0.500 1.000 <NA> <NA> spkA <NA> <NA>\n"
      "SPEAKER rec1 1 2.000 0.000 <NA> <NA> spkA <NA> <NA>\n");
  try {
    parse_rttm(in);
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("rttm rejects short rows and non-SPEAKER types") {
  std::istringstream a("SPEAKER rec1 1 0.5\n");
  CHECK_THROWS_AS(parse_rttm(a), ParseError);
  std::istringstream b("LEXEME rec1 1 0.5 1.0 <NA> <NA> w <NA> <NA>\n");
  CHECK_THROWS_AS(parse_rttm(b), ParseError);
}

TEST_CASE("rttm write-parse round trip is the identity, write is canonical") {
  Annotation ann("rec1");
  ann.add(Turn("rec1", "b", 3.25, 1.5));
  ann.add(Turn("rec1", "a", 0.5, 2.0));
  std::map<std::string, Annotation> anns{{"rec1", ann}};

  std::ostringstream out1;
  write_rttm(out1, anns);
  std::istringstream back(out1.str());
  const auto reparsed = parse_rttm(back);
  std::ostringstream out2;
  write_rttm(out2, reparsed);
  CHECK(out1.str() == out2.str());  // byte-identical canonical form
  CHECK(out1.str().find("SPEAKER rec1 1 0.500 2.000") == 0);
}

TEST_CASE("rttm parser fuzz: mutated lines never crash, errors carry positions") {
  const std::string base = "SPEAKER rec1 1 0.500 2.000 <NA> <NA> spkA <NA> <NA>";
  Rng rng(123);
  int rejects = 0;
  for (int i = 0; i < 2000; ++i) {
    std::string line = base;
    const int n_mut = rng.uniform_int(1, 4);
    for (int m = 0; m < n_mut; ++m) {
      const auto pos = static_cast<std::size_t>(rng.below(line.size()));
      const char c = static_cast<char>(32 + rng.below(95));
      switch (rng.below(3)) {
        case 0: line[pos] = c; break;
        case 1: line.insert(pos, 1, c); break;
        default: line.erase(pos, 1); break;
      }
    }
    std::istringstream in(line + "\n");
    try {
      parse_rttm(in);
    } catch (const ParseError &e) {
      CHECK(e.line() == 1);
      ++rejects;
    }
  }
  CHECK(rejects > 0);
}

TEST_CASE("uem parses and merges touching rows") {
  std::istringstream in(
      "rec1 1 0.00 300.00\n"
      "rec2 1 10.0 20.0\n"
      "rec2 1 20.0 30.0\n");
  const auto uem = parse_uem(in);
  CHECK(uem.at("rec1").intervals()[0] == Interval{0, 300});
  REQUIRE(uem.at("rec2").size() == 1);
  CHECK(uem.at("rec2").intervals()[0] == Interval{10, 30});
}

TEST_CASE("uem sorts out-of-order rows and rejects inverted intervals") {
  std::istringstream in("rec 1 5.0 6.0\nrec 1 1.0 2.0\n");
  const auto uem = parse_uem(in);
  CHECK(uem.at("rec").intervals()[0] == Interval{1, 2});

  std::istringstream bad("rec 1 6.0 5.0\n");
  try {
    parse_uem(bad);
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 1);
  }
}

TEST_CASE("sad lab parsing keeps speech rows only") {
  std::istringstream in(
      "0.00 1.50 speech\n"
      "1.50 2.00 nonspeech\n"
      "2.00 3.00 speech\n");
  const Timeline sad = parse_sad_lab(in);
  REQUIRE(sad.size() == 2);
  CHECK(sad.total() == doctest::Approx(2.5));
}

TEST_CASE("wav 16-bit scaling and round trip") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "diar_test_wav";
  fs::create_directories(dir);
  const std::string path = (dir / "tone.wav").string();

  std::vector<double> samples(16000);
  samples[0] = 16384.0 / 32768.0;  // exactly representable
  for (std::size_t i = 1; i < samples.size(); ++i)
    samples[i] = 0.25 * std::sin(2.0 * 3.14159265358979 * 440.0 * i / 16000.0);
  write_wav_file(path, samples, 16000);

  const WavData wav = read_wav_file(path);
  CHECK(wav.sample_rate == 16000);
  CHECK(wav.channels == 1);
  CHECK(wav.samples.size() == 16000);  // 1 second at 16 kHz
  CHECK(wav.samples[0] == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("wav sample value 16384 decodes to 0.5") {
  // hand-assembled minimal file, one 16-bit sample of 16384
  std::ostringstream os;
  std::vector<double> one{16384.0 / 32768.0};
  write_wav_pcm16(os, one, 16000);
  std::istringstream is(os.str());
  const WavData wav = read_wav_pcm(is);
  REQUIRE(wav.samples.size() == 1);
  CHECK(wav.samples[0] == doctest::Approx(16384.0 / 32768.0).epsilon(1e-6));
}

TEST_CASE("wav truncated data chunk reports expected vs actual") {
  std::ostringstream os;
  std::vector<double> samples(100, 0.1);
  write_wav_pcm16(os, samples, 8000);
  std::string bytes = os.str();
  bytes.resize(bytes.size() - 50);  // chop the tail
  std::istringstream is(bytes);
  try {
    read_wav_pcm(is);
    FAIL("expected FormatError");
  } catch (const FormatError &e) {
    const std::string msg = e.what();
    CHECK(msg.find("truncated data chunk") != std::string::npos);
    CHECK(msg.find("200") != std::string::npos);  // expected byte count
    CHECK(msg.find("150") != std::string::npos);  // actual byte count
  }
}

TEST_CASE("wav rejects non-PCM codecs") {
  std::ostringstream os;
  write_wav_pcm16(os, {0.0, 0.0}, 8000);
  std::string bytes = os.str();
  bytes[20] = 0x06;  // format tag -> a-law
  std::istringstream is(bytes);
  CHECK_THROWS_AS(read_wav_pcm(is), FormatError);
}

TEST_CASE("wav stereo downmix is the channel mean") {
  // hand-build a stereo PCM16 file with L=0.5, R=-0.5
  std::ostringstream os;
  auto u16 = [&](std::uint16_t v) {
    os.put(static_cast<char>(v & 0xff));
    os.put(static_cast<char>(v >> 8));
  };
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  os.write("RIFF", 4);
  u32(36 + 8);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  u32(16);
  u16(1);      // pcm
  u16(2);      // stereo
  u32(16000);  // rate
  u32(16000 * 4);
  u16(4);
  u16(16);
  os.write("data", 4);
  u32(8);
  u16(16384);
  u16(static_cast<std::uint16_t>(-16384));
  u16(16384);
  u16(static_cast<std::uint16_t>(-16384));

  std::istringstream is(os.str());
  const WavData wav = read_wav_pcm(is, /*downmix_mono=*/true);
  CHECK(wav.channels == 1);
  REQUIRE(wav.samples.size() == 2);
  CHECK(wav.samples[0] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("emb1 payload layout matches the documented arithmetic") {
  EmbeddingSet set(2);
  Eigen::VectorXd v(2);
  v << 1.0, -1.0;
  set.add("r1", v);
  std::ostringstream os;
  write_emb1(os, set);
  // 4 magic + 4 dim + 4 count + 2 keylen + 2 key + 8 floats = 24 bytes
  CHECK(os.str().size() == 24);

  std::istringstream is(os.str());
  const EmbeddingSet back = read_emb1(is);
  CHECK(back.dim() == 2);
  CHECK(back.at("r1")(0) == doctest::Approx(1.0));
  CHECK(back.at("r1")(1) == doctest::Approx(-1.0));
}

TEST_CASE("emb1 rejects bad magic, NaN components and duplicate keys") {
  EmbeddingSet set(2);
  Eigen::VectorXd v(2);
  v << 0.0, 1.0;
  set.add("k", v);
  std::ostringstream os;
  write_emb1(os, set);

  std::string bytes = os.str();
  bytes[0] = 'X';
  std::istringstream bad_magic(bytes);
  CHECK_THROWS_AS(read_emb1(bad_magic), BadMagicError);

  Eigen::VectorXd nan_v(2);
  nan_v << 0.0, std::nan("");
  CHECK_THROWS_AS(set.add("n", nan_v), NonFiniteError);
  CHECK_THROWS_AS(set.add("k", v), InvalidArgument);

  Eigen::VectorXd wrong(3);
  wrong << 1, 2, 3;
  CHECK_THROWS_AS(set.add("w", wrong), DimMismatchError);
}

TEST_CASE("emb1 binary round trip stays within float32 quantization") {
  Rng rng(99);
  EmbeddingSet set(8);
  for (int r = 0; r < 100; ++r) {
    Eigen::VectorXd v(8);
    for (int d = 0; d < 8; ++d) v(d) = rng.normal() * std::pow(10.0, rng.uniform_int(-3, 3));
    set.add("row" + std::to_string(r), v);
  }
  std::ostringstream os;
  write_emb1(os, set);
  std::istringstream is(os.str());
  const EmbeddingSet back = read_emb1(is);
  REQUIRE(back.size() == set.size());
  double worst_rel = 0.0;
  for (std::size_t r = 0; r < set.size(); ++r)
    for (int d = 0; d < 8; ++d) {
      const double a = set.row(r)(d), b = back.row(r)(d);
      if (a != 0.0) worst_rel = std::max(worst_rel, std::fabs(a - b) / std::fabs(a));
    }
  CHECK(worst_rel <= 1.2e-7);  // float32 mantissa
}

TEST_CASE("embeddings tsv round trip preserves 8 significant digits") {
  EmbeddingSet set(3);
  Eigen::VectorXd v(3);
  v << 0.12345678, -9876.5432, 1e-5;
  set.add("a/1.000/2.000", v);
  std::ostringstream os;
  write_embeddings_tsv(os, set);
  std::istringstream is(os.str());
  const EmbeddingSet back = read_embeddings_tsv(is);
  std::ostringstream os2;
  write_embeddings_tsv(os2, back);
  CHECK(os.str() == os2.str());
}

TEST_CASE("manifest load rejects missing files and unknown keys") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "diar_test_manifest";
  fs::create_directories(dir);
  {
    std::ofstream lab(dir / "r.lab");
    lab << "0.0 5.0 speech\n";
  }
  {
    std::ofstream m(dir / "ok.cfg");
    m << "recording.r.sad = r.lab\n"
      << "recording.r.split = dev\n"
      << "recording.r.duration = 10.0\n";
  }
  const Manifest ok = Manifest::load((dir / "ok.cfg").string());
  CHECK(ok.entries().size() == 1);
  CHECK(ok.at("r").split == "dev");

  {
    std::ofstream m(dir / "missing.cfg");
    m << "recording.r.sad = nowhere.lab\n";
  }
  CHECK_THROWS_AS(Manifest::load((dir / "missing.cfg").string()), ParseError);

  {
    std::ofstream m(dir / "unknown.cfg");
    m << "recording.r.wibble = 3\n";
  }
  CHECK_THROWS_AS(Manifest::load((dir / "unknown.cfg").string()), ParseError);

  {
    std::ofstream m(dir / "dup.cfg");
    m << "recording.r.split = dev\nrecording.r.split = eval\n";
  }
  CHECK_THROWS_AS(Manifest::load((dir / "dup.cfg").string()), ParseError);
}

TEST_CASE("manifest save-load round trip") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "diar_test_manifest2";
  fs::create_directories(dir);
  {
    std::ofstream lab(dir / "r.lab");
    lab << "0.0 5.0 speech\n";
  }
  Manifest m;
  ManifestEntry e;
  e.meta.id = "r";
  e.meta.duration = 12.5;
  e.meta.domain = "Meeting";
  e.sad = (dir / "r.lab").string();
  e.split = "eval";
  e.core = false;
  m.add(e);
  const std::string path = (dir / "m.cfg").string();
  m.save(path);
  const Manifest back = Manifest::load(path);
  CHECK(back.at("r").split == "eval");
  CHECK(back.at("r").core == false);
  CHECK(back.at("r").meta.domain.value() == "Meeting");
  CHECK(back.at("r").meta.duration == doctest::Approx(12.5));
}
