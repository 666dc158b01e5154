#include "doctest.h"

#include "diar/core.hpp"
#include "diar/rng.hpp"

using namespace diar;

namespace {
Timeline tl(std::initializer_list<Interval> ivs) {
  return Timeline::canonicalize(std::vector<Interval>(ivs));
}
}  // namespace

TEST_CASE("timeline canonicalize merges overlaps") {
  const Timeline t = tl({{0, 1}, {0.5, 2}});
  REQUIRE(t.size() == 1);
  CHECK(t.intervals()[0] == Interval{0, 2});
}

TEST_CASE("timeline canonicalize sorts") {
  const Timeline t = tl({{3, 4}, {0, 1}});
  REQUIRE(t.size() == 2);
  CHECK(t.intervals()[0] == Interval{0, 1});
  CHECK(t.intervals()[1] == Interval{3, 4});
}

TEST_CASE("timeline canonicalize merges adjacency") {
  const Timeline t = tl({{0, 1}, {1, 2}});
  REQUIRE(t.size() == 1);
  CHECK(t.intervals()[0] == Interval{0, 2});
}

TEST_CASE("timeline canonicalize rejects bad intervals") {
  CHECK_THROWS_AS(tl({{1, 1}}), InvalidArgument);
  CHECK_THROWS_AS(tl({{2, 1}}), InvalidArgument);
  CHECK_THROWS_AS(tl({{-1, 1}}), InvalidArgument);
}

TEST_CASE("timeline canonicalize is idempotent and permutation invariant") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Interval> raw;
    const int n = rng.uniform_int(1, 12);
    for (int i = 0; i < n; ++i) {
      const double on = rng.uniform(0.0, 50.0);
      raw.push_back({on, on + rng.uniform(0.01, 10.0)});
    }
    const Timeline once = Timeline::canonicalize(raw);
    const Timeline twice = Timeline::canonicalize(once.intervals());
    CHECK(once == twice);

    const auto perm = rng.permutation(raw.size());
    std::vector<Interval> shuffled;
    for (const auto p : perm) shuffled.push_back(raw[p]);
    const Timeline reordered = Timeline::canonicalize(shuffled);
    CHECK(reordered == once);
    CHECK(reordered.total() == doctest::Approx(once.total()).epsilon(1e-12));
  }
}

TEST_CASE("timeline intersect basics") {
  CHECK(timeline_intersect(tl({{0, 2}}), tl({{1, 3}})) == tl({{1, 2}}));
  CHECK(timeline_intersect(tl({{0, 1}}), tl({{2, 3}})).empty());
  CHECK(timeline_intersect(tl({{0, 5}}), tl({{0, 5}})) == tl({{0, 5}}));
}

TEST_CASE("timeline intersect is commutative and associative") {
  Rng rng(11);
  auto random_tl = [&]() {
    std::vector<Interval> raw;
    const int n = rng.uniform_int(1, 8);
    for (int i = 0; i < n; ++i) {
      const double on = rng.uniform(0.0, 30.0);
      raw.push_back({on, on + rng.uniform(0.05, 8.0)});
    }
    return Timeline::canonicalize(raw);
  };
  for (int trial = 0; trial < 50; ++trial) {
    const Timeline a = random_tl(), b = random_tl(), c = random_tl();
    CHECK(timeline_intersect(a, b) == timeline_intersect(b, a));
    CHECK(timeline_intersect(timeline_intersect(a, b), c) ==
          timeline_intersect(a, timeline_intersect(b, c)));
    CHECK(timeline_intersect(a, b).total() <= std::min(a.total(), b.total()) + 1e-12);
  }
}

TEST_CASE("timeline subtract removes the intersection") {
  const Timeline a = tl({{0, 10}});
  const Timeline b = tl({{2, 3}, {5, 7}});
  CHECK(timeline_subtract(a, b) == tl({{0, 2}, {3, 5}, {7, 10}}));
  CHECK(timeline_subtract(a, a).empty());
  CHECK(timeline_subtract(a, Timeline()) == a);
}

TEST_CASE("annotation crop clips turns to the region") {
  Annotation ann("rec");
  ann.add(Turn("rec", "a", 0.0, 10.0));
  const Annotation cropped = annotation_crop(ann, tl({{2, 4}}));
  REQUIRE(cropped.turns().size() == 1);
  CHECK(cropped.turns()[0].onset == doctest::Approx(2.0));
  CHECK(cropped.turns()[0].duration == doctest::Approx(2.0));
}

TEST_CASE("annotation crop drops disjoint turns") {
  Annotation ann("rec");
  ann.add(Turn("rec", "a", 0.0, 1.0));
  CHECK(annotation_crop(ann, tl({{5, 6}})).empty());
}

TEST_CASE("annotation crop keeps overlap; per-speaker durations match the "
          "interval-arithmetic oracle") {
  Annotation ann("rec");
  ann.add(Turn("rec", "a", 0.0, 6.0));
  ann.add(Turn("rec", "b", 2.0, 6.0));
  const Timeline region = tl({{1, 3}, {4, 7}});
  const Annotation cropped = annotation_crop(ann, region);
  for (const auto &spk : ann.speakers()) {
    const double expected =
        timeline_intersect(ann.speaker_timeline(spk), region).total();
    CHECK(cropped.speaker_timeline(spk).total() ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  // a = [0,6], b = [2,8]: their overlap [2,6] cropped to [1,3) u [4,7)
  // leaves [2,3) and [4,6), 3 seconds of retained two-speaker time
  const Timeline both = timeline_intersect(cropped.speaker_timeline("a"),
                                           cropped.speaker_timeline("b"));
  CHECK(both.total() == doctest::Approx(3.0));
}

TEST_CASE("turn validation") {
  CHECK_THROWS_AS(Turn("rec", "spk", -0.5, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Turn("rec", "spk", 0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(Turn("", "spk", 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Turn("rec", "", 0.0, 1.0), InvalidArgument);
}

TEST_CASE("annotation keeps turns sorted by onset then speaker") {
  Annotation ann("rec");
  ann.add(Turn("rec", "b", 5.0, 1.0));
  ann.add(Turn("rec", "a", 5.0, 2.0));
  ann.add(Turn("rec", "c", 1.0, 1.0));
  REQUIRE(ann.turns().size() == 3);
  CHECK(ann.turns()[0].speaker_id == "c");
  CHECK(ann.turns()[1].speaker_id == "a");
  CHECK(ann.turns()[2].speaker_id == "b");
}

TEST_CASE("domain registry has the DIHARD domains plus unknown") {
  const DomainRegistry reg;
  CHECK(reg.names().size() == 12);
  CHECK(reg.contains("CTS"));
  CHECK(reg.contains("cts"));  // case-insensitive
  CHECK(reg.resolve("audiobooks") == "Audiobooks");
  CHECK(reg.order_of("Audiobooks") == 0);
  CHECK(reg.order_of("unknown") == 11);
  CHECK_THROWS_AS(reg.resolve("no-such-domain"), InvalidArgument);
}

TEST_CASE("domain registry registration is idempotent and extensible") {
  DomainRegistry reg;
  reg.register_domain("dom00");
  reg.register_domain("DOM00");  // case-insensitive duplicate
  CHECK(reg.names().size() == 13);
  CHECK(reg.order_of("dom00") == 12);
}

TEST_CASE("recording meta validation") {
  RecordingMeta meta;
  meta.id = "rec";
  meta.sample_rate = 16000;
  meta.duration = 10.0;
  CHECK_NOTHROW(meta.validate());
  meta.sample_rate = 11025;
  CHECK_THROWS_AS(meta.validate(), InvalidArgument);
  CHECK_NOTHROW(meta.validate({11025}));
  meta.sample_rate = 16000;
  meta.sad = tl({{0, 11}});
  CHECK_THROWS_AS(meta.validate(), InvalidArgument);
}
