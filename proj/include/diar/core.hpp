// diar/core.hpp

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

// Domain types and time-interval algebra shared by every other module.
// Timestamps are double-precision seconds; scoring-side equality uses
// kTimeEpsilon so that millisecond RTTM values never double-count a boundary.

#ifndef DIAR_CORE_HPP_
#define DIAR_CORE_HPP_

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "diar/error.hpp"

namespace diar {

inline constexpr double kTimeEpsilon = 1e-9;

/// One speaker-attributed interval of one recording (an RTTM row).
struct Turn {
  std::string recording_id;
  std::string speaker_id;
  double onset = 0.0;     // seconds, >= 0
  double duration = 0.0;  // seconds, > 0

  Turn() = default;
  Turn(std::string rec, std::string spk, double on, double dur)
      : recording_id(std::move(rec)),
        speaker_id(std::move(spk)),
        onset(on),
        duration(dur) {
    validate();
  }

  double offset() const { return onset + duration; }
  void validate() const;
};

struct Interval {
  double onset = 0.0;
  double offset = 0.0;
  double duration() const { return offset - onset; }
  bool operator==(const Interval &o) const = default;
};

/// Canonical disjoint, sorted interval set. Adjacent intervals are merged, so
/// equality of timelines is structural equality.
class Timeline {
 public:
  Timeline() = default;

  /// Builds the canonical form of `raw`; rejects empty or inverted intervals.
  static Timeline canonicalize(const std::vector<Interval> &raw);

  const std::vector<Interval> &intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  std::size_t size() const { return intervals_.size(); }

  double total() const;
  double span_onset() const { return intervals_.empty() ? 0.0 : intervals_.front().onset; }
  double span_offset() const { return intervals_.empty() ? 0.0 : intervals_.back().offset; }

  bool operator==(const Timeline &o) const = default;

  friend Timeline timeline_intersect(const Timeline &a, const Timeline &b);
  friend Timeline timeline_union(const Timeline &a, const Timeline &b);
  friend Timeline timeline_subtract(const Timeline &a, const Timeline &b);

 private:
  std::vector<Interval> intervals_;  // canonical
};

Timeline timeline_intersect(const Timeline &a, const Timeline &b);
Timeline timeline_union(const Timeline &a, const Timeline &b);
/// Pointwise a \ b.
Timeline timeline_subtract(const Timeline &a, const Timeline &b);

/// Speaker-attributed turns of one recording, kept sorted by (onset, speaker).
/// Overlap between turns is permitted.
class Annotation {
 public:
  Annotation() = default;
  explicit Annotation(std::string recording_id)
      : recording_id_(std::move(recording_id)) {}
  Annotation(std::string recording_id, std::vector<Turn> turns);

  const std::string &recording_id() const { return recording_id_; }
  const std::vector<Turn> &turns() const { return turns_; }
  bool empty() const { return turns_.empty(); }

  void add(Turn t);

  std::vector<std::string> speakers() const;
  /// Canonical timeline of one speaker's turns.
  Timeline speaker_timeline(const std::string &speaker) const;
  /// Canonical union of all turns (the annotated speech region).
  Timeline support() const;

 private:
  void sort_turns();

  std::string recording_id_;
  std::vector<Turn> turns_;
};

/// Restrict an annotation to `region`; turns may split into several pieces.
Annotation annotation_crop(const Annotation &ann, const Timeline &region);

/// Registry of acoustic-domain names. Initialized with the DIHARD III
/// domains plus "unknown"; lookups are case-insensitive; order of
/// registration defines the deterministic tie-break order used by the ADI
/// classifier.
class DomainRegistry {
 public:
  DomainRegistry();

  /// Adds a name if absent; returns its canonical spelling.
  const std::string &register_domain(const std::string &name);
  bool contains(const std::string &name) const;
  /// Canonical spelling for a case-insensitive match; throws if unknown.
  const std::string &resolve(const std::string &name) const;
  /// Position in registration order; throws if unknown.
  std::size_t order_of(const std::string &name) const;
  const std::vector<std::string> &names() const { return names_; }

 private:
  static std::string fold(const std::string &s);
  std::vector<std::string> names_;
  std::vector<std::string> folded_;
};

struct RecordingMeta {
  std::string id;
  int sample_rate = 16000;
  double duration = 0.0;
  std::optional<std::string> domain;
  std::optional<Timeline> sad;

  void validate(const std::set<int> &allowed_rates = {8000, 16000, 44100,
                                                      48000}) const;
};

}  // namespace diar

#endif  // DIAR_CORE_HPP_
