// src/core.cpp

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

#include "diar/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace diar {

void Turn::validate() const {
  if (recording_id.empty()) throw InvalidArgument("Turn: empty recording_id");
  if (speaker_id.empty()) throw InvalidArgument("Turn: empty speaker_id");
  if (!(onset >= 0.0) || !std::isfinite(onset))
    throw InvalidArgument("Turn: onset must be finite and non-negative, got " +
                          std::to_string(onset));
  if (!(duration > 0.0) || !std::isfinite(duration))
    throw InvalidArgument("Turn: duration must be finite and positive, got " +
                          std::to_string(duration));
}

Timeline Timeline::canonicalize(const std::vector<Interval> &raw) {
  for (const auto &iv : raw) {
    if (!std::isfinite(iv.onset) || !std::isfinite(iv.offset))
      throw InvalidArgument("Timeline: non-finite interval bound");
    if (iv.onset < 0.0)
      throw InvalidArgument("Timeline: negative onset " + std::to_string(iv.onset));
    if (iv.offset <= iv.onset)
      throw InvalidArgument("Timeline: offset must exceed onset, got [" +
                            std::to_string(iv.onset) + ", " +
                            std::to_string(iv.offset) + ")");
  }
  std::vector<Interval> sorted = raw;
  std::sort(sorted.begin(), sorted.end(), [](const Interval &a, const Interval &b) {
    return a.onset < b.onset || (a.onset == b.onset && a.offset < b.offset);
  });
  Timeline out;
  for (const auto &iv : sorted) {
    if (!out.intervals_.empty() && iv.onset <= out.intervals_.back().offset) {
      out.intervals_.back().offset = std::max(out.intervals_.back().offset, iv.offset);
    } else {
      out.intervals_.push_back(iv);
    }
  }
  return out;
}

double Timeline::total() const {
  double t = 0.0;
  for (const auto &iv : intervals_) t += iv.duration();
  return t;
}

Timeline timeline_intersect(const Timeline &a, const Timeline &b) {
  Timeline out;
  std::size_t i = 0, j = 0;
  while (i < a.intervals_.size() && j < b.intervals_.size()) {
    const Interval &x = a.intervals_[i];
    const Interval &y = b.intervals_[j];
    const double lo = std::max(x.onset, y.onset);
    const double hi = std::min(x.offset, y.offset);
    if (hi > lo) out.intervals_.push_back({lo, hi});
    if (x.offset < y.offset)
      ++i;
    else
      ++j;
  }
  return out;
}

Timeline timeline_union(const Timeline &a, const Timeline &b) {
  std::vector<Interval> merged = a.intervals_;
  merged.insert(merged.end(), b.intervals_.begin(), b.intervals_.end());
  if (merged.empty()) return Timeline();
  return Timeline::canonicalize(merged);
}

Timeline timeline_subtract(const Timeline &a, const Timeline &b) {
  Timeline out;
  std::size_t j = 0;
  for (const auto &x : a.intervals_) {
    double cursor = x.onset;
    while (j < b.intervals_.size() && b.intervals_[j].offset <= x.onset) ++j;
    std::size_t k = j;
    while (k < b.intervals_.size() && b.intervals_[k].onset < x.offset) {
      if (b.intervals_[k].onset > cursor)
        out.intervals_.push_back({cursor, b.intervals_[k].onset});
      cursor = std::max(cursor, b.intervals_[k].offset);
      ++k;
    }
    if (cursor < x.offset) out.intervals_.push_back({cursor, x.offset});
  }
  return out;
}

Annotation::Annotation(std::string recording_id, std::vector<Turn> turns)
    : recording_id_(std::move(recording_id)), turns_(std::move(turns)) {
  for (const auto &t : turns_) {
    t.validate();
    if (t.recording_id != recording_id_)
      throw InvalidArgument("Annotation: turn recording_id '" + t.recording_id +
                            "' does not match annotation '" + recording_id_ + "'");
  }
  sort_turns();
}

void Annotation::add(Turn t) {
  t.validate();
  if (recording_id_.empty()) recording_id_ = t.recording_id;
  if (t.recording_id != recording_id_)
    throw InvalidArgument("Annotation: turn recording_id '" + t.recording_id +
                          "' does not match annotation '" + recording_id_ + "'");
  turns_.push_back(std::move(t));
  sort_turns();
}

void Annotation::sort_turns() {
  std::stable_sort(turns_.begin(), turns_.end(), [](const Turn &a, const Turn &b) {
    if (a.onset != b.onset) return a.onset < b.onset;
    return a.speaker_id < b.speaker_id;
  });
}

std::vector<std::string> Annotation::speakers() const {
  std::set<std::string> uniq;
  for (const auto &t : turns_) uniq.insert(t.speaker_id);
  return {uniq.begin(), uniq.end()};
}

Timeline Annotation::speaker_timeline(const std::string &speaker) const {
  std::vector<Interval> ivs;
  for (const auto &t : turns_)
    if (t.speaker_id == speaker) ivs.push_back({t.onset, t.offset()});
  if (ivs.empty()) return Timeline();
  return Timeline::canonicalize(ivs);
}

Timeline Annotation::support() const {
  std::vector<Interval> ivs;
  ivs.reserve(turns_.size());
  for (const auto &t : turns_) ivs.push_back({t.onset, t.offset()});
  if (ivs.empty()) return Timeline();
  return Timeline::canonicalize(ivs);
}

Annotation annotation_crop(const Annotation &ann, const Timeline &region) {
  std::vector<Turn> cropped;
  for (const auto &t : ann.turns()) {
    for (const auto &r : region.intervals()) {
      const double lo = std::max(t.onset, r.onset);
      const double hi = std::min(t.offset(), r.offset);
      if (hi - lo > kTimeEpsilon)
        cropped.emplace_back(t.recording_id, t.speaker_id, lo, hi - lo);
    }
  }
  return Annotation(ann.recording_id(), std::move(cropped));
}

namespace {
const char *kDihardDomains[] = {
    "Audiobooks",    "Broadcast Interview",  "Clinical",
    "Courtroom",     "CTS",                  "Map Task",
    "Meeting",       "Restaurant",           "Sociolinguistic Field",
    "Sociolinguistic Lab",                   "Web Video",
};
}  // namespace

DomainRegistry::DomainRegistry() {
  for (const char *d : kDihardDomains) register_domain(d);
  register_domain("unknown");
}

std::string DomainRegistry::fold(const std::string &s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

const std::string &DomainRegistry::register_domain(const std::string &name) {
  if (name.empty()) throw InvalidArgument("DomainRegistry: empty domain name");
  const std::string f = fold(name);
  for (std::size_t i = 0; i < folded_.size(); ++i)
    if (folded_[i] == f) return names_[i];
  names_.push_back(name);
  folded_.push_back(f);
  return names_.back();
}

bool DomainRegistry::contains(const std::string &name) const {
  const std::string f = fold(name);
  for (const auto &g : folded_)
    if (g == f) return true;
  return false;
}

const std::string &DomainRegistry::resolve(const std::string &name) const {
  const std::string f = fold(name);
  for (std::size_t i = 0; i < folded_.size(); ++i)
    if (folded_[i] == f) return names_[i];
  throw InvalidArgument("DomainRegistry: unknown domain '" + name + "'");
}

std::size_t DomainRegistry::order_of(const std::string &name) const {
  const std::string f = fold(name);
  for (std::size_t i = 0; i < folded_.size(); ++i)
    if (folded_[i] == f) return i;
  throw InvalidArgument("DomainRegistry: unknown domain '" + name + "'");
}

void RecordingMeta::validate(const std::set<int> &allowed_rates) const {
  if (id.empty()) throw InvalidArgument("RecordingMeta: empty id");
  if (!allowed_rates.count(sample_rate))
    throw InvalidArgument("RecordingMeta: unsupported sample rate " +
                          std::to_string(sample_rate));
  if (sad && sad->total() > duration + kTimeEpsilon)
    throw InvalidArgument("RecordingMeta: SAD total exceeds recording duration");
}

}  // namespace diar
