// src/score.cpp

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

#include "diar/score.hpp"

#include <algorithm>
#include <cstdio>

#include "diar/assignment.hpp"

namespace diar {
namespace scoring {

namespace {

// Overlap duration matrix between per-speaker timelines, within the UEM.
Eigen::MatrixXd overlap_matrix(const Annotation &ref, const Annotation &sys,
                               const Timeline &uem,
                               std::vector<std::string> *ref_names,
                               std::vector<std::string> *sys_names) {
  *ref_names = ref.speakers();
  *sys_names = sys.speakers();
  Eigen::MatrixXd m(ref_names->size(), sys_names->size());
  std::vector<Timeline> ref_tl, sys_tl;
  for (const auto &r : *ref_names)
    ref_tl.push_back(timeline_intersect(ref.speaker_timeline(r), uem));
  for (const auto &s : *sys_names)
    sys_tl.push_back(timeline_intersect(sys.speaker_timeline(s), uem));
  for (std::size_t i = 0; i < ref_names->size(); ++i)
    for (std::size_t j = 0; j < sys_names->size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          timeline_intersect(ref_tl[i], sys_tl[j]).total();
  return m;
}

Timeline collar_regions(const Annotation &ref, double collar) {
  std::vector<Interval> ivs;
  for (const auto &t : ref.turns()) {
    ivs.push_back({std::max(0.0, t.onset - collar), t.onset + collar});
    ivs.push_back({std::max(0.0, t.offset() - collar), t.offset() + collar});
  }
  if (ivs.empty()) return Timeline();
  return Timeline::canonicalize(ivs);
}

}  // namespace

std::map<std::string, std::string> optimal_mapping(const Annotation &ref,
                                                   const Annotation &sys,
                                                   const Timeline &uem) {
  std::vector<std::string> ref_names, sys_names;
  const Eigen::MatrixXd overlap = overlap_matrix(ref, sys, uem, &ref_names, &sys_names);
  std::map<std::string, std::string> mapping;
  if (ref_names.empty() || sys_names.empty()) return mapping;
  const auto assignment = max_weight_assignment(overlap);
  for (std::size_t i = 0; i < ref_names.size(); ++i) {
    const int j = assignment[i];
    if (j >= 0 && overlap(static_cast<Eigen::Index>(i), j) > 0.0)
      mapping[ref_names[i]] = sys_names[static_cast<std::size_t>(j)];
  }
  return mapping;
}

ScoreRow der(const Annotation &ref, const Annotation &sys, const Timeline &uem,
             const DerOptions &opts) {
  Timeline scored = uem;
  if (opts.collar > 0.0)
    scored = timeline_subtract(scored, collar_regions(ref, opts.collar));
  const Annotation ref_c = annotation_crop(ref, scored);
  const Annotation sys_c = annotation_crop(sys, scored);

  std::vector<std::string> ref_names, sys_names;
  const Eigen::MatrixXd overlap =
      overlap_matrix(ref_c, sys_c, scored, &ref_names, &sys_names);
  std::map<std::size_t, std::size_t> map_rs;  // ref idx -> sys idx
  std::vector<int> inverse(sys_names.size(), -1);
  if (!ref_names.empty() && !sys_names.empty()) {
    const auto assignment = max_weight_assignment(overlap);
    for (std::size_t i = 0; i < ref_names.size(); ++i) {
      const int j = assignment[i];
      if (j >= 0 && overlap(static_cast<Eigen::Index>(i), j) > 0.0) {
        map_rs[i] = static_cast<std::size_t>(j);
        inverse[static_cast<std::size_t>(j)] = static_cast<int>(i);
      }
    }
  }

  // Event sweep: regions of constant speaker sets.
  std::map<std::string, std::size_t> ref_idx, sys_idx;
  for (std::size_t i = 0; i < ref_names.size(); ++i) ref_idx[ref_names[i]] = i;
  for (std::size_t j = 0; j < sys_names.size(); ++j) sys_idx[sys_names[j]] = j;

  struct Event {
    double time;
    bool is_end;
    bool is_ref;
    std::size_t speaker;
  };
  std::vector<Event> events;
  for (const auto &t : ref_c.turns()) {
    events.push_back({t.onset, false, true, ref_idx[t.speaker_id]});
    events.push_back({t.offset(), true, true, ref_idx[t.speaker_id]});
  }
  for (const auto &t : sys_c.turns()) {
    events.push_back({t.onset, false, false, sys_idx[t.speaker_id]});
    events.push_back({t.offset(), true, false, sys_idx[t.speaker_id]});
  }
  std::sort(events.begin(), events.end(), [](const Event &a, const Event &b) {
    if (a.time != b.time) return a.time < b.time;
    return a.is_end > b.is_end;  // close before open at identical times
  });

  std::vector<int> ref_count(ref_names.size(), 0), sys_count(sys_names.size(), 0);
  int nref = 0, nsys = 0, ncorrect = 0;
  double error_s = 0.0, miss_s = 0.0, fa_s = 0.0, denom = 0.0;

  auto pair_active = [&](std::size_t r) {
    const auto it = map_rs.find(r);
    return it != map_rs.end() && sys_count[it->second] > 0;
  };

  std::size_t e = 0;
  while (e < events.size()) {
    const double t0 = events[e].time;
    // account for the region that just ended
    // (handled below after advancing; here we process all events at t0)
    std::size_t k = e;
    while (k < events.size() && events[k].time == t0) {
      const Event &ev = events[k];
      const int delta = ev.is_end ? -1 : +1;
      if (ev.is_ref) {
        const bool was = ref_count[ev.speaker] > 0;
        ref_count[ev.speaker] += delta;
        const bool now = ref_count[ev.speaker] > 0;
        if (was != now) {
          nref += now ? 1 : -1;
          if (pair_active(ev.speaker)) ncorrect += now ? 1 : -1;
        }
      } else {
        const bool was = sys_count[ev.speaker] > 0;
        sys_count[ev.speaker] += delta;
        const bool now = sys_count[ev.speaker] > 0;
        if (was != now) {
          nsys += now ? 1 : -1;
          const int r = inverse[ev.speaker];
          if (r >= 0 && ref_count[static_cast<std::size_t>(r)] > 0)
            ncorrect += now ? 1 : -1;
        }
      }
      ++k;
    }
    if (k < events.size()) {
      const double d = events[k].time - t0;
      if (d > kTimeEpsilon && (nref > 0 || nsys > 0)) {
        denom += d * nref;
        const int worst = std::max(nref, nsys);
        error_s += d * (worst - ncorrect);
        miss_s += d * std::max(0, nref - nsys);
        fa_s += d * std::max(0, nsys - nref);
      }
    }
    e = k;
  }

  if (denom <= 0.0)
    throw DataError("der: no reference speech inside the scoring region for '" +
                    ref.recording_id() + "'");

  ScoreRow row;
  row.recording = ref.recording_id();
  row.ref_speech_s = denom;
  row.miss_s = miss_s;
  row.fa_s = fa_s;
  row.confusion_s = error_s - miss_s - fa_s;
  row.miss_pct = 100.0 * miss_s / denom;
  row.fa_pct = 100.0 * fa_s / denom;
  row.confusion_pct = 100.0 * row.confusion_s / denom;
  row.der_pct = 100.0 * error_s / denom;
  return row;
}

double jer(const Annotation &ref, const Annotation &sys, const Timeline &uem) {
  const auto ref_names = ref.speakers();
  if (ref_names.empty()) throw DataError("jer: reference has no speakers");
  const auto mapping = optimal_mapping(ref, sys, uem);
  double sum = 0.0;
  for (const auto &r : ref_names) {
    const Timeline ref_tl = timeline_intersect(ref.speaker_timeline(r), uem);
    double jer_i = 1.0;
    const auto it = mapping.find(r);
    if (it != mapping.end()) {
      const Timeline sys_tl = timeline_intersect(sys.speaker_timeline(it->second), uem);
      const double inter = timeline_intersect(ref_tl, sys_tl).total();
      const double uni = timeline_union(ref_tl, sys_tl).total();
      if (uni > 0.0) jer_i = 1.0 - inter / uni;
    }
    sum += jer_i;
  }
  return 100.0 * sum / static_cast<double>(ref_names.size());
}

ScoreRow score_recording(const Annotation &ref, const Annotation &sys,
                         const Timeline &uem, const DerOptions &opts) {
  ScoreRow row = der(ref, sys, uem, opts);
  const auto ref_names = ref.speakers();
  const auto mapping = optimal_mapping(ref, sys, uem);
  double sum = 0.0;
  for (const auto &r : ref_names) {
    const Timeline ref_tl = timeline_intersect(ref.speaker_timeline(r), uem);
    double jer_i = 1.0;
    const auto it = mapping.find(r);
    if (it != mapping.end()) {
      const Timeline sys_tl = timeline_intersect(sys.speaker_timeline(it->second), uem);
      const double inter = timeline_intersect(ref_tl, sys_tl).total();
      const double uni = timeline_union(ref_tl, sys_tl).total();
      if (uni > 0.0) jer_i = 1.0 - inter / uni;
    }
    row.speaker_jers.push_back(jer_i);
    sum += jer_i;
  }
  row.jer_pct = ref_names.empty() ? 0.0 : 100.0 * sum / ref_names.size();
  return row;
}

ScoreReport aggregate_scores(std::vector<ScoreRow> rows,
                             const std::vector<bool> &core_flags) {
  if (rows.size() != core_flags.size())
    throw InvalidArgument("aggregate_scores: flag count mismatch");
  ScoreReport report;

  auto aggregate = [&](const std::string &condition, auto include) {
    AggregateRow agg;
    agg.condition = condition;
    double err = 0.0, miss = 0.0, fa = 0.0, conf = 0.0, denom = 0.0;
    double jer_sum = 0.0;
    std::size_t jer_n = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!include(i)) continue;
      ++agg.n_recordings;
      miss += rows[i].miss_s;
      fa += rows[i].fa_s;
      conf += rows[i].confusion_s;
      err += rows[i].miss_s + rows[i].fa_s + rows[i].confusion_s;
      denom += rows[i].ref_speech_s;
      for (const double j : rows[i].speaker_jers) jer_sum += j;
      jer_n += rows[i].speaker_jers.size();
    }
    if (denom > 0.0) {
      agg.der_pct = 100.0 * err / denom;
      agg.miss_pct = 100.0 * miss / denom;
      agg.fa_pct = 100.0 * fa / denom;
      agg.confusion_pct = 100.0 * conf / denom;
    }
    agg.ref_speech_s = denom;
    if (jer_n > 0) agg.jer_pct = 100.0 * jer_sum / static_cast<double>(jer_n);
    return agg;
  };

  report.aggregates.push_back(aggregate("full", [](std::size_t) { return true; }));
  const bool any_core =
      std::any_of(core_flags.begin(), core_flags.end(), [](bool b) { return b; });
  if (any_core)
    report.aggregates.push_back(
        aggregate("core", [&](std::size_t i) { return core_flags[i]; }));

  for (std::size_t i = 0; i < rows.size(); ++i)
    rows[i].condition = core_flags[i] ? "core" : "full";
  report.rows = std::move(rows);
  return report;
}

void write_score_tsv(std::ostream &os, const ScoreReport &report) {
  os << "recording\tcondition\tder\tjer\tmiss\tfa\tconfusion\tref_speech_s\n";
  char buf[256];
  for (const auto &r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%s\t%s\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\n",
                  r.recording.c_str(), r.condition.c_str(), r.der_pct, r.jer_pct,
                  r.miss_pct, r.fa_pct, r.confusion_pct, r.ref_speech_s);
    os << buf;
  }
  for (const auto &a : report.aggregates) {
    std::snprintf(buf, sizeof(buf), "%s\t%s\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\n",
                  "ALL", a.condition.c_str(), a.der_pct, a.jer_pct, a.miss_pct,
                  a.fa_pct, a.confusion_pct, a.ref_speech_s);
    os << buf;
  }
}

}  // namespace scoring
}  // namespace diar
