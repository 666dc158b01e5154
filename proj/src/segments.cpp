// src/segments.cpp

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

#include "diar/segments.hpp"

#include <cmath>
#include <cstdio>

namespace diar {
namespace diarize {

SegmentGrid slide_segments(const std::string &recording_id, const Timeline &sad,
                           const SegmentSpec &spec) {
  if (!(spec.min_len > 0.0) || spec.win_len < spec.min_len || !(spec.shift > 0.0))
    throw InvalidArgument("slide_segments: need win_len >= min_len > 0 and shift > 0");
  if (sad.empty()) throw DataError("slide_segments: empty SAD for " + recording_id);

  SegmentGrid grid;
  grid.recording_id = recording_id;
  char buf[160];
  for (const auto &iv : sad.intervals()) {
    const double len = iv.duration();
    if (len + kTimeEpsilon < spec.min_len) {
      std::snprintf(buf, sizeof(buf),
                    "%s: SAD interval [%.3f, %.3f) shorter than min segment "
                    "length %.3f, dropped",
                    recording_id.c_str(), iv.onset, iv.offset, spec.min_len);
      grid.warnings.emplace_back(buf);
      continue;
    }
    if (len <= spec.win_len + kTimeEpsilon) {
      grid.segments.push_back({iv.onset, len});
      continue;
    }
    const std::size_t n_full =
        static_cast<std::size_t>(std::floor((len - spec.win_len) / spec.shift + kTimeEpsilon)) + 1;
    for (std::size_t k = 0; k < n_full; ++k)
      grid.segments.push_back({iv.onset + static_cast<double>(k) * spec.shift, spec.win_len});
    const double covered = (static_cast<double>(n_full) - 1.0) * spec.shift + spec.win_len;
    if (covered + kTimeEpsilon < len) {
      const double tail_onset = iv.onset + static_cast<double>(n_full) * spec.shift;
      const double tail_len = iv.offset - tail_onset;
      if (tail_len + kTimeEpsilon >= spec.min_len) {
        grid.segments.push_back({tail_onset, tail_len});
      } else {
        // absorb the sliver into the last window
        grid.segments.back().duration = iv.offset - grid.segments.back().onset;
      }
    }
  }
  return grid;
}

std::string segment_key(const std::string &recording_id, const Segment &seg) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "/%.3f/%.3f", seg.onset, seg.duration);
  return recording_id + buf;
}

}  // namespace diarize
}  // namespace diar
