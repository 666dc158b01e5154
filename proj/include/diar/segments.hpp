// diar/segments.hpp

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

#ifndef DIAR_SEGMENTS_HPP_
#define DIAR_SEGMENTS_HPP_

#include <string>
#include <vector>

#include "diar/core.hpp"

namespace diar {
namespace diarize {

struct Segment {
  double onset = 0.0;
  double duration = 0.0;
  double offset() const { return onset + duration; }
};

struct SegmentGrid {
  std::string recording_id;
  std::vector<Segment> segments;
  std::vector<std::string> warnings;  // dropped sub-minimum SAD slivers
};

struct SegmentSpec {
  double win_len = 1.5;
  double shift = 0.25;
  double min_len = 0.25;
};

/// Sliding windows inside each SAD interval at offsets 0, shift, 2*shift, ...
/// A shorter final window covers any uncovered tail when it is at least
/// min_len long; otherwise the previous window absorbs the tail. SAD
/// intervals shorter than min_len are dropped with a warning.
SegmentGrid slide_segments(const std::string &recording_id, const Timeline &sad,
                           const SegmentSpec &spec = {});

/// Stable key used to look up a segment in external embedding files:
/// "<recording>/<onset>/<duration>" with 3-decimal fixed-point times.
std::string segment_key(const std::string &recording_id, const Segment &seg);

}  // namespace diarize
}  // namespace diar

#endif  // DIAR_SEGMENTS_HPP_
