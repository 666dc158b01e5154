// diar/wav.hpp

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

#ifndef DIAR_WAV_HPP_
#define DIAR_WAV_HPP_

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "diar/error.hpp"

namespace diar {
namespace formats {

struct WavData {
  std::vector<double> samples;  // in [-1, 1]; interleaved when channels > 1
  int sample_rate = 0;
  int channels = 0;

  std::size_t frames() const {
    return channels > 0 ? samples.size() / channels : 0;
  }
};

/// Reads a RIFF/WAVE container holding PCM 16-bit or IEEE float 32-bit data.
/// 16-bit samples are scaled by 1/32768. When `downmix_mono` is set, stereo
/// is reduced by the arithmetic mean of the channels.
WavData read_wav_pcm(std::istream &is, bool downmix_mono = false);
WavData read_wav_file(const std::string &path, bool downmix_mono = false);

/// Writes mono PCM 16-bit; samples are clamped to [-1, 1] and scaled by 32767.
void write_wav_pcm16(std::ostream &os, const std::vector<double> &samples,
                     int sample_rate);
void write_wav_file(const std::string &path, const std::vector<double> &samples,
                    int sample_rate);

}  // namespace formats
}  // namespace diar

#endif  // DIAR_WAV_HPP_
