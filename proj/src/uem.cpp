// src/uem.cpp

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

#include "diar/uem.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace diar {
namespace formats {

namespace {

double parse_time(const std::string &s, const char *what, std::size_t lineno) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception &) {
    throw ParseError(std::string("bad ") + what + " field '" + s + "'", lineno);
  }
  if (pos != s.size() || !std::isfinite(v))
    throw ParseError(std::string("bad ") + what + " field '" + s + "'", lineno);
  return v;
}

void check_interval(double onset, double offset, std::size_t lineno) {
  if (onset < 0.0) throw ParseError("negative onset", lineno);
  if (offset <= onset)
    throw ParseError("offset " + std::to_string(offset) +
                         " must exceed onset " + std::to_string(onset),
                     lineno);
}

}  // namespace

std::map<std::string, Timeline> parse_uem(std::istream &is) {
  std::map<std::string, std::vector<Interval>> raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == ';' || line[0] == '#') continue;
    std::istringstream iss(line);
    std::string rec, chan, onset_s, offset_s, extra;
    if (!(iss >> rec >> chan >> onset_s >> offset_s))
      throw ParseError("UEM: expected 4 fields 'recording channel onset offset'",
                       lineno);
    if (iss >> extra)
      throw ParseError("UEM: trailing field '" + extra + "'", lineno);
    const double onset = parse_time(onset_s, "onset", lineno);
    const double offset = parse_time(offset_s, "offset", lineno);
    check_interval(onset, offset, lineno);
    raw[rec].push_back({onset, offset});
  }
  std::map<std::string, Timeline> out;
  for (const auto &[rec, ivs] : raw) out.emplace(rec, Timeline::canonicalize(ivs));
  return out;
}

std::map<std::string, Timeline> parse_uem_file(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open UEM file: " + path);
  return parse_uem(f);
}

Timeline parse_sad_lab(std::istream &is) {
  std::vector<Interval> raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == ';' || line[0] == '#') continue;
    std::istringstream iss(line);
    std::string onset_s, offset_s, label;
    if (!(iss >> onset_s >> offset_s >> label))
      throw ParseError("SAD lab: expected 3 fields 'onset offset label'", lineno);
    const double onset = parse_time(onset_s, "onset", lineno);
    const double offset = parse_time(offset_s, "offset", lineno);
    check_interval(onset, offset, lineno);
    if (label == "speech") raw.push_back({onset, offset});
    // non-speech rows are permitted and ignored
  }
  if (raw.empty()) return Timeline();
  return Timeline::canonicalize(raw);
}

Timeline parse_sad_lab_file(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open SAD lab file: " + path);
  return parse_sad_lab(f);
}

void write_uem(std::ostream &os, const std::map<std::string, Timeline> &uem) {
  char buf[64];
  for (const auto &[rec, tl] : uem) {
    for (const auto &iv : tl.intervals()) {
      std::snprintf(buf, sizeof(buf), "%.3f %.3f", iv.onset, iv.offset);
      os << rec << " 1 " << buf << "\n";
    }
  }
}

void write_sad_lab(std::ostream &os, const Timeline &sad) {
  char buf[64];
  for (const auto &iv : sad.intervals()) {
    std::snprintf(buf, sizeof(buf), "%.3f %.3f", iv.onset, iv.offset);
    os << buf << " speech\n";
  }
}

void write_sad_lab_file(const std::string &path, const Timeline &sad) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open SAD lab file for writing: " + path);
  write_sad_lab(f, sad);
  if (!f) throw IoError("failed writing SAD lab file: " + path);
}

}  // namespace formats
}  // namespace diar
