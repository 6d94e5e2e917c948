// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "soundtriage/dataio.h"

namespace soundtriage {
namespace {

using nlohmann::json;

constexpr double kPcmScale = 32767.0;

void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u16(std::ostream& os, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

std::uint32_t get_u32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

}  // namespace

void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               int sample_rate) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  put_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put_u32(os, 16);
  put_u16(os, 1);  // PCM
  put_u16(os, 1);  // mono
  put_u32(os, static_cast<std::uint32_t>(sample_rate));
  put_u32(os, static_cast<std::uint32_t>(sample_rate * 2));
  put_u16(os, 2);
  put_u16(os, 16);
  os.write("data", 4);
  put_u32(os, data_bytes);
  for (double s : samples) {
    const double clamped = std::max(-1.0, std::min(1.0, s));
    const auto v = static_cast<std::int16_t>(std::lround(clamped * kPcmScale));
    put_u16(os, static_cast<std::uint16_t>(v));
  }
  if (!os) throw FormatError("write failed for " + path.string());
}

std::vector<double> read_wav(const std::filesystem::path& path, int* sample_rate) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw FormatError(path.string() + ": not a RIFF/WAVE file");
  }
  std::size_t pos = 12;
  int rate = 0;
  bool have_fmt = false;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = get_u32(p + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw FormatError(path.string() + ": truncated chunk");
    if (std::memcmp(p + pos, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(path.string() + ": short fmt chunk");
      const auto format = get_u16(p + body);
      const auto channels = get_u16(p + body + 2);
      const auto bits = get_u16(p + body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw FormatError(path.string() + ": only 16-bit PCM mono is supported");
      }
      rate = static_cast<int>(get_u32(p + body + 4));
      have_fmt = true;
    } else if (std::memcmp(p + pos, "data", 4) == 0) {
      if (!have_fmt) throw FormatError(path.string() + ": data chunk before fmt chunk");
      std::vector<double> samples(size / 2);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(get_u16(p + body + 2 * i));
        samples[i] = v / kPcmScale;
      }
      if (sample_rate) *sample_rate = rate;
      return samples;
    }
    pos = body + size + (size & 1);
  }
  throw FormatError(path.string() + ": no data chunk");
}

std::string annotation_to_jsonl(const ClipAnnotation& annotation) {
  json events = json::array();
  for (const auto& ev : annotation.events) {
    events.push_back({{"class", ev.class_index}, {"onset", ev.onset}, {"offset", ev.offset}});
  }
  json j = {{"clip_id", annotation.clip_id}, {"duration", annotation.duration}, {"events", events}};
  return j.dump();
}

ClipAnnotation annotation_from_jsonl(const std::string& line) {
  try {
    const json j = json::parse(line);
    ClipAnnotation a;
    a.clip_id = j.at("clip_id").get<std::string>();
    a.duration = j.at("duration").get<double>();
    for (const auto& e : j.at("events")) {
      a.events.push_back({e.at("class").get<int>(), e.at("onset").get<double>(),
                          e.at("offset").get<double>()});
    }
    return a;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed annotation line: ") + e.what());
  }
}

void write_annotations(const std::filesystem::path& path,
                       const std::vector<ClipAnnotation>& annotations) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  for (const auto& a : annotations) os << annotation_to_jsonl(a) << '\n';
}

std::vector<ClipAnnotation> read_annotations(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  std::vector<ClipAnnotation> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(annotation_from_jsonl(line));
  }
  return out;
}

void write_class_names(const std::filesystem::path& path, const std::vector<std::string>& names) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os << json(names).dump() << '\n';
}

std::vector<std::string> read_class_names(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(is).get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir / "clips");
  std::vector<ClipAnnotation> annotations;
  for (const auto& clip : dataset.clips) {
    write_wav(dir / "clips" / (clip.annotation.clip_id + ".wav"), clip.waveform,
              dataset.sample_rate);
    annotations.push_back(clip.annotation);
  }
  write_annotations(dir / "annotations.jsonl", annotations);
  write_class_names(dir / "classes.json", dataset.class_names);
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  ds.class_names = read_class_names(dir / "classes.json");
  for (auto& a : read_annotations(dir / "annotations.jsonl")) {
    a.validate(ds.n_classes());
    Clip clip;
    int rate = 0;
    clip.waveform = read_wav(dir / "clips" / (a.clip_id + ".wav"), &rate);
    if (ds.sample_rate == 0) ds.sample_rate = rate;
    if (rate != ds.sample_rate) {
      throw FormatError(a.clip_id + ": sample rate " + std::to_string(rate) + " differs from " +
                        std::to_string(ds.sample_rate));
    }
    clip.annotation = std::move(a);
    ds.clips.push_back(std::move(clip));
  }
  return ds;
}

}  // namespace soundtriage
