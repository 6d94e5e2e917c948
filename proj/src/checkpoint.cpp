// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "soundtriage/serialization.h"
#include "soundtriage/training.h"

// Layout (little-endian host order):
//   8 bytes  magic "STRIAGE\0"
//   u32      format version
//   u64      header length, then UTF-8 JSON header
//   u64 n, n doubles    backbone parameters
//   u64 n, n doubles    conditioner parameters
//   u64 n, n doubles    normalizer mean, then n doubles stddev
//   4 bytes  "END\0"

namespace soundtriage {
namespace {

constexpr char kMagic[8] = {'S', 'T', 'R', 'I', 'A', 'G', 'E', '\0'};
constexpr char kTrailer[4] = {'E', 'N', 'D', '\0'};

template <typename T>
void put(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_doubles(std::string& out, const double* data, std::size_t n) {
  put<std::uint64_t>(out, n);
  out.append(reinterpret_cast<const char*>(data), n * sizeof(double));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string path) : bytes_(bytes), path_(std::move(path)) {}

  void read(void* dst, std::size_t n) {
    if (pos_ + n > bytes_.size()) throw FormatError(path_ + ": checkpoint is truncated");
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  template <typename T>
  T get() {
    T v;
    read(&v, sizeof(T));
    return v;
  }
  std::vector<double> doubles(std::size_t expected, const char* what) {
    const auto n = get<std::uint64_t>();
    if (n != expected) {
      throw FormatError(path_ + ": " + what + " holds " + std::to_string(n) + " values, expected " +
                        std::to_string(expected));
    }
    std::vector<double> v(n);
    read(v.data(), n * sizeof(double));
    return v;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const nlohmann::json header = {{"train", to_json(ckpt.train_config)},
                                 {"features", to_json(ckpt.feature_config)},
                                 {"model", to_json(ckpt.model.config())},
                                 {"class_names", ckpt.class_names},
                                 {"epoch", ckpt.epoch},
                                 {"validation_score", ckpt.validation_score},
                                 {"identity_film", ckpt.model.identity_film}};
  const std::string text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, Checkpoint::kFormatVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  const auto& bp = ckpt.model.backbone.parameters();
  const auto& cp = ckpt.model.conditioner.parameters();
  put_doubles(out, bp.data(), bp.size());
  put_doubles(out, cp.data(), cp.size());
  const auto& norm = ckpt.model.normalizer;
  put_doubles(out, norm.mean.data(), static_cast<std::size_t>(norm.mean.size()));
  out.append(reinterpret_cast<const char*>(norm.stddev.data()),
             static_cast<std::size_t>(norm.stddev.size()) * sizeof(double));
  out.append(kTrailer, sizeof(kTrailer));

  // Write-then-rename so a failed save never leaves a partial checkpoint.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw FormatError("cannot open " + tmp.string() + " for writing");
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!os) throw FormatError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  Reader r(bytes, path.string());

  char magic[sizeof(kMagic)];
  r.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(path.string() + ": not a checkpoint file");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != Checkpoint::kFormatVersion) {
    throw FormatError(path.string() + ": checkpoint format version " + std::to_string(version) +
                      " is not supported (this build reads version " +
                      std::to_string(Checkpoint::kFormatVersion) + ")");
  }
  const auto header_len = r.get<std::uint64_t>();
  if (header_len > bytes.size()) throw FormatError(path.string() + ": checkpoint is truncated");
  std::string text(header_len, '\0');
  r.read(text.data(), header_len);

  nlohmann::json header;
  ModelConfig model_config;
  TrainConfig train_config;
  FeatureConfig feature_config;
  try {
    header = nlohmann::json::parse(text);
    model_config = model_config_from_json(header.at("model"));
    train_config = train_config_from_json(header.at("train"));
    feature_config = feature_config_from_json(header.at("features"));
    model_config.backbone.validate();
    model_config.conditioner().validate();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": corrupt checkpoint header: " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": corrupt checkpoint header: " + e.what());
  }

  SetModel model(model_config);
  const auto backbone = r.doubles(model.backbone.parameters().size(), "backbone");
  model.backbone.parameters().assign(backbone.begin(), backbone.end());
  const auto conditioner = r.doubles(model.conditioner.parameters().size(), "conditioner");
  model.conditioner.parameters().assign(conditioner.begin(), conditioner.end());
  const auto bands = static_cast<std::size_t>(model_config.backbone.n_mels);
  const auto mean = r.doubles(bands, "normalizer");
  std::vector<double> stddev(bands);
  r.read(stddev.data(), bands * sizeof(double));
  model.normalizer.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(bands));
  model.normalizer.stddev =
      Eigen::Map<const Vector>(stddev.data(), static_cast<Eigen::Index>(bands));
  char trailer[sizeof(kTrailer)];
  r.read(trailer, sizeof(trailer));
  if (std::memcmp(trailer, kTrailer, sizeof(kTrailer)) != 0 || !r.at_end()) {
    throw FormatError(path.string() + ": checkpoint trailer missing or extra bytes present");
  }

  try {
    model.identity_film = header.at("identity_film").get<bool>();
    auto names = header.at("class_names").get<std::vector<std::string>>();
    Checkpoint ckpt{std::move(model), train_config, feature_config, std::move(names),
                    header.at("epoch").get<int>(), header.at("validation_score").get<double>()};
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": corrupt checkpoint header: " + e.what());
  }
}

}  // namespace soundtriage
