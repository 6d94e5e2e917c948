// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include "soundtriage/cli.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "soundtriage/inference.h"
#include "soundtriage/serialization.h"
#include "soundtriage/training.h"

#ifndef SOUNDTRIAGE_VERSION
#define SOUNDTRIAGE_VERSION "0.0.0"
#endif

namespace soundtriage {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Files produced by one command. Everything recorded here is deleted again
// when the command fails, so a failed run leaves no partial outputs.
class Outputs {
 public:
  void open(const fs::path& dir) {
    dir_ = dir;
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_);
      created_dir_ = true;
    } else if (!fs::is_directory(dir_)) {
      throw UsageError("--out " + dir_.string() + " exists and is not a directory");
    }
  }

  const fs::path& dir() const { return dir_; }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write_file(const fs::path& target, const std::string& content) {
    const fs::path tmp = target.string() + ".tmp";
    track(target);
    {
      std::ofstream os(tmp, std::ios::binary);
      if (!os) throw FormatError("cannot write " + tmp.string());
      os << content;
      if (!os) throw FormatError("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
  }

  void write(const std::string& name, const std::string& content) { write_file(path(name), content); }

  void track(const fs::path& p) {
    if (std::find(written_.begin(), written_.end(), p) == written_.end()) written_.push_back(p);
  }

  std::vector<std::string> list() const {
    std::vector<std::string> out;
    for (const auto& p : written_) out.push_back(p.string());
    return out;
  }

  void rollback() noexcept {
    std::error_code ec;
    for (const auto& p : written_) {
      fs::remove_all(p, ec);
      fs::remove(p.string() + ".tmp", ec);
    }
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }

 private:
  fs::path dir_;
  bool created_dir_ = false;
  std::vector<fs::path> written_;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_text(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw FormatError("cannot open " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Replaces the entries of `base` named in `patch`. Keys absent from `base`
// are rejected.
json overlay(json base, const json& patch, const std::string& section,
             const std::set<std::string>& derived = {}) {
  if (patch.is_null()) return base;
  if (!patch.is_object()) throw UsageError("config section '" + section + "' must be an object");
  for (const auto& [key, value] : patch.items()) {
    if (!base.contains(key)) {
      throw UsageError("unknown key '" + key + "' in config section '" + section + "'");
    }
    if (derived.count(key)) {
      throw UsageError("'" + section + "." + key + "' is derived from the data and cannot be set");
    }
    base[key] = value;
  }
  return base;
}

template <typename T, typename Parse>
T parse_section(const json& defaults, const json& file, const std::string& section, Parse parse,
                const std::set<std::string>& derived = {}) {
  const json merged = overlay(defaults, file.contains(section) ? file.at(section) : json(),
                              section, derived);
  try {
    return parse(merged);
  } catch (const json::exception& e) {
    throw UsageError("config section '" + section + "': " + e.what());
  }
}

int resolve_class(const std::string& text, const std::vector<std::string>& names) {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == text) return static_cast<int>(k);
  }
  try {
    std::size_t used = 0;
    const int k = std::stoi(text, &used);
    if (used == text.size() && k >= 0 && k < static_cast<int>(names.size())) return k;
  } catch (const std::exception&) {
  }
  throw UsageError("unknown class '" + text + "'");
}

// Clips of a dataset directory. Directories without annotations.jsonl are
// read as unlabeled audio.
Dataset load_audio_dir(const fs::path& dir, const std::vector<std::string>& class_names) {
  if (fs::exists(dir / "annotations.jsonl")) return load_dataset(dir);
  if (!fs::is_directory(dir / "clips")) throw FormatError(dir.string() + " has no clips/ directory");
  std::vector<fs::path> wavs;
  for (const auto& e : fs::directory_iterator(dir / "clips")) {
    if (e.path().extension() == ".wav") wavs.push_back(e.path());
  }
  std::sort(wavs.begin(), wavs.end());
  Dataset d;
  d.class_names = class_names;
  for (const auto& p : wavs) {
    int rate = 0;
    Clip c;
    c.waveform = read_wav(p, &rate);
    if (d.sample_rate != 0 && rate != d.sample_rate) {
      throw FormatError(p.string() + ": sample rate differs from the other clips");
    }
    d.sample_rate = rate;
    c.annotation.clip_id = p.stem().string();
    c.annotation.duration = static_cast<double>(c.waveform.size()) / rate;
    d.clips.push_back(std::move(c));
  }
  if (d.clips.empty()) throw FormatError(dir.string() + "/clips contains no wav files");
  return d;
}

std::vector<LabeledClip> load_for(const Checkpoint& ckpt, const fs::path& dir) {
  Dataset d = load_audio_dir(dir, ckpt.class_names);
  if (d.class_names != ckpt.class_names) {
    throw FormatError(dir.string() + ": class map differs from the checkpoint's");
  }
  return prepare_clips(d, ckpt.feature_config);
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : "nan"; }

struct Global {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

// Inference weights given as --target/--weight or --lambda.
struct WeightArgs {
  std::string target;
  double weight = 1.0;
  std::string lambda;
  CLI::Option* target_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;

  void add(CLI::App* cmd) {
    target_opt = cmd->add_option("--target", target, "class index or name to prioritize");
    cmd->add_option("--weight", weight, "raw weight of the target class")
        ->check(CLI::PositiveNumber)
        ->needs(target_opt);
    lambda_opt = cmd->add_option("--lambda", lambda, "raw weight per class, comma separated")
                     ->excludes(target_opt);
  }

  TriageWeights resolve(const std::vector<std::string>& names) const {
    const int n = static_cast<int>(names.size());
    if (lambda_opt->count()) {
      try {
        const auto w = parse_lambda(lambda);
        if (w.classes() != n) {
          throw UsageError("--lambda has " + std::to_string(w.classes()) + " entries, model has " +
                           std::to_string(n) + " classes");
        }
        return w;
      } catch (const ConfigError& e) {
        throw UsageError(std::string("--lambda: ") + e.what());
      }
    }
    if (target_opt->count()) return make_inference_weights(resolve_class(target, names), weight, n);
    return TriageWeights::uniform(n);
  }

  json describe(const TriageWeights& w) const {
    return {{"raw", w.raw_values()},
            {"normalized", std::vector<double>(w.normalized().data(),
                                               w.normalized().data() + w.normalized().size())}};
  }
};

class Command {
 public:
  Command(std::vector<std::string> argv, std::ostream& out) : argv_(std::move(argv)), out_(out) {}

  json manifest(const std::string& name, const Global& g, json config, json inputs) const {
    return {{"command", name},
            {"argv", argv_},
            {"tool_version", SOUNDTRIAGE_VERSION},
            {"seed", g.seed ? json(*g.seed) : json(nullptr)},
            {"config", std::move(config)},
            {"inputs", std::move(inputs)}};
  }

  void finish(json m, Outputs& outputs) const {
    outputs.track(outputs.path("manifest.json"));
    m["outputs"] = outputs.list();
    m["started_at"] = started_at_;
    m["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    outputs.write("manifest.json", m.dump(2) + "\n");
  }

  std::ostream& out() const { return out_; }

 private:
  std::vector<std::string> argv_;
  std::ostream& out_;
  std::string started_at_ = utc_now();
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json load_config_file(const Global& g) {
  if (g.config.empty()) return json::object();
  try {
    json j = json::parse(read_text(g.config));
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
      static const std::set<std::string> known{"synth", "train", "features", "model"};
      if (!known.count(key)) throw UsageError("unknown config section '" + key + "'");
    }
    return j;
  } catch (const json::exception& e) {
    throw UsageError("cannot parse config file " + g.config + ": " + e.what());
  } catch (const FormatError& e) {
    throw UsageError(e.what());
  }
}

template <typename T>
void validate_usage(const T& config) {
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

// --- synth ---------------------------------------------------------------

struct SynthArgs {
  int clips = 200;
  int classes = 5;
  double duration = 10.0;
  int sample_rate = 16000;
  double noise = 0.01;
  std::vector<double> gains;
  std::vector<double> rates;
  std::map<std::string, CLI::Option*> opts;
};

void add_synth(CLI::App* cmd, SynthArgs& a) {
  a.opts["n_clips"] = cmd->add_option("--clips", a.clips, "number of clips");
  a.opts["n_classes"] = cmd->add_option("--classes", a.classes, "number of event classes");
  a.opts["duration"] = cmd->add_option("--duration", a.duration, "clip length in seconds");
  a.opts["sample_rate"] = cmd->add_option("--sample-rate", a.sample_rate, "sample rate in Hz");
  a.opts["noise_level"] = cmd->add_option("--noise", a.noise, "background noise amplitude");
  a.opts["class_gains"] =
      cmd->add_option("--gains", a.gains, "peak gain per class, comma separated")->delimiter(',');
  a.opts["class_rates"] =
      cmd->add_option("--rates", a.rates, "relative event frequency per class, comma separated")
          ->delimiter(',');
}

int run_synth(const Command& cmd, const Global& g, const SynthArgs& a, Outputs& outputs) {
  const json file = load_config_file(g);
  SynthConfig defaults;
  defaults.n_clips = 200;
  auto cfg = parse_section<SynthConfig>(to_json(defaults), file, "synth", synth_config_from_json);
  if (a.opts.at("n_clips")->count()) cfg.n_clips = a.clips;
  if (a.opts.at("n_classes")->count()) cfg.n_classes = a.classes;
  if (a.opts.at("duration")->count()) cfg.duration = a.duration;
  if (a.opts.at("sample_rate")->count()) cfg.sample_rate = a.sample_rate;
  if (a.opts.at("noise_level")->count()) cfg.noise_level = a.noise;
  if (a.opts.at("class_gains")->count()) cfg.class_gains = a.gains;
  if (a.opts.at("class_rates")->count()) cfg.class_rates = a.rates;
  if (g.seed) cfg.seed = *g.seed;
  validate_usage(cfg);

  outputs.open(g.out);
  for (const char* name : {"clips", "annotations.jsonl", "classes.json"}) {
    outputs.track(outputs.path(name));
  }
  Dataset d{default_class_names(cfg.n_classes), synthesize_dataset(cfg), cfg.sample_rate};
  save_dataset(outputs.dir(), d);
  cmd.out() << "wrote " << d.clips.size() << " clips to " << outputs.dir().string() << "\n";
  cmd.finish(cmd.manifest("synth", g, {{"synth", to_json(cfg)}}, json::object()), outputs);
  return kExitOk;
}

// --- train ---------------------------------------------------------------

struct TrainArgs {
  std::string train_dir;
  std::string val_dir;
  std::string loss = "set_a";
  double alpha = 0.1;
  int epochs = 100;
  int batch_size = 64;
  double lr = 1e-3;
  bool identity_film = false;
  int n_mels = 64;
  int channels = 64;
  int gru_units = 64;
  int fc_units = 32;
  std::vector<int> time_pool;
  std::map<std::string, CLI::Option*> opts;
};

void add_train(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--train", a.train_dir, "training dataset directory")->required();
  cmd->add_option("--val", a.val_dir, "validation dataset directory")->required();
  a.opts["loss"] = cmd->add_option("--loss", a.loss, "sed | set_ai | set_a")
                       ->check(CLI::IsMember({"sed", "set_ai", "set_a"}));
  a.opts["alpha"] = cmd->add_option("--alpha", a.alpha, "Dirichlet concentration");
  a.opts["epochs"] = cmd->add_option("--epochs", a.epochs, "training epochs");
  a.opts["batch_size"] = cmd->add_option("--batch-size", a.batch_size, "clips per batch");
  a.opts["lr"] = cmd->add_option("--lr", a.lr, "Adam learning rate");
  a.opts["identity_film"] =
      cmd->add_flag("--identity-film", a.identity_film, "train without conditioning");
  a.opts["n_mels"] = cmd->add_option("--n-mels", a.n_mels, "mel bands");
  a.opts["channels"] = cmd->add_option("--channels", a.channels, "channels per conv block");
  a.opts["gru_units"] = cmd->add_option("--gru-units", a.gru_units, "GRU units per direction");
  a.opts["fc_units"] = cmd->add_option("--fc-units", a.fc_units, "hidden dense units");
  a.opts["time_pool"] =
      cmd->add_option("--time-pool", a.time_pool, "time pooling per block, comma separated")
          ->delimiter(',');
}

int run_train(const Command& cmd, const Global& g, const TrainArgs& a, Outputs& outputs) {
  const json file = load_config_file(g);
  auto tc = parse_section<TrainConfig>(to_json(TrainConfig{}), file, "train",
                                       train_config_from_json);
  FeatureConfig feature_defaults;
  auto fc = parse_section<FeatureConfig>(to_json(feature_defaults), file, "features",
                                         feature_config_from_json, {"sample_rate"});
  auto mc = parse_section<ModelConfig>(to_json(ModelConfig{}), file, "model",
                                       model_config_from_json, {"n_mels", "n_classes"});
  const auto& o = a.opts;
  if (o.at("loss")->count()) tc.loss_kind = parse_loss_kind(a.loss);
  if (o.at("alpha")->count()) tc.dirichlet_alpha = a.alpha;
  if (o.at("epochs")->count()) tc.epochs = a.epochs;
  if (o.at("batch_size")->count()) tc.batch_size = a.batch_size;
  if (o.at("lr")->count()) tc.learning_rate = a.lr;
  if (o.at("identity_film")->count()) tc.identity_film = a.identity_film;
  if (g.seed) tc.seed = *g.seed;
  if (o.at("n_mels")->count()) fc.n_mels = a.n_mels;
  if (o.at("channels")->count()) mc.backbone.channels.assign(3, a.channels);
  if (o.at("gru_units")->count()) mc.backbone.gru_units = a.gru_units;
  if (o.at("fc_units")->count()) mc.backbone.fc_units = a.fc_units;
  if (o.at("time_pool")->count()) mc.backbone.time_pool = a.time_pool;
  mc.backbone.n_mels = fc.n_mels;
  validate_usage(tc);
  for (const fs::path dir : {a.train_dir, a.val_dir}) {
    if (!fs::is_directory(dir)) throw UsageError("dataset directory " + dir.string() + " not found");
  }

  const Dataset train_data = load_dataset(a.train_dir);
  const Dataset val_data = load_dataset(a.val_dir);
  if (train_data.class_names != val_data.class_names) {
    throw FormatError("training and validation class maps differ");
  }
  if (train_data.sample_rate != val_data.sample_rate) {
    throw FormatError("training and validation sample rates differ");
  }
  fc.sample_rate = train_data.sample_rate;
  mc.backbone.n_classes = train_data.n_classes();
  validate_usage(fc);
  validate_usage(mc.backbone);
  validate_usage(mc.conditioner());

  const auto train_clips = prepare_clips(train_data, fc);
  const auto val_clips = prepare_clips(val_data, fc);

  outputs.open(g.out);
  std::string log = "epoch\ttrain_loss\tval_frame_f\n";
  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochRecord& r) {
    const std::string line = format_epoch_line(r);
    log += line + "\n";
    cmd.out() << line << "\n" << std::flush;
  };
  const TrainResult result =
      train(train_clips, val_clips, tc, mc, fc, train_data.class_names, hooks);

  const json config = {{"train", to_json(tc)}, {"features", to_json(fc)}, {"model", to_json(mc)}};
  outputs.write("train.log", log);
  outputs.write("config.json", config.dump(2) + "\n");
  const fs::path ckpt = outputs.path("model.ckpt");
  outputs.track(ckpt);
  save_checkpoint(result.best, ckpt);
  cmd.out() << "best epoch " << result.best.epoch << ", validation frame F "
            << fixed(result.best.validation_score) << "\n";
  cmd.finish(cmd.manifest("train", g, config, {{"train", a.train_dir}, {"val", a.val_dir}}),
             outputs);
  return kExitOk;
}

// --- shared by infer / eval / sweep / tune --------------------------------

struct ModelArgs {
  std::string checkpoint;
  std::string data;
  std::string postprocess;
  CLI::Option* postprocess_opt = nullptr;

  void add(CLI::App* cmd) {
    cmd->add_option("--checkpoint", checkpoint, "trained model file")->required();
    cmd->add_option("--data", data, "dataset directory")->required();
    postprocess_opt = cmd->add_option("--postprocess", postprocess,
                                      "post-processing file (default: next to the checkpoint)");
  }

  fs::path postprocess_path() const {
    if (postprocess_opt && postprocess_opt->count()) return postprocess;
    return fs::path(checkpoint).parent_path() / "postprocess.json";
  }

  // Explicit --postprocess must exist; the default location is optional.
  std::optional<std::string> postprocess_text() const {
    const fs::path p = postprocess_path();
    if (fs::exists(p)) return read_text(p);
    if (postprocess_opt && postprocess_opt->count()) {
      throw UsageError("post-processing file " + p.string() + " not found");
    }
    return std::nullopt;
  }

  PostprocessConfig postprocess_for(int n_classes) const {
    const auto text = postprocess_text();
    if (!text) return PostprocessConfig::uniform(n_classes);
    auto pp = PostprocessConfig::from_json(*text);
    if (pp.classes() != n_classes) {
      throw FormatError("post-processing file covers " + std::to_string(pp.classes()) +
                        " classes, model has " + std::to_string(n_classes));
    }
    return pp;
  }

  void check_paths() const {
    if (!fs::exists(checkpoint)) throw UsageError("checkpoint " + checkpoint + " not found");
    if (!fs::is_directory(data)) throw UsageError("dataset directory " + data + " not found");
  }

  json inputs() const {
    return {{"checkpoint", checkpoint},
            {"data", data},
            {"postprocess", fs::exists(postprocess_path()) ? json(postprocess_path().string())
                                                           : json(nullptr)}};
  }
};

// --- infer ---------------------------------------------------------------

int run_infer(const Command& cmd, const Global& g, const ModelArgs& m, const WeightArgs& w,
              Outputs& outputs) {
  m.check_paths();
  const Checkpoint ckpt = load_checkpoint(m.checkpoint);
  const TriageWeights lambda = w.resolve(ckpt.class_names);
  const PostprocessConfig pp = m.postprocess_for(ckpt.model.classes());
  const auto clips = load_for(ckpt, m.data);

  const std::vector<double> normalized(lambda.normalized().data(),
                                       lambda.normalized().data() + lambda.normalized().size());
  std::string lines;
  for (const auto& clip : clips) {
    const Matrix probs = predict(ckpt, clip.features, lambda);
    const auto events = extract_events(postprocess(probs, pp, clip.features.frame_hop));
    json ev = json::array();
    for (const auto& e : events) {
      ev.push_back({{"class", e.class_index}, {"onset", e.onset}, {"offset", e.offset}});
    }
    lines += json({{"clip_id", clip.clip_id}, {"lambda", normalized}, {"events", ev}}).dump() + "\n";
  }
  outputs.open(g.out);
  outputs.write("predictions.jsonl", lines);
  cmd.out() << "wrote predictions for " << clips.size() << " clips\n";
  cmd.finish(cmd.manifest("infer", g, {{"lambda", w.describe(lambda)}, {"postprocess", json::parse(pp.to_json())}},
                          m.inputs()),
             outputs);
  return kExitOk;
}

// --- eval ----------------------------------------------------------------

struct EvalArgs {
  bool tuned = false;
  double dtc = 0.5;
  double gtc = 0.5;
};

std::vector<double> tuned_weights(const std::string& text, int n_classes) {
  const json j = json::parse(text);
  if (!j.contains("classes")) throw FormatError("post-processing file has no tuned weights");
  std::vector<double> w;
  for (const auto& c : j.at("classes")) w.push_back(c.at("weight").get<double>());
  if (static_cast<int>(w.size()) != n_classes) {
    throw FormatError("tuned weights cover " + std::to_string(w.size()) + " classes");
  }
  return w;
}

int run_eval(const Command& cmd, const Global& g, const ModelArgs& m, const WeightArgs& w,
             const EvalArgs& e, Outputs& outputs) {
  m.check_paths();
  const IntersectionConfig isect{e.dtc, e.gtc};
  validate_usage(isect);
  const Checkpoint ckpt = load_checkpoint(m.checkpoint);
  const int n = ckpt.model.classes();
  const PostprocessConfig pp = m.postprocess_for(n);
  json lambda_desc;
  std::optional<std::vector<double>> per_class;
  TriageWeights lambda = TriageWeights::uniform(n);
  if (e.tuned) {
    const auto text = m.postprocess_text();
    if (!text) throw UsageError("--tuned needs a post-processing file written by tune");
    per_class = tuned_weights(*text, n);
    lambda_desc = {{"per_class_target_weight", *per_class}};
  } else {
    lambda = w.resolve(ckpt.class_names);
    lambda_desc = w.describe(lambda);
  }
  if (!fs::exists(fs::path(m.data) / "annotations.jsonl")) {
    throw FormatError(m.data + " has no annotations.jsonl");
  }
  const auto clips = load_for(ckpt, m.data);
  const MetricsReport report =
      per_class ? evaluate_targeted(ckpt.model, clips, *per_class, pp, ckpt.class_names, isect)
                : evaluate(ckpt.model, clips, lambda, pp, ckpt.class_names, isect);
  outputs.open(g.out);
  outputs.write("report.json", report.to_json());
  cmd.out() << report.summary_tsv();
  cmd.finish(cmd.manifest("eval", g,
                          {{"lambda", lambda_desc},
                           {"postprocess", json::parse(pp.to_json())},
                           {"dtc", e.dtc},
                           {"gtc", e.gtc}},
                          m.inputs()),
             outputs);
  return kExitOk;
}

// --- sweep ---------------------------------------------------------------

int run_sweep(const Command& cmd, const Global& g, const ModelArgs& m,
              const std::vector<double>& weights, Outputs& outputs) {
  m.check_paths();
  for (double w : weights) {
    if (!(w > 0.0)) throw UsageError("sweep weights must be positive");
  }
  const Checkpoint ckpt = load_checkpoint(m.checkpoint);
  const int n = ckpt.model.classes();
  const PostprocessConfig pp = m.postprocess_for(n);
  if (!fs::exists(fs::path(m.data) / "annotations.jsonl")) {
    throw FormatError(m.data + " has no annotations.jsonl");
  }
  const auto clips = load_for(ckpt, m.data);

  std::vector<MetricsReport> reports;
  for (double w : weights) {
    reports.push_back(evaluate_targeted(ckpt.model, clips, std::vector<double>(n, w), pp,
                                        ckpt.class_names));
  }
  std::string csv = "class,class_name,weight,frame_f,intersection_f,insertion_rate,deletion_rate\n";
  for (int k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const auto& r = reports[i];
      csv += std::to_string(k) + "," + ckpt.class_names[k] + "," + fixed(weights[i]) + "," +
             fixed(r.frame_f.per_class[k]) + "," + fixed(r.intersection_f.per_class[k]) + "," +
             fixed(r.rates.insertion[k]) + "," + fixed(r.rates.deletion[k]) + "\n";
    }
  }
  outputs.open(g.out);
  outputs.write("sweep.csv", csv);
  cmd.out() << csv;
  cmd.finish(cmd.manifest("sweep", g,
                          {{"weights", weights}, {"postprocess", json::parse(pp.to_json())}},
                          m.inputs()),
             outputs);
  return kExitOk;
}

// --- tune ----------------------------------------------------------------

struct TuneArgs {
  std::string metric = "frame";
  std::vector<double> thresholds;
  std::vector<int> medians;
  std::vector<double> weights;
  std::vector<std::string> classes;
};

int run_tune(const Command& cmd, const Global& g, const ModelArgs& m, const TuneArgs& t,
             Outputs& outputs) {
  m.check_paths();
  TuningGrid grid = TuningGrid::defaults();
  if (!t.thresholds.empty()) grid.thresholds = t.thresholds;
  if (!t.medians.empty()) grid.median_sizes = t.medians;
  if (!t.weights.empty()) grid.weights = t.weights;
  validate_usage(grid);
  const MetricKind metric = parse_metric_kind(t.metric);
  const Checkpoint ckpt = load_checkpoint(m.checkpoint);
  std::vector<int> classes;
  for (const auto& c : t.classes) classes.push_back(resolve_class(c, ckpt.class_names));
  if (!fs::exists(fs::path(m.data) / "annotations.jsonl")) {
    throw FormatError(m.data + " has no annotations.jsonl");
  }
  const auto clips = load_for(ckpt, m.data);
  const TuningResult result = tune_postprocessing(ckpt.model, clips, grid, metric, classes);

  json j = json::parse(result.to_json());
  j["metric"] = t.metric;
  const std::string text = j.dump(2) + "\n";
  outputs.open(g.out);
  outputs.write("postprocess.json", text);
  outputs.write_file(fs::path(m.checkpoint).parent_path() / "postprocess.json", text);
  cmd.out() << "class\tthreshold\tmedian_size\tweight\tscore\n";
  for (std::size_t k = 0; k < result.per_class.size(); ++k) {
    const auto& c = result.per_class[k];
    cmd.out() << ckpt.class_names[k] << '\t' << fixed(c.threshold) << '\t' << c.median_size << '\t'
              << fixed(c.weight) << '\t' << fixed(c.score) << '\n';
  }
  cmd.finish(cmd.manifest("tune", g,
                          {{"metric", t.metric},
                           {"thresholds", grid.thresholds},
                           {"median_sizes", grid.median_sizes},
                           {"weights", grid.weights},
                           {"classes", classes}},
                          m.inputs()),
             outputs);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sound event triage: synthesize data, train, tune and evaluate detectors",
               "soundtriage"};
  app.set_version_flag("--version", SOUNDTRIAGE_VERSION);
  app.require_subcommand(1);

  Global g;
  app.add_option("--config", g.config, "JSON config file with synth/train/features/model sections");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out", g.out, "output directory")->required();

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset")->fallthrough();
  add_synth(synth, synth_args);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a detector")->fallthrough();
  add_train(train_cmd, train_args);

  ModelArgs infer_model;
  WeightArgs infer_weights;
  auto* infer = app.add_subcommand("infer", "write detected events per clip")->fallthrough();
  infer_model.add(infer);
  infer_weights.add(infer);

  ModelArgs eval_model;
  WeightArgs eval_weights;
  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "score a checkpoint on a labelled dataset")->fallthrough();
  eval_model.add(eval);
  eval_weights.add(eval);
  auto* tuned = eval->add_flag("--tuned", eval_args.tuned,
                               "score each class at its tuned target weight");
  tuned->excludes(eval_weights.target_opt)->excludes(eval_weights.lambda_opt);
  eval->add_option("--dtc", eval_args.dtc, "detection tolerance criterion");
  eval->add_option("--gtc", eval_args.gtc, "ground-truth intersection criterion");

  ModelArgs sweep_model;
  std::vector<double> sweep_weights{1, 5, 10, 15, 20, 25};
  auto* sweep = app.add_subcommand("sweep", "per-class metrics across target weights")
                    ->fallthrough();
  sweep_model.add(sweep);
  sweep->add_option("--weights", sweep_weights, "target weights, comma separated")
      ->delimiter(',');

  ModelArgs tune_model;
  TuneArgs tune_args;
  auto* tune = app.add_subcommand("tune", "grid-search thresholds, median sizes and weights")
                   ->fallthrough();
  tune_model.add(tune);
  tune->add_option("--metric", tune_args.metric, "frame | intersection")
      ->check(CLI::IsMember({"frame", "intersection"}));
  tune->add_option("--thresholds", tune_args.thresholds, "threshold grid")->delimiter(',');
  tune->add_option("--medians", tune_args.medians, "median filter sizes")->delimiter(',');
  tune->add_option("--weights", tune_args.weights, "target weight grid")->delimiter(',');
  tune->add_option("--classes", tune_args.classes, "classes to tune (default all)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  std::vector<std::string> args(argv, argv + argc);
  const Command cmd(args, out);
  Outputs outputs;
  try {
    if (synth->parsed()) return run_synth(cmd, g, synth_args, outputs);
    if (train_cmd->parsed()) return run_train(cmd, g, train_args, outputs);
    if (infer->parsed()) return run_infer(cmd, g, infer_model, infer_weights, outputs);
    if (eval->parsed()) return run_eval(cmd, g, eval_model, eval_weights, eval_args, outputs);
    if (sweep->parsed()) return run_sweep(cmd, g, sweep_model, sweep_weights, outputs);
    if (tune->parsed()) return run_tune(cmd, g, tune_model, tune_args, outputs);
  } catch (const UsageError& e) {
    outputs.rollback();
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    outputs.rollback();
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace soundtriage
