// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "soundtriage/cli.h"

using namespace soundtriage;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "soundtriage");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

// Small datasets and a one-epoch model shared by the tests below.
struct Workspace {
  fs::path root = fs::temp_directory_path() / "soundtriage_cli";
  fs::path train = root / "train";
  fs::path val = root / "val";
  fs::path run = root / "run";
  fs::path ckpt = run / "model.ckpt";

  Workspace() {
    fs::remove_all(root);
    fs::create_directories(root);
    REQUIRE(cli({"--out", train.string(), "--seed", "1", "synth", "--clips", "8", "--classes", "3",
                 "--duration", "2"})
                .code == 0);
    REQUIRE(cli({"--out", val.string(), "--seed", "2", "synth", "--clips", "4", "--classes", "3",
                 "--duration", "2"})
                .code == 0);
    REQUIRE(cli(train_args(run)).code == 0);
  }

  std::vector<std::string> train_args(const fs::path& out) const {
    return {"--out", out.string(), "--seed", "5", "train", "--train", train.string(),
            "--val", val.string(), "--epochs", "1", "--batch-size", "4", "--channels", "4",
            "--gru-units", "4", "--fc-units", "4", "--n-mels", "16"};
  }
};

Workspace& workspace() {
  static Workspace w;
  return w;
}

}  // namespace

TEST_CASE("synth writes the dataset layout") {
  const auto dir = fs::temp_directory_path() / "soundtriage_cli_synth";
  fs::remove_all(dir);
  auto r = cli({"--out", (dir / "a").string(), "synth", "--clips", "200", "--classes", "5",
                "--duration", "1", "--seed", "1"});
  REQUIRE(r.code == 0);
  int wavs = 0;
  for (const auto& e : fs::directory_iterator(dir / "a" / "clips")) wavs += e.path().extension() == ".wav";
  CHECK(wavs == 200);
  CHECK(fs::exists(dir / "a" / "annotations.jsonl"));
  CHECK(fs::exists(dir / "a" / "classes.json"));
  CHECK(fs::exists(dir / "a" / "manifest.json"));

  r = cli({"--out", (dir / "b").string(), "--seed", "1", "synth", "--clips", "200", "--classes",
           "5", "--duration", "1"});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "a" / "annotations.jsonl") == slurp(dir / "b" / "annotations.jsonl"));

  r = cli({"--out", (dir / "c").string(), "synth", "--clips", "3", "--classes", "1",
           "--duration", "1"});
  CHECK(r.code == 0);
}

TEST_CASE("train writes checkpoint, log and manifest") {
  auto& w = workspace();
  for (const char* f : {"model.ckpt", "train.log", "config.json", "manifest.json"}) {
    CHECK(fs::exists(w.run / f));
  }
  const auto log = slurp(w.run / "train.log");
  CHECK(log.rfind("epoch\ttrain_loss\tval_frame_f\n", 0) == 0);
  const auto manifest = nlohmann::json::parse(slurp(w.run / "manifest.json"));
  CHECK(manifest["command"] == "train");
  CHECK(manifest["seed"] == 5);
  CHECK(manifest["config"]["train"]["batch_size"] == 4);
  CHECK(manifest["config"]["train"]["dirichlet_alpha"] == 0.1);
  CHECK(manifest["config"]["train"]["loss"] == "set_a");
  CHECK(manifest.contains("wall_clock_seconds"));
  CHECK(manifest.contains("tool_version"));

  const auto again = w.root / "run_again";
  REQUIRE(cli(w.train_args(again)).code == 0);
  CHECK(slurp(again / "train.log") == log);
  CHECK(slurp(again / "model.ckpt") == slurp(w.ckpt));
}

TEST_CASE("train defaults and baseline flags") {
  auto& w = workspace();
  const auto cfg_path = w.root / "cfg.json";
  std::ofstream(cfg_path) << R"({"train": {"epochs": 1}, "model": {"channels": [4, 4, 4],
      "gru_units": 4, "fc_units": 4}, "features": {"n_mels": 16}})";
  const auto out = w.root / "defaults";
  REQUIRE(cli({"--config", cfg_path.string(), "--out", out.string(), "train", "--train",
               w.train.string(), "--val", w.val.string(), "--loss", "sed", "--identity-film"})
              .code == 0);
  const auto cfg = nlohmann::json::parse(slurp(out / "config.json"));
  CHECK(cfg["train"]["batch_size"] == 64);
  CHECK(cfg["train"]["epochs"] == 1);
  CHECK(cfg["train"]["dirichlet_alpha"] == 0.1);
  CHECK(cfg["train"]["loss"] == "sed");
  CHECK(cfg["train"]["identity_film"] == true);
  CHECK(cfg["model"]["n_mels"] == 16);
}

TEST_CASE("eval at unit target weight equals uniform evaluation") {
  auto& w = workspace();
  const auto a = w.root / "eval_uniform", b = w.root / "eval_target";
  const auto uniform = cli({"--out", a.string(), "eval", "--checkpoint", w.ckpt.string(), "--data",
                            w.val.string()});
  REQUIRE(uniform.code == 0);
  CHECK(uniform.out.rfind("class\tframe_f", 0) == 0);
  REQUIRE(cli({"--out", b.string(), "eval", "--checkpoint", w.ckpt.string(), "--data",
               w.val.string(), "--target", "1", "--weight", "1"})
              .code == 0);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  const auto report = nlohmann::json::parse(slurp(a / "report.json"));
  CHECK(report["classes"].size() == 3);
  CHECK(report["macro"].contains("intersection_f"));
}

TEST_CASE("sweep emits six rows per class") {
  auto& w = workspace();
  const auto out = w.root / "sweep";
  REQUIRE(cli({"--out", out.string(), "sweep", "--checkpoint", w.ckpt.string(), "--data",
               w.val.string()})
              .code == 0);
  std::ifstream is(out / "sweep.csv");
  std::string line;
  std::getline(is, line);
  CHECK(line == "class,class_name,weight,frame_f,intersection_f,insertion_rate,deletion_rate");
  std::vector<int> rows(3, 0);
  while (std::getline(is, line)) ++rows.at(static_cast<std::size_t>(std::stoi(line)));
  CHECK(rows == std::vector<int>{6, 6, 6});
}

TEST_CASE("tune writes post-processing next to the checkpoint") {
  auto& w = workspace();
  const auto out = w.root / "tune";
  REQUIRE(cli({"--out", out.string(), "tune", "--checkpoint", w.ckpt.string(), "--data",
               w.val.string(), "--weights", "1,5", "--medians", "1,3", "--metric", "intersection"})
              .code == 0);
  CHECK(fs::exists(out / "postprocess.json"));
  CHECK(slurp(w.run / "postprocess.json") == slurp(out / "postprocess.json"));
  const auto pp = nlohmann::json::parse(slurp(out / "postprocess.json"));
  CHECK(pp["thresholds"].size() == 3);
  CHECK(pp["metric"] == "intersection");

  const auto ev = w.root / "eval_tuned";
  const auto r = cli({"--out", ev.string(), "eval", "--checkpoint", w.ckpt.string(), "--data",
                      w.val.string(), "--tuned"});
  CHECK(r.code == 0);
  fs::remove(w.run / "postprocess.json");
}

TEST_CASE("infer writes one line per clip") {
  auto& w = workspace();
  const auto out = w.root / "infer";
  REQUIRE(cli({"--out", out.string(), "infer", "--checkpoint", w.ckpt.string(), "--data",
               w.val.string(), "--lambda", "1,2,1"})
              .code == 0);
  std::ifstream is(out / "predictions.jsonl");
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("clip_id"));
    CHECK(j["lambda"][1] == doctest::Approx(0.5));
    CHECK(j["events"].is_array());
    ++n;
  }
  CHECK(n == 4);
}

TEST_CASE("usage errors exit 2 without outputs") {
  auto& w = workspace();
  const auto out = w.root / "bad";
  const std::vector<std::vector<std::string>> cases{
      {"--out", out.string(), "train", "--train", w.train.string(), "--val", w.val.string(),
       "--epochs", "x"},
      {"--out", out.string(), "train", "--train", w.train.string(), "--val", w.val.string(),
       "--loss", "focal"},
      {"--out", out.string(), "train", "--train", w.train.string(), "--val", w.val.string(),
       "--alpha", "0"},
      {"--out", out.string(), "synth", "--bogus"},
      {"--out", out.string()},
      {"synth"},
      {"--out", out.string(), "eval", "--checkpoint", w.ckpt.string(), "--data", w.val.string(),
       "--lambda", "1,2"},
      {"--out", out.string(), "eval", "--checkpoint", w.ckpt.string(), "--data", w.val.string(),
       "--target", "nope"},
      {"--out", out.string(), "eval", "--checkpoint", w.ckpt.string(), "--data", w.val.string(),
       "--target", "1", "--lambda", "1,1,1"},
      {"--out", out.string(), "eval", "--checkpoint", (w.root / "missing.ckpt").string(), "--data",
       w.val.string()},
  };
  for (const auto& args : cases) {
    const auto r = cli(args);
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
    CHECK_FALSE(fs::exists(out));
  }
  std::ofstream(w.root / "bad.json") << R"({"train": {"epochz": 3}})";
  const auto r = cli({"--config", (w.root / "bad.json").string(), "--out", out.string(), "train",
                      "--train", w.train.string(), "--val", w.val.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("epochz") != std::string::npos);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("runtime errors exit 1 without outputs") {
  auto& w = workspace();
  const auto broken = w.root / "broken.ckpt";
  std::ofstream(broken) << "garbage";
  const auto out = w.root / "bad_runtime";
  const auto r = cli({"--out", out.string(), "eval", "--checkpoint", broken.string(), "--data",
                      w.val.string()});
  CHECK(r.code == 1);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("help and version exit 0") {
  CHECK(cli({"--help"}).code == 0);
  const auto v = cli({"--version"});
  CHECK(v.code == 0);
}
