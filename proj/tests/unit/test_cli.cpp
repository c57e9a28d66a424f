#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "swn/json_io.hpp"

namespace fs = std::filesystem;
using swn::json;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "swn_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string at(const std::string& name) { return (workdir() / name).string(); }

int swn_run(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = std::string("\"") + SWN_CLI_PATH + "\" " + args;
  cmd += stdout_file.empty() ? " > /dev/null" : " > \"" + at(stdout_file) + "\"";
  cmd += " 2> \"" + at("stderr.txt") + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& name) {
  std::ifstream in(at(name), std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& name) {
  std::vector<std::string> out;
  std::istringstream in(slurp(name));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

json load(const std::string& name) { return json::parse(slurp(name)); }

void write(const std::string& name, const std::string& text) {
  std::ofstream(at(name)) << text;
}

// Cheap vocabulary and model settings so the pipeline runs in seconds.
void write_fast_config() {
  write("fast.toml",
        "stride = 5\n"
        "top_k = 12\n"
        "per_class_samples = 3\n"
        "embed_dim = 4\n"
        "out_channels = 8\n"
        "epochs = 2\n");
}

// The default synthetic set plus a vocabulary and a corpus, built once.
void ensure_pipeline() {
  static bool done = false;
  if (done) return;
  write_fast_config();
  REQUIRE(swn_run("synth --out " + at("data.jsonl")) == 0);
  REQUIRE(swn_run("fit-vocab --config " + at("fast.toml") + " --data " + at("data.jsonl") +
                  " --out " + at("vocab.json") + " --report " + at("vocab_report.json")) == 0);
  REQUIRE(swn_run("discretize --data " + at("data.jsonl") + " --vocab " + at("vocab.json") +
                  " --out " + at("corpus.jsonl")) == 0);
  done = true;
}

void ensure_small_data() {
  static bool done = false;
  if (done) return;
  write_fast_config();
  REQUIRE(swn_run("synth --out " + at("small.jsonl") +
                  " --length 100 --motif 20 --per-class 10 --seed 3") == 0);
  done = true;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(swn_run("") == 2);
  CHECK(swn_run("frobnicate") == 2);
  CHECK(swn_run("synth") == 2);
  CHECK(swn_run("synth --out " + at("x.jsonl") + " --classes many") == 2);
  write("bad.toml", "no_such_key = 1\n");
  CHECK(swn_run("synth --config " + at("bad.toml") + " --out " + at("x.jsonl")) == 2);
  CHECK(swn_run("--help") == 0);
}

TEST_CASE("synth writes a deterministic dataset") {
  REQUIRE(swn_run("synth --out " + at("s1.jsonl")) == 0);
  REQUIRE(swn_run("synth --out " + at("s2.jsonl")) == 0);
  CHECK(lines("s1.jsonl").size() == 301);
  CHECK(slurp("s1.jsonl") == slurp("s2.jsonl"));
  REQUIRE(swn_run("synth --out " + at("s3.jsonl") + " --seed 8") == 0);
  CHECK(slurp("s1.jsonl") != slurp("s3.jsonl"));
  CHECK(json::parse(lines("s1.jsonl").front()).at("header").at("config").at("command") == "synth");
}

TEST_CASE("missing or corrupt inputs exit with 3") {
  CHECK(swn_run("fit-vocab --data " + at("nope.jsonl") + " --out " + at("v.json")) == 3);
  write("garbage.jsonl", "{not json\n");
  CHECK(swn_run("fit-vocab --data " + at("garbage.jsonl") + " --out " + at("v.json")) == 3);
}

TEST_CASE("fit-vocab and discretize") {
  ensure_pipeline();
  const auto vocab = load("vocab.json");
  CHECK(vocab.at("entries").size() == 18);  // 2 variables x 3 scales x 3 classes
  CHECK(vocab.at("words_per_block") == 3);
  const auto report = load("vocab_report.json");
  CHECK(report.at("rows").size() == 3);
  CHECK(report.contains("meta"));

  const auto corpus = lines("corpus.jsonl");
  REQUIRE(corpus.size() == 301);
  const auto first = json::parse(corpus[1]);
  CHECK(first.at("scales").at("10").at(0).size() == 50);
  CHECK(first.at("scales").at("25").at(0).size() == 20);
  CHECK(first.at("scales").at("50").at(0).size() == 10);

  REQUIRE(swn_run("discretize --data " + at("data.jsonl") + " --vocab " + at("vocab.json") +
                  " --out " + at("corpus10.jsonl") + " --scales 10") == 0);
  const auto only10 = json::parse(lines("corpus10.jsonl")[1]);
  CHECK(only10.at("scales").size() == 1);
  CHECK(only10.at("scales").at("10").at(1).size() == 50);

  CHECK(swn_run("fit-vocab --data " + at("data.jsonl") + " --out " + at("v.json") +
                " --scales 600") == 2);
  CHECK(swn_run("discretize --data " + at("data.jsonl") + " --vocab " + at("vocab.json") +
                " --out " + at("c.jsonl") + " --scales 7") == 2);
}

TEST_CASE("train and evaluate") {
  ensure_pipeline();
  REQUIRE(swn_run("train --config " + at("fast.toml") + " --corpus " + at("corpus.jsonl") +
                  " --out-model " + at("model.json") + " --out-history " + at("history.json") +
                  " --epochs 1") == 0);
  const auto history = load("history.json");
  REQUIRE(history.size() == 1);
  CHECK(history[0].contains("loss"));
  CHECK(load("model.json").at("vocab_fingerprint").is_string());

  REQUIRE(swn_run("evaluate --corpus " + at("corpus.jsonl") + " --model " + at("model.json") +
                  " --report " + at("eval.json")) == 0);
  const auto report = load("eval.json");
  CHECK(report.at("acc").get<double>() >= 0.0);
  CHECK(report.at("maf1").get<double>() <= 1.0);
  CHECK(report.at("confusion").size() == 3);
  CHECK(report.contains("meta"));

  REQUIRE(swn_run("evaluate --corpus " + at("corpus.jsonl") + " --model " + at("model.json"),
                  "eval_stdout.json") == 0);
  CHECK(load("eval_stdout.json").at("acc") == report.at("acc"));

  // a corpus built from a different vocabulary is refused
  REQUIRE(swn_run("fit-vocab --config " + at("fast.toml") + " --seed 99 --data " +
                  at("data.jsonl") + " --out " + at("vocab99.json")) == 0);
  REQUIRE(swn_run("discretize --data " + at("data.jsonl") + " --vocab " + at("vocab99.json") +
                  " --out " + at("corpus99.jsonl")) == 0);
  CHECK(swn_run("evaluate --corpus " + at("corpus99.jsonl") + " --model " + at("model.json")) == 3);
}

TEST_CASE("ablate compares variants on raw data") {
  ensure_small_data();
  REQUIRE(swn_run("ablate --config " + at("fast.toml") + " --data " + at("small.jsonl") +
                  " --out " + at("ablate.json") + " --label-per-class 5 --seed 2") == 0);
  const auto out = load("ablate.json");
  REQUIRE(out.at("rows").size() == 3);
  CHECK(out.at("rows")[0].at("variant") == "full");
  CHECK(out.at("rows")[2].at("variant") == "no_sd");
  CHECK(out.at("rows")[1].at("history").size() == 2);
  CHECK(swn_run("ablate --data " + at("small.jsonl") + " --variant full,bogus") == 2);
}

TEST_CASE("sweep writes one csv row per value") {
  ensure_small_data();
  REQUIRE(swn_run("sweep --config " + at("fast.toml") + " --data " + at("small.jsonl") +
                  " --param lambda --values 0,0.25,0.5,1,2 --out " + at("sweep.csv")) == 0);
  const auto rows = lines("sweep.csv");
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "param,value,acc,maf1");
  CHECK(rows[3].rfind("lambda,0.5,", 0) == 0);
  CHECK(swn_run("sweep --data " + at("small.jsonl") + " --param depth --values 1") == 2);
}
