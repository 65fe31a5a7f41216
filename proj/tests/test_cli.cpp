#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "lxm/svg.hpp"
#include "lxm/util.hpp"
#include "svg_check.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int status = -1;
  std::string output;
};

// Runs the CLI with stderr folded into the captured output.
Result run_cli(const std::string& args) {
  const std::string cmd = std::string(LXM_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(LXM_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

json small_experiment(const fs::path& out) {
  return {
      {"corpus", {{"grammar", "bundled"}, {"sentences", 300}}},
      {"split", {{"train_fraction", 0.8}}},
      {"embeddings", {{"source", "train"}, {"dim", 16}, {"epochs", 2}}},
      {"train", {{"hidden_sizes", {8, 8, 4, 4}}, {"epochs", 2}, {"batch", 16}}},
      {"probe", {{"cap", 300}, {"min_count", 5}}},
      {"seed", 2},
      {"output", out.string()},
  };
}

}  // namespace

TEST(Cli, VersionAndUsage) {
  const auto v = run_cli("--version");
  EXPECT_EQ(v.status, 0);
  EXPECT_NE(v.output.find(LXM_VERSION), std::string::npos);
  EXPECT_NE(run_cli("").status, 0);
  EXPECT_NE(run_cli("nosuchcommand").status, 0);
}

TEST(Cli, StageByStage) {
  const auto dir = fresh_dir("stages");
  auto r = run_cli("synth --sentences 250 --seed 4 --out " + q(dir / "corpus"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir / "corpus" / "tokens.txt"));
  EXPECT_TRUE(fs::exists(dir / "corpus" / "lexicon.tsv"));
  const auto record = json::parse(r.output);
  EXPECT_EQ(record.at("name"), "synth");
  EXPECT_EQ(record.at("outputs").at(0).at("sha256").get<std::string>().size(), 64u);

  r = run_cli("embed --tokens " + q(dir / "corpus" / "tokens.txt") + " --dim 12 --epochs 1 --out " +
              q(dir / "emb.txt") + " --vocab " + q(dir / "vocab.tsv"));
  ASSERT_EQ(r.status, 0) << r.output;

  const json train_cfg = {{"tokens", {(dir / "corpus" / "tokens.txt").string()}},
                          {"embeddings", "emb.txt"},
                          {"split", {{"train_fraction", 0.8}}},
                          {"train", {{"hidden_sizes", {6, 4}}, {"epochs", 2}, {"batch", 16}}}};
  lxm::write_file(dir / "train.json", train_cfg.dump());
  r = run_cli("train --config " + q(dir / "train.json") + " --out " + q(dir / "model"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(lxm::read_file(dir / "model" / "loss.csv").substr(0, 11), "epoch,loss\n");

  r = run_cli("probe --model " + q(dir / "model" / "model.lxm") + " --embeddings " + q(dir / "emb.txt") +
              " --test " + q(dir / "corpus" / "tokens.txt") + " --tags " + q(dir / "corpus" / "lexicon.tsv") + " --train-fraction 0.8 --cap 200 --min-count 5 --out " +
              q(dir / "act"));
  ASSERT_EQ(r.status, 0) << r.output;
  for (int k = 0; k < 4; ++k) EXPECT_TRUE(fs::exists(dir / "act" / ("layer_" + std::to_string(k) + ".csv"))) << k;

  r = run_cli("analyze --activations " + q(dir / "act") + " --min-count 5 --out " + q(dir / "analysis"));
  ASSERT_EQ(r.status, 0) << r.output;
  const auto gdv = lxm::report::read_gdv_csv(dir / "analysis" / "gdv.csv");
  ASSERT_EQ(gdv.size(), 4u);
  for (const auto& row : gdv) EXPECT_EQ(row.n_classes, 4u);

  r = run_cli("report --run " + q(dir / "analysis") + " --out " + q(dir / "figs"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(lxm::fixtures::svg_problem(lxm::read_file(dir / "figs" / "gdv_curve.svg")), "");
  EXPECT_EQ(lxm::fixtures::svg_problem(lxm::read_file(dir / "figs" / "scatter_layer_3.svg")), "");
}

TEST(Cli, CleanRawText) {
  const auto dir = fresh_dir("clean");
  lxm::write_file(dir / "in.txt", "Betreff: 18 E-Mail!!\nHallo Welt.\n");
  const auto r = run_cli("clean --in " + q(dir / "in.txt") + " --out " + q(dir / "out.txt"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(lxm::read_file(dir / "out.txt"), "nummer\nemail\nhallo\nwelt\n");
}

TEST(Cli, MissingEmbeddingFileNamesPath) {
  const auto dir = fresh_dir("missing");
  auto cfg = small_experiment(dir / "run");
  cfg["embeddings"] = {{"source", "load"}, {"path", (dir / "no_such_vectors.txt").string()}};
  lxm::write_file(dir / "exp.json", cfg.dump(2));
  const auto r = run_cli("run --config " + q(dir / "exp.json"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("no_such_vectors.txt"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("error["), std::string::npos) << r.output;
}

TEST(Cli, BadConfigIsRejected) {
  const auto dir = fresh_dir("badcfg");
  auto cfg = small_experiment(dir / "run");
  cfg["train"]["unknown_key"] = 1;
  lxm::write_file(dir / "exp.json", cfg.dump(2));
  auto r = run_cli("run --config " + q(dir / "exp.json"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("error[config]"), std::string::npos) << r.output;

  lxm::write_file(dir / "broken.json", "{\"corpus\": ");
  r = run_cli("run --config " + q(dir / "broken.json"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("error[parse]"), std::string::npos) << r.output;
}

TEST(Cli, FullSmallRun) {
  const auto dir = fresh_dir("full");
  lxm::write_file(dir / "exp.json", small_experiment(dir / "run").dump(2));
  const auto r = run_cli("run --config " + q(dir / "exp.json"));
  ASSERT_EQ(r.status, 0) << r.output;
  const auto run = dir / "run";
  const auto gdv = lxm::report::read_gdv_csv(run / "gdv.csv");
  ASSERT_EQ(gdv.size(), 6u);
  for (int k = 0; k < 6; ++k) {
    const auto svg = run / ("scatter_layer_" + std::to_string(k) + ".svg");
    ASSERT_TRUE(fs::exists(svg)) << k;
    EXPECT_EQ(lxm::fixtures::svg_problem(lxm::read_file(svg)), "") << k;
    EXPECT_TRUE(fs::exists(run / ("mds_layer_" + std::to_string(k) + ".csv"))) << k;
  }
  EXPECT_TRUE(fs::exists(run / "gdv_curve.svg"));
  const auto manifest = json::parse(lxm::read_file(run / "manifest.json"));
  EXPECT_EQ(manifest.at("config").at("seed"), 2);
  std::vector<std::string> stages;
  for (const auto& s : manifest.at("stages")) stages.push_back(s.at("name"));
  EXPECT_EQ(stages, (std::vector<std::string>{"synth", "embed", "train", "probe", "analyze", "report"}));
}
