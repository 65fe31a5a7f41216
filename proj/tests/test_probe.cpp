#include <gtest/gtest.h>

#include <filesystem>
#include <map>

#include "lxm/error.hpp"
#include "lxm/probe.hpp"
#include "lxm/util.hpp"

using namespace lxm;
using namespace lxm::probe;

namespace {

struct Fixture {
  embed::EmbeddingTable table;
  std::vector<corpus::SequenceSample> samples;
};

Fixture make_fixture(int window, int horizon, std::size_t n) {
  Rng rng(3);
  embed::RowMatrix m(10, 5);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  std::vector<std::string> forms;
  for (int i = 0; i < 10; ++i) forms.push_back("w" + std::to_string(i));
  Fixture f{embed::EmbeddingTable(forms, m), {}};
  for (std::size_t s = 0; s < n; ++s) {
    corpus::SequenceSample x;
    for (int t = 0; t < window; ++t) x.input_ids.push_back(static_cast<int>(rng.below(10)));
    for (int t = 0; t < horizon; ++t) x.target_ids.push_back(static_cast<int>(rng.below(10)));
    x.label = s % 3 == 0 ? "NOUN" : "VERB";
    x.position = s;
    f.samples.push_back(x);
  }
  return f;
}

std::filesystem::path tmp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "lxm_probe";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Probe, SixSetsWithExpectedWidths) {
  const model::Architecture arch{5, 4, 1, {6, 6, 3, 3}};
  const auto p = model::init_glorot(arch, 1);
  const auto f = make_fixture(4, 1, 10);
  const auto sets = extract_activations(p, f.samples, f.table, 3);
  ASSERT_EQ(sets.size(), 6u);
  const std::vector<Eigen::Index> widths{4 * 12, 4 * 12, 4 * 6, 4 * 6, 4 * 6, 5};
  const std::vector<std::string> names{"lstm1", "lstm2", "lstm3", "lstm4", "flatten", "output"};
  for (std::size_t l = 0; l < 6; ++l) {
    EXPECT_EQ(sets[l].layer_index, static_cast<int>(l));
    EXPECT_EQ(sets[l].layer_name, names[l]);
    EXPECT_EQ(sets[l].vectors.rows(), 10);
    EXPECT_EQ(sets[l].vectors.cols(), widths[l]);
    EXPECT_EQ(sets[l].labels.size(), 10u);
  }
  // last LSTM layer flattened row-major equals the flatten layer
  EXPECT_EQ(sets[3].vectors, sets[4].vectors);
}

TEST(Probe, MatchesSingleForwardAndIgnoresBatchSize) {
  const model::Architecture arch{5, 4, 2, {3, 2}};
  const auto p = model::init_glorot(arch, 2);
  const auto f = make_fixture(4, 2, 7);
  const auto a = extract_activations(p, f.samples, f.table, 2);
  const auto b = extract_activations(p, f.samples, f.table, 64);
  for (std::size_t l = 0; l < a.size(); ++l) EXPECT_TRUE(a[l].vectors.isApprox(b[l].vectors, 1e-14));

  for (std::size_t s = 0; s < f.samples.size(); ++s) {
    Eigen::MatrixXd in(4, 5);
    for (int t = 0; t < 4; ++t) in.row(t) = f.table.lookup(f.samples[s].input_ids[t]).transpose();
    const auto r = model::forward(p, in);
    const auto row = static_cast<Eigen::Index>(s);
    for (int l = 0; l < 2; ++l) {
      const auto& m = r.activations.layers[static_cast<std::size_t>(l)];
      for (int t = 0; t < 4; ++t)
        EXPECT_TRUE(a[l].vectors.row(row).segment(t * m.cols(), m.cols()).isApprox(m.row(t), 1e-12));
    }
    EXPECT_TRUE(a[3].vectors.row(row).transpose().isApprox(r.prediction, 1e-12));
  }
}

TEST(Probe, IdenticalInputsIdenticalVectors) {
  const model::Architecture arch{5, 4, 1, {4, 4}};
  const auto p = model::init_glorot(arch, 5);
  auto f = make_fixture(4, 1, 4);
  f.samples[3] = f.samples[1];
  const auto sets = extract_activations(p, f.samples, f.table, 3);
  for (const auto& s : sets) EXPECT_EQ(s.vectors.row(1), s.vectors.row(3));
}

TEST(Probe, CloudClassOrderIsSorted) {
  ActivationSet set;
  set.vectors = Eigen::MatrixXd::Zero(3, 2);
  set.labels = {"VERB", "ADJ", "VERB"};
  set.sample_ids = {4, 5, 6};
  const auto c = to_cloud(set);
  EXPECT_EQ(c.class_names, (std::vector<std::string>{"ADJ", "VERB"}));
  EXPECT_EQ(c.labels, (std::vector<int>{1, 0, 1}));
  EXPECT_EQ(c.class_counts(), (std::vector<std::size_t>{1, 2}));
  EXPECT_THROW(c.require_separable(), AnalysisError);
  set.labels[0] = "";
  EXPECT_THROW(to_cloud(set), AnalysisError);
}

TEST(Probe, StratifiedSubsampleProportions) {
  std::vector<std::string> labels;
  for (int i = 0; i < 1000; ++i) labels.push_back("NOUN");
  for (int i = 0; i < 1000; ++i) labels.push_back("VERB");
  for (int i = 0; i < 5; ++i) labels.push_back("X");
  const auto r = stratified_indices(labels, 400, 10, 1);
  std::map<std::string, int> counts;
  for (auto i : r.rows) ++counts[labels[i]];
  EXPECT_EQ(counts["NOUN"], 200);
  EXPECT_EQ(counts["VERB"], 200);
  EXPECT_EQ(counts.count("X"), 0u);
  ASSERT_EQ(r.notices.size(), 1u);
  EXPECT_NE(r.notices[0].find("'X'"), std::string::npos);
  EXPECT_TRUE(std::is_sorted(r.rows.begin(), r.rows.end()));
  EXPECT_EQ(std::adjacent_find(r.rows.begin(), r.rows.end()), r.rows.end());

  EXPECT_EQ(stratified_indices(labels, 400, 10, 1).rows, r.rows);
  EXPECT_NE(stratified_indices(labels, 400, 10, 2).rows, r.rows);
}

TEST(Probe, SubsampleLargestRemainder) {
  std::vector<std::string> labels;
  for (int i = 0; i < 50; ++i) labels.push_back("A");
  for (int i = 0; i < 30; ++i) labels.push_back("B");
  for (int i = 0; i < 20; ++i) labels.push_back("C");
  // cap 7: exact 3.5 / 2.1 / 1.4, floors 3/2/1, the one leftover goes to A
  const auto r = stratified_indices(labels, 7, 1, 4);
  std::map<std::string, int> counts;
  for (auto i : r.rows) ++counts[labels[i]];
  EXPECT_EQ(counts["A"], 4);
  EXPECT_EQ(counts["B"], 2);
  EXPECT_EQ(counts["C"], 1);

  const auto all = stratified_indices(labels, 1000, 10, 1);
  EXPECT_EQ(all.rows.size(), 100u);
  EXPECT_TRUE(all.notices.empty());
  EXPECT_THROW(stratified_indices(labels, 0, 10, 1), ConfigError);
}

TEST(Probe, CloudCsvRoundTrip) {
  LabeledPointCloud c;
  c.points = Eigen::MatrixXd(3, 2);
  c.points << 0.1, -2.5, 1e-300, 3.0, 1.0 / 3.0, 7.0;
  c.labels = {0, 1, 0};
  c.class_names = {"DET", "NOUN+VERB"};
  c.sample_ids = {10, 11, 42};
  const auto path = tmp_file("cloud.csv");
  dump_cloud(c, path);
  EXPECT_EQ(read_file(path).substr(0, 22), "sample_id,label,d0,d1\n");
  const auto back = load_cloud(path);
  EXPECT_EQ(back.points, c.points);
  EXPECT_EQ(back.sample_ids, c.sample_ids);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_EQ(back.class_names[static_cast<std::size_t>(back.labels[i])],
              c.class_names[static_cast<std::size_t>(c.labels[i])]);
}

TEST(Probe, CloudCsvErrors) {
  try {
    parse_cloud("sample_id,label,d0,d1\n0,A,1,2\n1,B,3\n", "t.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    parse_cloud("sample_id,label,d0\n0,A,1,2\n", "t.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_cloud("id,label,d0\n0,A,1\n"), ParseError);
  EXPECT_THROW(parse_cloud("sample_id,label,d0\n0,A,x\n"), ParseError);
  EXPECT_THROW(parse_cloud(""), ParseError);
}
