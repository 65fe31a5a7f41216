#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "lxm/embeddings.hpp"
#include "lxm/error.hpp"
#include "lxm/synth.hpp"
#include "lxm/util.hpp"

using namespace lxm;
using namespace lxm::embed;

namespace {

std::vector<std::string> forms_of(const std::vector<corpus::TaggedToken>& toks) {
  std::vector<std::string> out;
  for (const auto& t : toks) out.push_back(t.form);
  return out;
}

EmbeddingTable small_table() {
  RowMatrix m(4, 3);
  m << 1, 0, 0,
       0, 1, 0,
       1, 1, 0,
       -1, 0, 0.5;
  return EmbeddingTable({"a", "b", "c", "d"}, m);
}

}  // namespace

TEST(Embeddings, NegativeSamplingDistribution) {
  corpus::Vocabulary v;
  v.add("a", 16);
  v.add("b", 1);
  v.add("c", 81);
  const auto p = negative_sampling_distribution(v);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  const double z = 8.0 + 1.0 + 27.0;  // counts^0.75
  EXPECT_NEAR(p[0], 8.0 / z, 1e-12);
  EXPECT_NEAR(p[1], 1.0 / z, 1e-12);
  EXPECT_NEAR(p[2], 27.0 / z, 1e-12);
}

TEST(Embeddings, InitialTableRange) {
  corpus::Vocabulary v;
  for (int i = 0; i < 50; ++i) v.add("w" + std::to_string(i));
  const auto t = initial_table(v, 20, 3);
  EXPECT_EQ(t.size(), 50u);
  EXPECT_EQ(t.dim(), 20);
  EXPECT_LE(t.vectors().cwiseAbs().maxCoeff(), 0.5 / 20);
  EXPECT_GT(t.vectors().cwiseAbs().maxCoeff(), 0.4 / 20);
}

TEST(Embeddings, ZeroEpochsReturnsInitialTable) {
  const std::vector<std::vector<std::string>> docs{{"a", "b", "c", "a"}};
  const auto v = corpus::build_vocab(docs[0]);
  SkipGramConfig cfg;
  cfg.epochs = 0;
  cfg.dim = 8;
  const auto r = train_skipgram(docs, v, cfg);
  EXPECT_TRUE(r.epoch_loss.empty());
  EXPECT_EQ(r.table.vectors(), initial_table(v, 8, cfg.seed).vectors());
}

TEST(Embeddings, LossDecreasesOnSyntheticCorpus) {
  const std::vector<std::vector<std::string>> docs{
      forms_of(synth::generate_corpus(synth::bundled_grammar(), 3000, 1))};
  const auto v = corpus::build_vocab(docs[0]);
  const auto r = train_skipgram(docs, v, SkipGramConfig{});
  ASSERT_EQ(r.epoch_loss.size(), 5u);
  for (std::size_t e = 1; e < r.epoch_loss.size(); ++e) EXPECT_LE(r.epoch_loss[e], r.epoch_loss[e - 1]) << e;
}

TEST(Embeddings, SharedContextsGiveSimilarVectors) {
  Rng rng(9);
  std::vector<std::string> doc;
  const std::vector<std::string> left{"l1", "l2", "l3"}, right{"r1", "r2", "r3"};
  const std::vector<std::string> zl{"p1", "p2", "p3"}, zr{"q1", "q2", "q3"};
  for (int s = 0; s < 1500; ++s) {
    switch (rng.below(3)) {
      case 0: doc.insert(doc.end(), {left[rng.below(3)], "a", right[rng.below(3)]}); break;
      case 1: doc.insert(doc.end(), {left[rng.below(3)], "b", right[rng.below(3)]}); break;
      default: doc.insert(doc.end(), {zl[rng.below(3)], "z", zr[rng.below(3)]}); break;
    }
  }
  const std::vector<std::vector<std::string>> docs{doc};
  const auto v = corpus::build_vocab(doc);
  SkipGramConfig cfg;
  cfg.dim = 16;
  cfg.context_window = 1;
  cfg.epochs = 10;
  const auto t = train_skipgram(docs, v, cfg).table;
  const auto a = t.lookup("a"), b = t.lookup("b"), z = t.lookup("z");
  EXPECT_GT(cosine(a, b), cosine(a, z));
  EXPECT_GT(cosine(a, b), 0.5);
}

TEST(Embeddings, DeterministicForSeed) {
  const std::vector<std::vector<std::string>> docs{
      forms_of(synth::generate_corpus(synth::bundled_grammar(), 200, 2))};
  const auto v = corpus::build_vocab(docs[0]);
  SkipGramConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 2;
  const auto r1 = train_skipgram(docs, v, cfg), r2 = train_skipgram(docs, v, cfg);
  EXPECT_EQ(r1.table.vectors(), r2.table.vectors());
  EXPECT_EQ(r1.epoch_loss, r2.epoch_loss);
}

TEST(Embeddings, ConfigValidation) {
  SkipGramConfig cfg;
  cfg.dim = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.lr = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.negatives = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Embeddings, SaveLoadBitEqual) {
  const auto dir = std::filesystem::temp_directory_path() / "lxm_embeddings_io";
  std::filesystem::create_directories(dir);
  corpus::Vocabulary v;
  for (int i = 0; i < 30; ++i) v.add("w" + std::to_string(i));
  const auto t = initial_table(v, 7, 5);
  save_table(t, dir / "t.txt");
  const auto back = load_table(dir / "t.txt");
  EXPECT_EQ(back.forms(), t.forms());
  EXPECT_EQ(back.vectors(), t.vectors());
  EXPECT_EQ(back.unk_vector(), t.unk_vector());
}

TEST(Embeddings, ParseErrors) {
  try {
    parse_table("3 4\na 1 2 3 4\nb 1 2 3 4 5\nc 1 2 3 4\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_table("2 2\na 1 2\n"), ParseError);
  EXPECT_THROW(parse_table("1 2\na 1 x\n"), ParseError);
  EXPECT_THROW(parse_table("2 1\na 1\na 2\n"), ParseError);
  EXPECT_THROW(parse_table(""), ParseError);
  EXPECT_THROW(load_table("/nonexistent/table.txt"), IoError);
}

TEST(Embeddings, UnkIsMeanRow) {
  const auto t = small_table();
  const Eigen::VectorXd mean = t.vectors().colwise().mean().transpose();
  EXPECT_TRUE(t.unk_vector().isApprox(mean));
  EXPECT_EQ(Eigen::VectorXd(t.lookup("zzz")), mean);
  EXPECT_EQ(Eigen::VectorXd(t.lookup(corpus::kUnkId)), mean);
  EXPECT_EQ(Eigen::VectorXd(t.lookup(1)), Eigen::Vector3d(0, 1, 0));
}

TEST(Embeddings, NearestMatchesBruteForce) {
  Rng rng(4);
  RowMatrix m(40, 5);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  m.row(17) = m.row(3);  // a tie
  std::vector<std::string> forms;
  for (int i = 0; i < 40; ++i) forms.push_back("f" + std::to_string(i));
  const EmbeddingTable t(forms, m);
  for (int q = 0; q < 5; ++q) {
    const Eigen::VectorXd query = q == 0 ? Eigen::VectorXd(m.row(3).transpose()) : Eigen::VectorXd::NullaryExpr(5, [&] { return rng.normal(); });
    std::vector<std::pair<double, int>> brute;
    for (int i = 0; i < 40; ++i) brute.push_back({-m.row(i).dot(query) / (m.row(i).norm() * query.norm()), i});
    std::sort(brute.begin(), brute.end());
    const auto got = nearest(t, query, 10);
    ASSERT_EQ(got.size(), 10u);
    for (std::size_t k = 0; k < 10; ++k) {
      EXPECT_EQ(got[k].id, brute[k].second);
      EXPECT_NEAR(got[k].cosine, -brute[k].first, 1e-12);
    }
    if (q == 0) {
      EXPECT_NEAR(got[0].cosine, 1.0, 1e-12);
      EXPECT_EQ(got[0].id, 3);
      EXPECT_EQ(got[1].id, 17);
    }
  }
  EXPECT_EQ(nearest(t, m.row(0).transpose(), 100).size(), 40u);
  EXPECT_THROW(nearest(t, Eigen::VectorXd::Zero(3), 1), ContractError);
}
