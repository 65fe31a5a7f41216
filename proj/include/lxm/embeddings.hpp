#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "lxm/corpus.hpp"

namespace lxm::embed {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense word vectors, one row per vocabulary type. Rows are indexed by the
/// same ids as the vocabulary the table was built from.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> forms, RowMatrix vectors);

  int dim() const { return static_cast<int>(vectors_.cols()); }
  std::size_t size() const { return forms_.size(); }
  const std::vector<std::string>& forms() const { return forms_; }
  const RowMatrix& vectors() const { return vectors_; }
  const Eigen::VectorXd& unk_vector() const { return unk_; }

  std::optional<int> find(std::string_view form) const;

  /// Row of a known form, else the UNK vector.
  Eigen::VectorXd lookup(std::string_view form) const;
  /// Row by id; kUnkId (or any id outside the table) yields the UNK vector.
  Eigen::Ref<const Eigen::VectorXd> lookup(int id) const;

  /// Unk vector = arithmetic mean of all rows.
  void recompute_unk();

 private:
  std::vector<std::string> forms_;
  std::unordered_map<std::string, int> index_;
  RowMatrix vectors_;
  Eigen::VectorXd unk_;
};

struct SkipGramConfig {
  int dim = 64;
  int context_window = 5;
  int negatives = 5;
  int epochs = 5;
  double lr = 0.025;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SkipGramResult {
  EmbeddingTable table;
  /// Mean negative-sampling loss per (center, context) pair, per epoch.
  std::vector<double> epoch_loss;
};

/// P(w) proportional to count(w)^0.75.
std::vector<double> negative_sampling_distribution(const corpus::Vocabulary& vocab);

/// Input vectors drawn uniformly from [-0.5/dim, 0.5/dim].
EmbeddingTable initial_table(const corpus::Vocabulary& vocab, int dim, std::uint64_t seed);

/// Skip-gram with negative sampling trained by plain SGD, single-threaded.
/// Windows do not span documents.
SkipGramResult train_skipgram(std::span<const std::vector<std::string>> documents, const corpus::Vocabulary& vocab,
                              const SkipGramConfig& config);

/// word2vec text layout: "<count> <dim>" then "form v1 ... vD" per line.
void save_table(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_table(const std::filesystem::path& path);
EmbeddingTable parse_table(std::string_view text, const std::string& source = "<embeddings>");

struct Neighbor {
  int id;
  std::string form;
  double cosine;
};

/// Descending cosine similarity, ties broken by ascending id.
std::vector<Neighbor> nearest(const EmbeddingTable& table, const Eigen::Ref<const Eigen::VectorXd>& query,
                              std::size_t k);

double cosine(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

}  // namespace lxm::embed
