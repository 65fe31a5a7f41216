#include "lxm/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lxm/error.hpp"
#include "lxm/util.hpp"

namespace lxm::embed {

EmbeddingTable::EmbeddingTable(std::vector<std::string> forms, RowMatrix vectors)
    : forms_(std::move(forms)), vectors_(std::move(vectors)) {
  if (static_cast<Eigen::Index>(forms_.size()) != vectors_.rows())
    throw ContractError("embedding table: form count does not match row count");
  for (std::size_t i = 0; i < forms_.size(); ++i) {
    if (!index_.emplace(forms_[i], static_cast<int>(i)).second)
      throw ContractError("embedding table: duplicate form '" + forms_[i] + "'");
  }
  if (!vectors_.allFinite()) throw ContractError("embedding table: non-finite entry");
  recompute_unk();
}

std::optional<int> EmbeddingTable::find(std::string_view form) const {
  auto it = index_.find(std::string(form));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Eigen::VectorXd EmbeddingTable::lookup(std::string_view form) const {
  auto id = find(form);
  return id ? Eigen::VectorXd(vectors_.row(*id).transpose()) : unk_;
}

Eigen::Ref<const Eigen::VectorXd> EmbeddingTable::lookup(int id) const {
  if (id < 0 || id >= vectors_.rows()) return unk_;
  return vectors_.row(id).transpose();
}

void EmbeddingTable::recompute_unk() {
  unk_ = vectors_.rows() > 0 ? Eigen::VectorXd(vectors_.colwise().mean().transpose())
                             : Eigen::VectorXd::Zero(vectors_.cols());
}

void SkipGramConfig::validate() const {
  if (dim <= 0) throw ConfigError("embedding dim must be positive");
  if (negatives <= 0) throw ConfigError("negative sample count must be positive");
  if (context_window <= 0) throw ConfigError("context window must be positive");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
}

std::vector<double> negative_sampling_distribution(const corpus::Vocabulary& vocab) {
  std::vector<double> p(vocab.type_count());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::pow(static_cast<double>(vocab.counts()[i]), 0.75);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (total > 0.0)
    for (double& x : p) x /= total;
  return p;
}

EmbeddingTable initial_table(const corpus::Vocabulary& vocab, int dim, std::uint64_t seed) {
  if (dim <= 0) throw ConfigError("embedding dim must be positive");
  Rng rng(seed);
  RowMatrix vectors(static_cast<Eigen::Index>(vocab.type_count()), dim);
  const double half = 0.5 / dim;
  for (Eigen::Index r = 0; r < vectors.rows(); ++r)
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) vectors(r, c) = rng.uniform(-half, half);
  return EmbeddingTable(vocab.forms(), std::move(vectors));
}

namespace {

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

SkipGramResult train_skipgram(std::span<const std::vector<std::string>> documents, const corpus::Vocabulary& vocab,
                              const SkipGramConfig& config) {
  config.validate();
  if (vocab.type_count() == 0) throw ConfigError("cannot train embeddings on an empty vocabulary");

  EmbeddingTable init = initial_table(vocab, config.dim, config.seed);
  SkipGramResult result;
  if (config.epochs == 0) {
    result.table = std::move(init);
    return result;
  }

  RowMatrix input = init.vectors();
  RowMatrix output = RowMatrix::Zero(input.rows(), input.cols());

  std::vector<double> cumulative = negative_sampling_distribution(vocab);
  std::partial_sum(cumulative.begin(), cumulative.end(), cumulative.begin());

  // negatives come from a separate stream so the init above is unaffected
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  auto draw_negative = [&] {
    const double u = rng.uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(), std::ssize(cumulative) - 1));
  };

  std::vector<std::vector<int>> id_docs;
  std::size_t total_positions = 0;
  for (const auto& doc : documents) {
    std::vector<int> ids;
    for (const auto& t : doc) {
      if (auto id = vocab.find(t)) ids.push_back(*id);
    }
    total_positions += ids.size();
    id_docs.push_back(std::move(ids));
  }
  const double total_steps = static_cast<double>(total_positions) * config.epochs;
  double step = 0.0;

  Eigen::VectorXd grad_center(config.dim);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t pairs = 0;
    for (const auto& ids : id_docs) {
      const auto n = static_cast<std::ptrdiff_t>(ids.size());
      for (std::ptrdiff_t i = 0; i < n; ++i, step += 1.0) {
        // linear decay to 1e-4 * lr, as in the reference word2vec trainer
        const double lr = config.lr * std::max(1e-4, 1.0 - step / total_steps);
        const int center = ids[static_cast<std::size_t>(i)];
        // effective window drawn from 1..context_window per center word
        const auto reach = static_cast<std::ptrdiff_t>(1 + rng.below(static_cast<std::uint64_t>(config.context_window)));
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - reach);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + reach);
        for (std::ptrdiff_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const int context = ids[static_cast<std::size_t>(j)];
          auto v = input.row(center);
          grad_center.setZero();
          for (int k = 0; k <= config.negatives; ++k) {
            int target;
            double label;
            if (k == 0) {
              target = context;
              label = 1.0;
            } else {
              target = draw_negative();
              if (target == context) continue;
              label = 0.0;
            }
            auto u = output.row(target);
            const double score = u.dot(v);
            loss_sum -= label > 0 ? log_sigmoid(score) : log_sigmoid(-score);
            const double g = lr * (label - sigmoid(score));
            grad_center += g * u.transpose();
            u += g * v;
          }
          v += grad_center.transpose();
          ++pairs;
        }
      }
    }
    result.epoch_loss.push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);
  }
  if (!input.allFinite()) throw NumericError("skip-gram training diverged", -1, -1);
  result.table = EmbeddingTable(vocab.forms(), std::move(input));
  return result;
}

void save_table(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::string out = std::to_string(table.size()) + ' ' + std::to_string(table.dim()) + '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out += table.forms()[i];
    for (int c = 0; c < table.dim(); ++c) {
      out += ' ';
      out += format_double(table.vectors()(static_cast<Eigen::Index>(i), c));
    }
    out += '\n';
  }
  write_file(path, out);
}

namespace {

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  for (auto f : split(line, ' '))
    if (!f.empty()) out.push_back(f);
  return out;
}

}  // namespace

EmbeddingTable parse_table(std::string_view text, const std::string& source) {
  auto lines = split(text, '\n');
  std::size_t line_no = 0;
  long long count = -1, dim = -1;
  std::vector<std::string> forms;
  std::vector<double> values;
  for (std::string_view line : lines) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    auto fields = fields_of(line);
    if (count < 0) {
      if (fields.size() != 2 || !parse_int(fields[0], count) || !parse_int(fields[1], dim) || count < 0 || dim <= 0)
        throw ParseError(source, line_no, "expected header '<count> <dim>'");
      values.reserve(static_cast<std::size_t>(count * dim));
      continue;
    }
    if (static_cast<long long>(fields.size()) != dim + 1)
      throw ParseError(source, line_no,
                       "row has " + std::to_string(fields.size() - 1) + " values, header says " + std::to_string(dim));
    if (static_cast<long long>(forms.size()) == count) throw ParseError(source, line_no, "more rows than header count");
    forms.emplace_back(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      double v;
      if (!parse_double(fields[c], v) || !std::isfinite(v)) throw ParseError(source, line_no, "bad number");
      values.push_back(v);
    }
  }
  if (count < 0) throw ParseError(source, 0, "missing header");
  if (static_cast<long long>(forms.size()) != count)
    throw ParseError(source, line_no, "expected " + std::to_string(count) + " rows, found " + std::to_string(forms.size()));
  RowMatrix m = Eigen::Map<RowMatrix>(values.data(), count, dim);
  try {
    return EmbeddingTable(std::move(forms), std::move(m));
  } catch (const ContractError& e) {
    throw ParseError(source, 0, e.what());
  }
}

EmbeddingTable load_table(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("embedding file not found: " + path.string());
  return parse_table(read_file(path), path.string());
}

double cosine(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

std::vector<Neighbor> nearest(const EmbeddingTable& table, const Eigen::Ref<const Eigen::VectorXd>& query,
                              std::size_t k) {
  if (query.size() != table.dim()) throw ContractError("query dimension does not match embedding table");
  std::vector<Neighbor> all;
  all.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const int id = static_cast<int>(i);
    all.push_back({id, table.forms()[i], cosine(table.lookup(id), query)});
  }
  k = std::min(k, all.size());
  auto better = [](const Neighbor& a, const Neighbor& b) {
    return a.cosine != b.cosine ? a.cosine > b.cosine : a.id < b.id;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
  all.resize(k);
  return all;
}

}  // namespace lxm::embed
