#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lxm/corpus.hpp"
#include "lxm/embeddings.hpp"
#include "lxm/seqmodel.hpp"

namespace lxm::probe {

/// All records of one layer: row i of `vectors` is the flattened activation
/// of sample `sample_ids[i]`. Layer order: LSTM layers, flatten, output.
struct ActivationSet {
  int layer_index = 0;
  std::string layer_name;
  std::vector<std::size_t> sample_ids;
  Eigen::MatrixXd vectors;
  std::vector<std::string> labels;
};

struct LabeledPointCloud {
  Eigen::MatrixXd points;
  /// Index into class_names per point.
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::vector<std::size_t> sample_ids;

  std::size_t size() const { return labels.size(); }
  std::vector<std::size_t> class_counts() const;
  /// Throws AnalysisError when the cloud cannot be scored: fewer than two
  /// points, fewer than two classes, or a class with a single point.
  void require_separable() const;
};

/// One set per layer, `model.arch().layer_count() + 2` in total. Samples are
/// pushed through in batches of `batch`; results do not depend on it.
std::vector<ActivationSet> extract_activations(const model::ModelParams& model,
                                               std::span<const corpus::SequenceSample> samples,
                                               const embed::EmbeddingTable& table, int batch = 64);

/// Class ids follow sorted class names.
LabeledPointCloud to_cloud(const ActivationSet& set);

struct SubsampleResult {
  /// Selected row indices into the input, ascending.
  std::vector<std::size_t> rows;
  std::vector<std::string> notices;
};

/// Proportional per-class sampling without replacement (largest-remainder
/// allocation). When the cloud already fits within `cap` it is returned
/// unchanged; otherwise classes with fewer than `min_count` points are
/// dropped first.
SubsampleResult stratified_indices(std::span<const std::string> labels, std::size_t cap, std::size_t min_count,
                                   std::uint64_t seed);

struct CloudSubsample {
  LabeledPointCloud cloud;
  std::vector<std::string> notices;
};

CloudSubsample stratified_subsample(const LabeledPointCloud& cloud, std::size_t cap, std::uint64_t seed,
                                    std::size_t min_count = 10);

ActivationSet select_rows(const ActivationSet& set, std::span<const std::size_t> rows);

/// CSV with header "sample_id,label,d0,...,d{D-1}".
void dump_cloud(const LabeledPointCloud& cloud, const std::filesystem::path& path);
LabeledPointCloud load_cloud(const std::filesystem::path& path);
LabeledPointCloud parse_cloud(std::string_view text, const std::string& source = "<cloud>");

}  // namespace lxm::probe
