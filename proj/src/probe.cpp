#include "lxm/probe.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "lxm/error.hpp"
#include "lxm/util.hpp"

namespace lxm::probe {

using Eigen::Index;

std::vector<std::size_t> LabeledPointCloud::class_counts() const {
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (int l : labels) ++counts.at(static_cast<std::size_t>(l));
  return counts;
}

void LabeledPointCloud::require_separable() const {
  if (size() < 2) throw AnalysisError("point cloud needs at least 2 points");
  const auto counts = class_counts();
  std::size_t present = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    ++present;
    if (counts[c] < 2) throw AnalysisError("class '" + class_names[c] + "' has a single point");
  }
  if (present < 2) throw AnalysisError("point cloud needs at least 2 classes, found " + std::to_string(present));
}

std::vector<ActivationSet> extract_activations(const model::ModelParams& model,
                                               std::span<const corpus::SequenceSample> samples,
                                               const embed::EmbeddingTable& table, int batch) {
  const auto& arch = model.arch();
  if (batch <= 0) throw ConfigError("probe batch must be positive");
  const int n_layers = arch.layer_count();
  std::vector<ActivationSet> sets(static_cast<std::size_t>(n_layers + 2));
  for (int l = 0; l < n_layers + 2; ++l) {
    auto& set = sets[static_cast<std::size_t>(l)];
    set.layer_index = l;
    Index width;
    if (l < n_layers) {
      set.layer_name = "lstm" + std::to_string(l + 1);
      width = static_cast<Index>(arch.window) * arch.layer_output_dim(l);
    } else if (l == n_layers) {
      set.layer_name = "flatten";
      width = arch.flatten_dim();
    } else {
      set.layer_name = "output";
      width = arch.output_dim();
    }
    set.vectors.resize(static_cast<Index>(samples.size()), width);
    set.labels.reserve(samples.size());
    set.sample_ids.resize(samples.size());
    std::iota(set.sample_ids.begin(), set.sample_ids.end(), std::size_t{0});
    for (const auto& s : samples) set.labels.push_back(s.label);
  }

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t start = 0; start < samples.size(); start += static_cast<std::size_t>(batch)) {
    const std::size_t end = std::min(samples.size(), start + static_cast<std::size_t>(batch));
    const auto chunk = std::span<const std::size_t>(order).subspan(start, end - start);
    auto data = model::make_batch(table, samples, chunk, arch.window, arch.horizon);
    const auto trace = model::forward_batch(model, std::move(data.input), data.batch);
    for (int b = 0; b < data.batch; ++b) {
      const Index row = static_cast<Index>(start) + b;
      for (int l = 0; l < n_layers; ++l) {
        const auto& out = trace.layers[static_cast<std::size_t>(l)].output;
        const Index w = out.rows();
        auto dst = sets[static_cast<std::size_t>(l)].vectors.row(row);
        // row-major flatten of the W x 2H timestep matrix
        for (int t = 0; t < arch.window; ++t)
          dst.segment(static_cast<Index>(t) * w, w) = out.col(static_cast<Index>(t) * data.batch + b).transpose();
      }
      sets[static_cast<std::size_t>(n_layers)].vectors.row(row) = trace.flatten.col(b).transpose();
      sets[static_cast<std::size_t>(n_layers + 1)].vectors.row(row) = trace.output.col(b).transpose();
    }
  }
  return sets;
}

LabeledPointCloud to_cloud(const ActivationSet& set) {
  LabeledPointCloud cloud;
  std::map<std::string, int> ids;
  for (const auto& l : set.labels) {
    if (l.empty()) throw AnalysisError("unlabelled record in layer " + std::to_string(set.layer_index));
    ids.emplace(l, 0);
  }
  for (auto& [name, id] : ids) {
    id = static_cast<int>(cloud.class_names.size());
    cloud.class_names.push_back(name);
  }
  for (const auto& l : set.labels) cloud.labels.push_back(ids.at(l));
  cloud.points = set.vectors;
  cloud.sample_ids = set.sample_ids;
  return cloud;
}

SubsampleResult stratified_indices(std::span<const std::string> labels, std::size_t cap, std::size_t min_count,
                                   std::uint64_t seed) {
  SubsampleResult result;
  if (cap == 0) throw ConfigError("subsample cap must be positive");
  if (labels.size() <= cap) {
    result.rows.resize(labels.size());
    std::iota(result.rows.begin(), result.rows.end(), std::size_t{0});
    return result;
  }

  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::size_t kept_total = 0;
  for (auto it = by_class.begin(); it != by_class.end();) {
    if (it->second.size() < min_count) {
      result.notices.push_back("dropped class '" + it->first + "' with " + std::to_string(it->second.size()) +
                               " points (< " + std::to_string(min_count) + ")");
      it = by_class.erase(it);
    } else {
      kept_total += it->second.size();
      ++it;
    }
  }

  struct Quota {
    std::vector<std::size_t>* rows;
    std::size_t take;
    double remainder;
    std::size_t order;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  const std::size_t target = std::min(cap, kept_total);
  for (auto& [name, rows] : by_class) {
    const double exact = static_cast<double>(target) * static_cast<double>(rows.size()) / static_cast<double>(kept_total);
    const auto take = static_cast<std::size_t>(exact);
    quotas.push_back({&rows, take, exact - static_cast<double>(take), quotas.size()});
    assigned += take;
  }
  std::vector<std::size_t> by_remainder(quotas.size());
  std::iota(by_remainder.begin(), by_remainder.end(), std::size_t{0});
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](std::size_t a, std::size_t b) { return quotas[a].remainder > quotas[b].remainder; });
  for (std::size_t i = 0; assigned < target; i = (i + 1) % by_remainder.size()) {
    auto& q = quotas[by_remainder[i]];
    if (q.take < q.rows->size()) {
      ++q.take;
      ++assigned;
    }
  }

  Rng rng(seed);
  for (auto& q : quotas) {
    rng.shuffle(std::span<std::size_t>(*q.rows));
    result.rows.insert(result.rows.end(), q.rows->begin(), q.rows->begin() + static_cast<std::ptrdiff_t>(q.take));
  }
  std::sort(result.rows.begin(), result.rows.end());
  return result;
}

CloudSubsample stratified_subsample(const LabeledPointCloud& cloud, std::size_t cap, std::uint64_t seed,
                                    std::size_t min_count) {
  std::vector<std::string> names;
  names.reserve(cloud.size());
  for (int l : cloud.labels) names.push_back(cloud.class_names.at(static_cast<std::size_t>(l)));
  auto picked = stratified_indices(names, cap, min_count, seed);

  CloudSubsample out;
  out.notices = std::move(picked.notices);
  auto& c = out.cloud;
  c.class_names = cloud.class_names;
  c.points.resize(static_cast<Index>(picked.rows.size()), cloud.points.cols());
  for (std::size_t i = 0; i < picked.rows.size(); ++i) {
    const std::size_t r = picked.rows[i];
    c.points.row(static_cast<Index>(i)) = cloud.points.row(static_cast<Index>(r));
    c.labels.push_back(cloud.labels[r]);
    c.sample_ids.push_back(cloud.sample_ids[r]);
  }
  return out;
}

ActivationSet select_rows(const ActivationSet& set, std::span<const std::size_t> rows) {
  ActivationSet out;
  out.layer_index = set.layer_index;
  out.layer_name = set.layer_name;
  out.vectors.resize(static_cast<Index>(rows.size()), set.vectors.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.vectors.row(static_cast<Index>(i)) = set.vectors.row(static_cast<Index>(rows[i]));
    out.labels.push_back(set.labels.at(rows[i]));
    out.sample_ids.push_back(set.sample_ids.at(rows[i]));
  }
  return out;
}

void dump_cloud(const LabeledPointCloud& cloud, const std::filesystem::path& path) {
  std::string out = "sample_id,label";
  for (Index d = 0; d < cloud.points.cols(); ++d) out += ",d" + std::to_string(d);
  out += '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& label = cloud.class_names.at(static_cast<std::size_t>(cloud.labels[i]));
    if (label.find_first_of(",\n\r") != std::string::npos) throw ContractError("label contains a CSV delimiter");
    out += std::to_string(cloud.sample_ids[i]) + ',' + label;
    for (Index d = 0; d < cloud.points.cols(); ++d) {
      out += ',';
      out += format_double(cloud.points(static_cast<Index>(i), d));
    }
    out += '\n';
  }
  write_file(path, out);
}

LabeledPointCloud parse_cloud(std::string_view text, const std::string& source) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(source, 1, "missing header");

  auto header = split(lines[0], ',');
  if (header.size() < 2 || header[0] != "sample_id" || header[1] != "label")
    throw ParseError(source, 1, "header must start with sample_id,label");
  const std::size_t dims = header.size() - 2;
  for (std::size_t d = 0; d < dims; ++d)
    if (header[d + 2] != "d" + std::to_string(d)) throw ParseError(source, 1, "unexpected column name");

  std::vector<std::size_t> ids;
  std::vector<std::string> labels;
  std::vector<double> values;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    std::string_view line = lines[li];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto fields = split(line, ',');
    if (fields.size() != dims + 2)
      throw ParseError(source, li + 1,
                       "row has " + std::to_string(fields.size()) + " fields, header declares " + std::to_string(dims + 2));
    long long id;
    if (!parse_int(fields[0], id) || id < 0) throw ParseError(source, li + 1, "bad sample_id");
    if (fields[1].empty()) throw ParseError(source, li + 1, "empty label");
    ids.push_back(static_cast<std::size_t>(id));
    labels.emplace_back(fields[1]);
    for (std::size_t d = 0; d < dims; ++d) {
      double v;
      if (!parse_double(fields[d + 2], v)) throw ParseError(source, li + 1, "bad number in column d" + std::to_string(d));
      values.push_back(v);
    }
  }

  ActivationSet set;
  set.sample_ids = std::move(ids);
  set.labels = std::move(labels);
  set.vectors = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Index>(set.labels.size()), static_cast<Index>(dims));
  return to_cloud(set);
}

LabeledPointCloud load_cloud(const std::filesystem::path& path) { return parse_cloud(read_file(path), path.string()); }

}  // namespace lxm::probe
