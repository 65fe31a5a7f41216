#include "lxm/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "lxm/error.hpp"
#include "lxm/util.hpp"

namespace lxm::geometry {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

ScaledPoints zscore_half(const MatrixXd& points) {
  ScaledPoints out;
  out.values.resize(points.rows(), points.cols());
  const double n = static_cast<double>(points.rows());
  for (Index d = 0; d < points.cols(); ++d) {
    const auto col = points.col(d);
    const double mean = col.sum() / n;
    const double sigma = std::sqrt((col.array() - mean).square().sum() / n);
    const double magnitude = col.cwiseAbs().maxCoeff();
    // a constant column can still show rounding-level spread around its mean
    if (!(sigma > 1e-12 * std::max(1.0, magnitude))) {
      out.values.col(d).setZero();
      out.constant_dims.push_back(d);
      continue;
    }
    out.values.col(d) = (col.array() - mean) / (2.0 * sigma);
  }
  return out;
}

namespace {

inline double distance(const RowMatrix& p, Index i, Index j) { return (p.row(i) - p.row(j)).norm(); }

void check_labels(const MatrixXd& points, std::span<const int> labels) {
  if (static_cast<Index>(labels.size()) != points.rows()) throw ContractError("label count does not match point count");
}

}  // namespace

double mean_intra_class(const MatrixXd& points, std::span<const int> labels, int cls) {
  check_labels(points, labels);
  std::vector<Index> members;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == cls) members.push_back(static_cast<Index>(i));
  if (members.size() < 2)
    throw AnalysisError("class " + std::to_string(cls) + " needs at least 2 points for an intra-class distance");
  const RowMatrix p = points;
  double sum = 0.0;
  for (std::size_t a = 0; a + 1 < members.size(); ++a)
    for (std::size_t b = a + 1; b < members.size(); ++b) sum += distance(p, members[a], members[b]);
  const double pairs = 0.5 * static_cast<double>(members.size()) * static_cast<double>(members.size() - 1);
  return sum / pairs;
}

double mean_inter_class(const MatrixXd& points, std::span<const int> labels, int class_l, int class_m) {
  check_labels(points, labels);
  if (class_l > class_m) std::swap(class_l, class_m);
  std::vector<Index> left, right;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == class_l) left.push_back(static_cast<Index>(i));
    if (labels[i] == class_m) right.push_back(static_cast<Index>(i));
  }
  if (left.empty() || right.empty()) throw AnalysisError("inter-class distance needs two non-empty classes");
  const RowMatrix p = points;
  double sum = 0.0;
  for (Index i : left)
    for (Index j : right) sum += distance(p, i, j);
  return sum / (static_cast<double>(left.size()) * static_cast<double>(right.size()));
}

GdvBreakdown gdv_breakdown(const probe::LabeledPointCloud& cloud) {
  cloud.require_separable();
  if (cloud.points.cols() == 0) throw AnalysisError("point cloud has zero dimensions");
  check_labels(cloud.points, cloud.labels);

  // Classes are visited in order of first appearance so that renaming them
  // cannot change the summation order.
  std::vector<int> dense(cloud.class_names.size(), -1);
  std::vector<int> order;
  std::vector<int> label(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    int& slot = dense.at(static_cast<std::size_t>(cloud.labels[i]));
    if (slot < 0) {
      slot = static_cast<int>(order.size());
      order.push_back(cloud.labels[i]);
    }
    label[i] = slot;
  }
  const std::size_t L = order.size();

  const ScaledPoints scaled = zscore_half(cloud.points);
  const RowMatrix s = scaled.values;
  std::vector<double> sums(L * L, 0.0);
  for (Index i = 0; i < s.rows(); ++i) {
    const auto li = static_cast<std::size_t>(label[static_cast<std::size_t>(i)]);
    for (Index j = i + 1; j < s.rows(); ++j) {
      const auto lj = static_cast<std::size_t>(label[static_cast<std::size_t>(j)]);
      const std::size_t a = std::min(li, lj), b = std::max(li, lj);
      sums[a * L + b] += distance(s, i, j);
    }
  }

  std::vector<double> counts(L, 0.0);
  for (int l : label) counts[static_cast<std::size_t>(l)] += 1.0;

  GdvBreakdown out;
  out.n_points = cloud.size();
  out.dims = static_cast<std::size_t>(cloud.points.cols());
  out.constant_dims = scaled.constant_dims.size();
  double intra_total = 0.0;
  for (std::size_t c = 0; c < L; ++c) {
    const double intra = sums[c * L + c] / (0.5 * counts[c] * (counts[c] - 1.0));
    out.intra.push_back(intra);
    out.classes.push_back(cloud.class_names[static_cast<std::size_t>(order[c])]);
    out.class_counts.push_back(static_cast<std::size_t>(counts[c]));
    intra_total += intra;
  }
  double inter_total = 0.0;
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = a + 1; b < L; ++b) inter_total += sums[a * L + b] / (counts[a] * counts[b]);

  const double Ld = static_cast<double>(L);
  out.mean_intra = intra_total / Ld;
  out.mean_inter = 2.0 * inter_total / (Ld * (Ld - 1.0));
  out.value = (out.mean_intra - out.mean_inter) / std::sqrt(static_cast<double>(out.dims));
  return out;
}

double gdv(const probe::LabeledPointCloud& cloud) { return gdv_breakdown(cloud).value; }

MatrixXd distance_matrix(const MatrixXd& points) {
  const RowMatrix p = points;
  const Index n = p.rows();
  MatrixXd d = MatrixXd::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      const double v = distance(p, i, j);
      d(i, j) = v;
      d(j, i) = v;
    }
  return d;
}

namespace {

void fix_signs(MatrixXd& vectors) {
  for (Index c = 0; c < vectors.cols(); ++c) {
    Index arg;
    vectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, c) < 0) vectors.col(c) *= -1.0;
  }
}

void check_square(const MatrixXd& m, int k) {
  if (m.rows() != m.cols()) throw ContractError("eigensolver needs a square matrix");
  if (k < 1 || k > m.rows()) throw ContractError("eigensolver: k out of range");
}

// Ritz values of the tridiagonal (alpha, beta) in descending order, with the
// matching eigenvectors of T.
struct Ritz {
  VectorXd values;
  MatrixXd vectors;
};

Ritz ritz_pairs(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const auto m = static_cast<Index>(alpha.size());
  VectorXd diag = Eigen::Map<const VectorXd>(alpha.data(), m);
  VectorXd sub = m > 1 ? VectorXd(Eigen::Map<const VectorXd>(beta.data(), m - 1)) : VectorXd(0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw AnalysisError("tridiagonal eigensolver failed");
  Ritz r;
  r.values = es.eigenvalues().reverse();
  r.vectors = es.eigenvectors().rowwise().reverse();
  return r;
}

}  // namespace

EigenPairs top_eigenpairs_dense(const MatrixXd& symmetric, int k) {
  check_square(symmetric, k);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetric);
  if (es.info() != Eigen::Success) throw AnalysisError("dense eigensolver failed");
  const Index n = symmetric.rows();
  EigenPairs out;
  out.values = es.eigenvalues().tail(k).reverse();
  out.vectors = es.eigenvectors().rightCols(k).rowwise().reverse();
  out.iterations = static_cast<int>(n);
  fix_signs(out.vectors);
  return out;
}

EigenPairs top_eigenpairs_lanczos(const MatrixXd& a, int k, double tolerance, int max_iterations) {
  check_square(a, k);
  const Index n = a.rows();
  const Index limit = std::min<Index>(n, max_iterations);
  Rng rng(0x1a2c305);

  MatrixXd q(n, std::min<Index>(limit + 1, n));
  std::vector<double> alpha, beta;
  Index m = 0;

  auto start_vector = [&]() -> bool {
    for (int attempt = 0; attempt < 3; ++attempt) {
      VectorXd v(n);
      for (Index i = 0; i < n; ++i) v[i] = rng.normal();
      for (int pass = 0; pass < 2; ++pass)
        if (m > 0) v -= q.leftCols(m) * (q.leftCols(m).transpose() * v);
      const double norm = v.norm();
      if (norm > 1e-8) {
        q.col(m) = v / norm;
        return true;
      }
    }
    return false;
  };

  const double frob = a.norm();
  if (frob == 0.0) {
    // zero matrix: every vector is an eigenvector with eigenvalue 0
    EigenPairs out;
    out.values = VectorXd::Zero(k);
    out.vectors = MatrixXd::Identity(n, k);
    return out;
  }

  start_vector();
  Index block_start = 0;
  double prev_kth = -std::numeric_limits<double>::infinity();
  VectorXd w(n);
  while (m < limit) {
    w.noalias() = a * q.col(m);
    const double a_m = q.col(m).dot(w);
    w -= a_m * q.col(m);
    if (m > block_start) w -= beta.back() * q.col(m - 1);
    for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(m + 1) * (q.leftCols(m + 1).transpose() * w);
    alpha.push_back(a_m);
    ++m;
    const double b_m = w.norm();

    const bool full = m == limit;
    const bool breakdown = b_m <= tolerance * frob;
    const Index check_every = std::max<Index>(1, m / 10);
    if (!full && !breakdown && (m < k || m % check_every != 0)) {
      beta.push_back(b_m);
      q.col(m) = w / b_m;
      continue;
    }

    const Ritz ritz = ritz_pairs(alpha, beta);
    const double scale = std::max(std::abs(ritz.values[0]), std::abs(ritz.values[m - 1]));
    if (full || breakdown) {
      // the explored subspace is invariant; decide whether the complement can
      // still hold one of the top k eigenvalues (repeated eigenvalues)
      bool restart = false;
      if (m < k) {
        restart = true;
      } else if (!full) {
        std::vector<double> block(alpha.begin() + block_start, alpha.end());
        std::vector<double> block_beta(beta.begin() + block_start, beta.end());
        const double block_top = ritz_pairs(block, block_beta).values[0];
        restart = block_top > prev_kth + tolerance * std::max(scale, 1e-300);
      }
      if (restart && !full && m < n) {
        prev_kth = m >= k ? ritz.values[k - 1] : -std::numeric_limits<double>::infinity();
        beta.push_back(0.0);
        block_start = m;
        if (!start_vector()) break;
        continue;
      }
      if (m < k) throw AnalysisError("Lanczos: could not build " + std::to_string(k) + " eigenvectors");
    } else {
      bool converged = true;
      for (int i = 0; i < k; ++i)
        if (b_m * std::abs(ritz.vectors(m - 1, i)) > tolerance * scale) converged = false;
      if (!converged) {
        beta.push_back(b_m);
        q.col(m) = w / b_m;
        continue;
      }
    }

    EigenPairs out;
    out.values = ritz.values.head(k);
    out.vectors = q.leftCols(m) * ritz.vectors.leftCols(k);
    for (int i = 0; i < k; ++i) out.vectors.col(i).normalize();
    out.iterations = static_cast<int>(m);
    fix_signs(out.vectors);
    return out;
  }
  throw AnalysisError("Lanczos did not converge within " + std::to_string(limit) + " iterations");
}

EigenPairs top_eigenpairs(const MatrixXd& symmetric, int k, double tolerance, int max_iterations) {
  if (symmetric.rows() <= 256) return top_eigenpairs_dense(symmetric, k);
  return top_eigenpairs_lanczos(symmetric, k, tolerance, max_iterations);
}

MdsProjection mds_classical(const MatrixXd& distances) {
  const Index n = distances.rows();
  if (distances.cols() != n) throw ContractError("distance matrix must be square");
  if (n < 3) throw AnalysisError("MDS needs at least 3 points, got " + std::to_string(n));
  if (!distances.allFinite()) throw AnalysisError("distance matrix has non-finite entries");
  const double scale = std::max(1.0, distances.cwiseAbs().maxCoeff());
  if ((distances - distances.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw AnalysisError("distance matrix is not symmetric");
  if (distances.diagonal().cwiseAbs().maxCoeff() > 0.0) throw AnalysisError("distance matrix has non-zero diagonal");
  if (distances.minCoeff() < 0.0) throw AnalysisError("distance matrix has negative entries");

  // B = -1/2 J D^2 J
  const MatrixXd sq = distances.cwiseAbs2();
  const VectorXd row_mean = sq.rowwise().mean();
  const double grand = row_mean.mean();
  MatrixXd b(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) b(i, j) = -0.5 * (sq(i, j) - row_mean[i] - row_mean[j] + grand);
  b = 0.5 * (b + b.transpose()).eval();

  const EigenPairs eig = top_eigenpairs(b, 2);
  MdsProjection out;
  out.eigenvalues = eig.values;
  out.trace = b.trace();
  out.coords.resize(n, 2);
  for (int c = 0; c < 2; ++c) {
    const double lambda = eig.values[c];
    if (lambda < 0) out.clipped_negative_mass += -lambda;
    out.coords.col(c) = eig.vectors.col(c) * std::sqrt(std::max(lambda, 0.0));
  }
  out.coords.rowwise() -= out.coords.colwise().mean();
  return out;
}

probe::LabeledPointCloud filter_classes(const probe::LabeledPointCloud& cloud,
                                        std::span<const std::string> keep_classes) {
  std::set<std::string> keep(keep_classes.begin(), keep_classes.end());
  probe::LabeledPointCloud out;
  std::map<int, int> remap;
  for (std::size_t c = 0; c < cloud.class_names.size(); ++c) {
    if (keep.count(cloud.class_names[c])) {
      remap[static_cast<int>(c)] = static_cast<int>(out.class_names.size());
      out.class_names.push_back(cloud.class_names[c]);
    }
  }
  std::vector<Index> rows;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto it = remap.find(cloud.labels[i]);
    if (it == remap.end()) continue;
    rows.push_back(static_cast<Index>(i));
    out.labels.push_back(it->second);
    out.sample_ids.push_back(cloud.sample_ids[i]);
  }
  out.points.resize(static_cast<Index>(rows.size()), cloud.points.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.points.row(static_cast<Index>(r)) = cloud.points.row(rows[r]);
  return out;
}

probe::LabeledPointCloud group_rare_classes(const probe::LabeledPointCloud& cloud, std::size_t keep,
                                            const std::string& other) {
  const auto counts = cloud.class_counts();
  if (cloud.class_names.size() <= keep) return cloud;
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return counts[a] != counts[b] ? counts[a] > counts[b] : cloud.class_names[a] < cloud.class_names[b];
  });
  std::set<std::string> kept;
  for (std::size_t i = 0; i < keep; ++i) kept.insert(cloud.class_names[order[i]]);

  std::vector<std::string> names(kept.begin(), kept.end());
  names.push_back(other);
  std::sort(names.begin(), names.end());
  std::map<std::string, int> id;
  for (std::size_t i = 0; i < names.size(); ++i) id[names[i]] = static_cast<int>(i);

  probe::LabeledPointCloud out = cloud;
  out.class_names = names;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& name = cloud.class_names[static_cast<std::size_t>(cloud.labels[i])];
    out.labels[i] = kept.count(name) ? id.at(name) : id.at(other);
  }
  return out;
}

GdvReport gdv_curve(std::span<const probe::LabeledPointCloud> layers, std::size_t min_count) {
  if (layers.empty()) throw AnalysisError("no layers to analyse");
  std::map<std::string, std::size_t> min_seen;
  std::set<std::string> all;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto counts = layers[l].class_counts();
    std::map<std::string, std::size_t> here;
    for (std::size_t c = 0; c < counts.size(); ++c) here[layers[l].class_names[c]] += counts[c];
    for (const auto& [name, n] : here) all.insert(name);
    for (const auto& name : all) {
      const std::size_t n = here.count(name) ? here[name] : 0;
      auto it = min_seen.find(name);
      if (it == min_seen.end()) {
        min_seen[name] = l == 0 ? n : 0;
      } else {
        it->second = std::min(it->second, n);
      }
    }
  }
  std::vector<std::string> keep;
  GdvReport report;
  for (const auto& [name, n] : min_seen) {
    if (n >= std::max<std::size_t>(min_count, 2)) {
      keep.push_back(name);
    } else {
      report.dropped_classes.push_back(name);
    }
  }
  if (keep.size() < 2)
    throw AnalysisError("fewer than 2 classes reach min_count=" + std::to_string(min_count) + " in every layer");

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto filtered = filter_classes(layers[l], keep);
    const auto b = gdv_breakdown(filtered);
    LayerGdv row;
    row.layer = static_cast<int>(l);
    row.gdv = b.value;
    row.n_points = b.n_points;
    row.n_classes = b.classes.size();
    row.dims = b.dims;
    row.constant_dims = b.constant_dims;
    row.classes = b.classes;
    row.class_counts = b.class_counts;
    report.layers.push_back(std::move(row));
  }
  return report;
}

}  // namespace lxm::geometry
