#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lxm/probe.hpp"

namespace lxm::geometry {

struct ScaledPoints {
  Eigen::MatrixXd values;
  /// Dimensions with zero spread; their scaled values are all 0.
  std::vector<Eigen::Index> constant_dims;
};

/// Per dimension (x - mean) / (2 * sigma), sigma the population standard
/// deviation.
ScaledPoints zscore_half(const Eigen::MatrixXd& points);

/// Mean Euclidean distance over unordered pairs within `cls`. Requires at
/// least two members.
double mean_intra_class(const Eigen::MatrixXd& points, std::span<const int> labels, int cls);

/// Mean Euclidean distance over all cross pairs; symmetric in (l, m).
double mean_inter_class(const Eigen::MatrixXd& points, std::span<const int> labels, int class_l, int class_m);

/// Generalized discrimination value of a labelled cloud: mean intra-class
/// distance minus mean inter-class distance of the z-scored points, over
/// sqrt(D). 0 for fully overlapping classes, more negative for better
/// separated ones; -1 is already a very strong separation.
double gdv(const probe::LabeledPointCloud& cloud);

struct GdvBreakdown {
  double value = 0.0;
  std::vector<std::string> classes;
  std::vector<std::size_t> class_counts;
  std::vector<double> intra;
  double mean_intra = 0.0;
  double mean_inter = 0.0;
  std::size_t n_points = 0;
  std::size_t dims = 0;
  std::size_t constant_dims = 0;
};

GdvBreakdown gdv_breakdown(const probe::LabeledPointCloud& cloud);

/// Symmetric with zero diagonal; Euclidean.
Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& points);

struct EigenPairs {
  Eigen::VectorXd values;   ///< descending
  Eigen::MatrixXd vectors;  ///< unit columns
  int iterations = 0;
};

/// Largest-algebraic eigenpairs of a symmetric matrix. Small matrices use a
/// dense solver; larger ones Lanczos with full reorthogonalization, run
/// until every residual is within `tolerance` relative to the spectral
/// scale. Throws AnalysisError when `max_iterations` is exhausted.
EigenPairs top_eigenpairs(const Eigen::MatrixXd& symmetric, int k, double tolerance = 1e-10,
                          int max_iterations = 10000);

/// Same contract, always dense. Used for small inputs and as a reference.
EigenPairs top_eigenpairs_dense(const Eigen::MatrixXd& symmetric, int k);

/// Lanczos path regardless of size.
EigenPairs top_eigenpairs_lanczos(const Eigen::MatrixXd& symmetric, int k, double tolerance = 1e-10,
                                  int max_iterations = 10000);

struct MdsProjection {
  Eigen::MatrixXd coords;        ///< N x 2, column means 0
  Eigen::VectorXd eigenvalues;   ///< the two selected, before clipping
  double clipped_negative_mass = 0.0;
  double trace = 0.0;            ///< trace of the double-centred matrix
};

/// Classical (Torgerson) MDS into the plane. Requires N >= 3.
MdsProjection mds_classical(const Eigen::MatrixXd& distances);

struct LayerGdv {
  int layer = 0;
  double gdv = 0.0;
  std::size_t n_points = 0;
  std::size_t n_classes = 0;
  std::size_t dims = 0;
  std::size_t constant_dims = 0;
  std::vector<std::string> classes;
  std::vector<std::size_t> class_counts;
};

struct GdvReport {
  std::vector<LayerGdv> layers;
  std::vector<std::string> dropped_classes;
};

/// GDV per layer over a shared class set: a class is kept only if it has at
/// least `min_count` points in every layer.
GdvReport gdv_curve(std::span<const probe::LabeledPointCloud> layers, std::size_t min_count = 10);

/// Keeps the `keep` most frequent classes (ties by name) and relabels the
/// rest as `other`.
probe::LabeledPointCloud group_rare_classes(const probe::LabeledPointCloud& cloud, std::size_t keep,
                                            const std::string& other = "OTHER");

probe::LabeledPointCloud filter_classes(const probe::LabeledPointCloud& cloud,
                                        std::span<const std::string> keep_classes);

}  // namespace lxm::geometry
