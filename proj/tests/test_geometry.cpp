#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <set>

#include "lxm/error.hpp"
#include "lxm/geometry.hpp"
#include "lxm/util.hpp"

using namespace lxm;
using namespace lxm::geometry;
using probe::LabeledPointCloud;

namespace {

LabeledPointCloud cloud_of(Eigen::MatrixXd points, std::vector<int> labels, std::vector<std::string> names) {
  LabeledPointCloud c;
  c.points = std::move(points);
  c.labels = std::move(labels);
  c.class_names = std::move(names);
  for (std::size_t i = 0; i < c.labels.size(); ++i) c.sample_ids.push_back(i);
  return c;
}

LabeledPointCloud random_cloud(Rng& rng, int n, int dims, int classes, double spread) {
  Eigen::MatrixXd centers = Eigen::MatrixXd::NullaryExpr(classes, dims, [&] { return rng.normal(); });
  Eigen::MatrixXd pts(n, dims);
  std::vector<int> labels;
  std::vector<std::string> names;
  for (int c = 0; c < classes; ++c) names.push_back("C" + std::to_string(c));
  for (int i = 0; i < n; ++i) {
    const int c = i % classes;
    labels.push_back(c);
    for (int d = 0; d < dims; ++d) pts(i, d) = centers(c, d) + spread * rng.normal();
  }
  return cloud_of(pts, labels, names);
}

// Straightforward reference: separate passes, textbook formulas.
double gdv_reference(const LabeledPointCloud& c) {
  const Eigen::Index n = c.points.rows(), D = c.points.cols();
  Eigen::MatrixXd s(n, D);
  for (Eigen::Index d = 0; d < D; ++d) {
    double mean = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) mean += c.points(i, d);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) var += (c.points(i, d) - mean) * (c.points(i, d) - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (Eigen::Index i = 0; i < n; ++i) s(i, d) = sd > 0 ? 0.5 * (c.points(i, d) - mean) / sd : 0.0;
  }
  std::set<int> present(c.labels.begin(), c.labels.end());
  const std::vector<int> cls(present.begin(), present.end());
  auto dist = [&](std::size_t i, std::size_t j) {
    return (s.row(static_cast<Eigen::Index>(i)) - s.row(static_cast<Eigen::Index>(j))).norm();
  };
  double intra = 0.0;
  for (int k : cls) {
    double sum = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j)
        if (c.labels[i] == k && c.labels[j] == k) sum += dist(i, j), pairs += 1.0;
    intra += sum / pairs;
  }
  intra /= static_cast<double>(cls.size());
  double inter = 0.0, class_pairs = 0.0;
  for (std::size_t a = 0; a < cls.size(); ++a)
    for (std::size_t b = a + 1; b < cls.size(); ++b) {
      double sum = 0.0, pairs = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j)
          if (c.labels[i] == cls[a] && c.labels[j] == cls[b]) sum += dist(i, j), pairs += 1.0;
      inter += sum / pairs;
      class_pairs += 1.0;
    }
  inter /= class_pairs;
  return (intra - inter) / std::sqrt(static_cast<double>(D));
}

Eigen::MatrixXd random_orthogonal(Rng& rng, int n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return rng.normal(); });
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

// Compares eigenvalues and the spanned subspaces of two decompositions.
void expect_same_top(const EigenPairs& a, const EigenPairs& b, double tol) {
  ASSERT_EQ(a.values.size(), b.values.size());
  for (Eigen::Index i = 0; i < a.values.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], tol) << i;
  const Eigen::MatrixXd pa = a.vectors * a.vectors.transpose();
  const Eigen::MatrixXd pb = b.vectors * b.vectors.transpose();
  EXPECT_LT((pa - pb).norm(), 1e-6);
}

double max_pairwise_distance_error(const Eigen::MatrixXd& coords, const Eigen::MatrixXd& d) {
  double err = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = 0; j < d.rows(); ++j)
      err = std::max(err, std::abs((coords.row(i) - coords.row(j)).norm() - d(i, j)));
  return err;
}

}  // namespace

TEST(Geometry, ZscoreHalf) {
  Eigen::MatrixXd x(4, 2);
  x << -1, 5, -1, 5, 1, 5, 1, 5;
  const auto s = zscore_half(x);
  EXPECT_EQ(s.values.col(0), Eigen::Vector4d(-0.5, -0.5, 0.5, 0.5));
  EXPECT_EQ(s.values.col(1), Eigen::Vector4d::Zero());
  EXPECT_EQ(s.constant_dims, std::vector<Eigen::Index>{1});

  Eigen::MatrixXd big = Eigen::MatrixXd::Constant(5, 1, 0.1 * 3);
  big(2, 0) = 0.3;  // 0.1 * 3 != 0.3 in binary
  EXPECT_EQ(zscore_half(big).constant_dims.size(), 1u);
}

TEST(Geometry, IntraAndInterClass) {
  Eigen::MatrixXd p(5, 1);
  p << 0, 1, 2, 10, 20;
  const std::vector<int> l{0, 0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(mean_intra_class(p, l, 0), 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(mean_intra_class(p, l, 1), 10.0);
  const double inter = (10 + 9 + 8 + 20 + 19 + 18) / 6.0;
  EXPECT_DOUBLE_EQ(mean_inter_class(p, l, 0, 1), inter);
  EXPECT_EQ(mean_inter_class(p, l, 0, 1), mean_inter_class(p, l, 1, 0));
  EXPECT_THROW(mean_intra_class(p, std::vector<int>{0, 1, 1, 1, 1}, 0), AnalysisError);
  EXPECT_THROW(mean_inter_class(p, l, 0, 2), AnalysisError);
}

TEST(Geometry, GdvMinusOne) {
  Eigen::MatrixXd p(4, 1);
  p << -1, -1, 1, 1;
  const auto c = cloud_of(p, {0, 0, 1, 1}, {"A", "B"});
  EXPECT_DOUBLE_EQ(gdv(c), -1.0);
  const auto b = gdv_breakdown(c);
  EXPECT_DOUBLE_EQ(b.mean_intra, 0.0);
  EXPECT_DOUBLE_EQ(b.mean_inter, 1.0);
}

TEST(Geometry, GdvMatchesReference) {
  Rng rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const auto c = random_cloud(rng, 60 + trial * 7, 3 + trial, 2 + trial % 3, 0.3 + 0.4 * trial);
    EXPECT_NEAR(gdv(c), gdv_reference(c), 1e-12);
  }
}

TEST(Geometry, GdvOverlappingClassesNearZero) {
  Rng rng(2);
  auto c = random_cloud(rng, 4000, 4, 2, 1.0);
  for (Eigen::Index i = 0; i < c.points.size(); ++i) c.points.data()[i] = rng.normal();
  EXPECT_NEAR(gdv(c), 0.0, 0.01);
}

TEST(Geometry, GdvInvariances) {
  Rng rng(3);
  const auto c = random_cloud(rng, 90, 5, 3, 0.8);
  const double g = gdv(c);

  auto shifted = c;
  for (Eigen::Index d = 0; d < 5; ++d) shifted.points.col(d).array() = shifted.points.col(d).array() * (d + 1.5) + 7.0 * d;
  EXPECT_NEAR(gdv(shifted), g, 1e-12);

  auto relabelled = c;
  relabelled.class_names = {"zeta", "alpha", "mid"};
  EXPECT_EQ(gdv(relabelled), g);

  auto remapped = c;
  remapped.class_names = {"X", "Y", "Z"};
  for (int& l : remapped.labels) l = (l + 1) % 3;
  std::swap(remapped.class_names[0], remapped.class_names[1]);
  EXPECT_EQ(gdv(remapped), g);

  auto permuted = c;
  std::vector<std::size_t> perm(c.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(perm));
  for (std::size_t i = 0; i < perm.size(); ++i) {
    permuted.points.row(static_cast<Eigen::Index>(i)) = c.points.row(static_cast<Eigen::Index>(perm[i]));
    permuted.labels[i] = c.labels[perm[i]];
  }
  EXPECT_NEAR(gdv(permuted), g, 1e-12);

  auto with_constant = c;
  with_constant.points.conservativeResize(Eigen::NoChange, 6);
  with_constant.points.col(5).setConstant(3.0);
  const auto b = gdv_breakdown(with_constant);
  EXPECT_EQ(b.constant_dims, 1u);
  EXPECT_EQ(b.dims, 6u);
  EXPECT_NEAR(b.value, g * std::sqrt(5.0 / 6.0), 1e-12);
}

TEST(Geometry, GdvRejectsDegenerateClouds) {
  Eigen::MatrixXd p(3, 1);
  p << 0, 1, 2;
  EXPECT_THROW(gdv(cloud_of(p, {0, 0, 1}, {"A", "B"})), AnalysisError);
  EXPECT_THROW(gdv(cloud_of(p, {0, 0, 0}, {"A", "B"})), AnalysisError);
  EXPECT_THROW(gdv(cloud_of(Eigen::MatrixXd(4, 0), {0, 0, 1, 1}, {"A", "B"})), AnalysisError);
}

TEST(Geometry, DistanceMatrix) {
  Eigen::MatrixXd p(3, 2);
  p << 0, 0, 3, 4, 6, 8;
  const auto d = distance_matrix(p);
  EXPECT_EQ(d, (Eigen::Matrix3d() << 0, 5, 10, 5, 0, 5, 10, 5, 0).finished());
}

TEST(Geometry, LanczosMatchesDense) {
  Rng rng(4);
  const int n = 300;
  Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return rng.normal(); });
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  for (int k : {1, 2, 5}) {
    const auto dense = top_eigenpairs_dense(sym, k);
    const auto lz = top_eigenpairs_lanczos(sym, k);
    expect_same_top(dense, lz, 1e-8);
    EXPECT_LT((sym * lz.vectors - lz.vectors * lz.values.asDiagonal()).norm(), 1e-7);
    EXPECT_LT((lz.vectors.transpose() * lz.vectors - Eigen::MatrixXd::Identity(k, k)).norm(), 1e-10);
  }

  // independent oracle for the dense path
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const auto dense = top_eigenpairs_dense(sym, 3);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(dense.values[i], es.eigenvalues()[n - 1 - i], 1e-10);
}

TEST(Geometry, LanczosLowRankAndRepeated) {
  Rng rng(5);
  const int n = 280;
  const Eigen::MatrixXd q = random_orthogonal(rng, n);

  Eigen::VectorXd low = Eigen::VectorXd::Zero(n);
  low.head(3) << 9.0, 4.0, 1.0;
  const Eigen::MatrixXd m_low = q * low.asDiagonal() * q.transpose();
  const auto a = top_eigenpairs_lanczos(m_low, 2);
  EXPECT_NEAR(a.values[0], 9.0, 1e-9);
  EXPECT_NEAR(a.values[1], 4.0, 1e-9);
  EXPECT_NEAR(std::abs(a.vectors.col(0).dot(q.col(0))), 1.0, 1e-9);

  Eigen::VectorXd rep = Eigen::VectorXd::LinSpaced(n, -1.0, 1.0);
  rep.head(3).setConstant(5.0);
  const Eigen::MatrixXd m_rep = q * rep.asDiagonal() * q.transpose();
  const auto b = top_eigenpairs_lanczos(m_rep, 3);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(b.values[i], 5.0, 1e-9);
  const Eigen::MatrixXd proj = b.vectors * b.vectors.transpose();
  const Eigen::MatrixXd truth = q.leftCols(3) * q.leftCols(3).transpose();
  EXPECT_LT((proj - truth).norm(), 1e-6);

  const auto zero = top_eigenpairs_lanczos(Eigen::MatrixXd::Zero(n, n), 2);
  EXPECT_EQ(zero.values, Eigen::Vector2d::Zero());
  EXPECT_LT((zero.vectors.transpose() * zero.vectors - Eigen::Matrix2d::Identity()).norm(), 1e-12);
}

TEST(Geometry, EigenSignConvention) {
  Rng rng(6);
  Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(20, 20, [&] { return rng.normal(); });
  const auto e = top_eigenpairs(a * a.transpose(), 3);
  for (int c = 0; c < 3; ++c) {
    Eigen::Index arg;
    e.vectors.col(c).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(e.vectors(arg, c), 0.0);
  }
  EXPECT_THROW(top_eigenpairs(a, 0), ContractError);
  EXPECT_THROW(top_eigenpairs(Eigen::MatrixXd(3, 4), 1), ContractError);
}

TEST(Geometry, MdsEquilateral) {
  const Eigen::Matrix3d d = (Eigen::Matrix3d() << 0, 1, 1, 1, 0, 1, 1, 1, 0).finished();
  const auto m = mds_classical(d);
  EXPECT_LT(max_pairwise_distance_error(m.coords, d), 1e-12);
  EXPECT_NEAR(m.eigenvalues[0], 0.5, 1e-12);
  EXPECT_NEAR(m.eigenvalues[1], 0.5, 1e-12);
  EXPECT_NEAR(m.trace, 1.0, 1e-12);
  EXPECT_EQ(m.clipped_negative_mass, 0.0);
}

TEST(Geometry, MdsRecoversPlanarConfigurations) {
  Rng rng(7);
  for (int n : {10, 300}) {
    Eigen::MatrixXd p = Eigen::MatrixXd::NullaryExpr(n, 2, [&] { return 3.0 * rng.normal(); });
    const auto d = distance_matrix(p);
    const auto m = mds_classical(d);
    EXPECT_LT(max_pairwise_distance_error(m.coords, d), 1e-9) << n;
    EXPECT_LT(m.coords.colwise().mean().norm(), 1e-12);
    EXPECT_NEAR(m.eigenvalues.sum(), m.trace, 1e-8 * m.trace);
  }
}

TEST(Geometry, MdsNonEuclideanReportsClipping) {
  // four points with one pair "too far": the centred matrix has a negative eigenvalue
  Eigen::Matrix4d d;
  d << 0, 1, 1, 5,
       1, 0, 1, 1,
       1, 1, 0, 1,
       5, 1, 1, 0;
  const auto m = mds_classical(d);
  EXPECT_TRUE(m.coords.allFinite());
  EXPECT_GE(m.clipped_negative_mass, 0.0);
  Eigen::MatrixXd sq = d.cwiseAbs2();
  const Eigen::Matrix4d j = Eigen::Matrix4d::Identity() - Eigen::Matrix4d::Constant(0.25);
  const Eigen::Matrix4d b = -0.5 * j * sq * j;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(b);
  EXPECT_NEAR(m.eigenvalues[0], es.eigenvalues()[3], 1e-10);
  EXPECT_NEAR(m.eigenvalues[1], es.eigenvalues()[2], 1e-10);
  EXPECT_NEAR(m.trace, b.trace(), 1e-10);
}

TEST(Geometry, MdsDegenerateAndInvalid) {
  const auto zero = mds_classical(Eigen::MatrixXd::Zero(5, 5));
  EXPECT_EQ(zero.coords, Eigen::MatrixXd::Zero(5, 2));
  EXPECT_THROW(mds_classical(Eigen::MatrixXd::Zero(2, 2)), AnalysisError);
  Eigen::Matrix3d bad = Eigen::Matrix3d::Zero();
  bad(0, 1) = 1.0;
  EXPECT_THROW(mds_classical(bad), AnalysisError);
  bad(1, 0) = 1.0;
  bad(2, 2) = 0.5;
  EXPECT_THROW(mds_classical(bad), AnalysisError);
  bad(2, 2) = std::nan("");
  EXPECT_THROW(mds_classical(bad), AnalysisError);
}

TEST(Geometry, GroupAndFilterClasses) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(10, 1);
  const auto c = cloud_of(p, {0, 0, 0, 1, 1, 2, 2, 3, 3, 3}, {"A+B", "B+C", "C+D", "D+E"});
  const auto g = group_rare_classes(c, 2);
  EXPECT_EQ(g.class_names, (std::vector<std::string>{"A+B", "D+E", "OTHER"}));
  EXPECT_EQ(g.labels, (std::vector<int>{0, 0, 0, 2, 2, 2, 2, 1, 1, 1}));

  const std::vector<std::string> keep{"D+E", "B+C"};
  const auto f = filter_classes(c, keep);
  EXPECT_EQ(f.class_names, (std::vector<std::string>{"B+C", "D+E"}));
  EXPECT_EQ(f.labels, (std::vector<int>{0, 0, 1, 1, 1}));
  EXPECT_EQ(f.sample_ids, (std::vector<std::size_t>{3, 4, 7, 8, 9}));
}

TEST(Geometry, GdvCurveSharedClasses) {
  Rng rng(8);
  std::vector<LabeledPointCloud> layers;
  for (int l = 0; l < 3; ++l) layers.push_back(random_cloud(rng, 60, 4, 3, 0.5 + l));
  // class C2 shrinks below the threshold in layer 1 only
  auto& mid = layers[1];
  int removed = 0;
  for (std::size_t i = 0; i < mid.size(); ++i)
    if (mid.labels[i] == 2 && removed++ >= 5) mid.labels[i] = 0;
  const auto report = gdv_curve(layers, 10);
  EXPECT_EQ(report.dropped_classes, std::vector<std::string>{"C2"});
  ASSERT_EQ(report.layers.size(), 3u);
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_EQ(report.layers[l].n_classes, 2u);
    const std::vector<std::string> kept{"C0", "C1"};
    EXPECT_NEAR(report.layers[l].gdv, gdv_reference(filter_classes(layers[l], kept)), 1e-12);
  }
  EXPECT_THROW(gdv_curve(layers, 1000), AnalysisError);
}
