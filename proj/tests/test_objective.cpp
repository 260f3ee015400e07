#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "cuh/objective.hpp"
#include "doctest.h"

using namespace cuh;

namespace {

std::mt19937_64 rng(12345);

Matrix random_matrix(Index rows, Index cols) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = gauss(rng);
  }
  return m;
}

// Orthonormal columns via Householder QR.
ProjectionMatrix random_projection(Index d, Index r) {
  const Matrix base = random_matrix(d, r);
  const Matrix q = Eigen::HouseholderQR<Matrix>(base).householderQ() *
                   Matrix::Identity(d, r);
  return ProjectionMatrix{q};
}

ClusterAssignment random_assignment(Index n, int c) {
  std::uniform_int_distribution<int> pick(0, c - 1);
  ClusterAssignment g;
  g.num_clusters = c;
  g.assign.resize(static_cast<std::size_t>(n));
  // Guarantee every cluster appears at least once.
  for (Index i = 0; i < n; ++i) {
    g.assign[static_cast<std::size_t>(i)] =
        i < c ? static_cast<int>(i) : pick(rng);
  }
  return g;
}

BinaryCodeMatrix random_codes(Index r, Index n) {
  std::bernoulli_distribution coin(0.5);
  BinaryCodeMatrix codes;
  codes.b.resize(r, n);
  for (Index c = 0; c < n; ++c) {
    for (Index j = 0; j < r; ++j) codes.b(j, c) = coin(rng) ? 1.0 : -1.0;
  }
  return codes;
}

}  // namespace

TEST_CASE("clustering residual is zero on an exact fit") {
  const Index d = 5, r = 3, n = 8;
  const int c = 2;
  const ProjectionMatrix w = random_projection(d, r);
  const ViewMatrix view{random_matrix(d, n)};
  const ClusterAssignment g = random_assignment(n, c);
  // Build F so that every item's centroid equals its own projection: only
  // possible when each cluster holds identical projected columns, so copy
  // cluster 0's column everywhere first.
  Matrix x = view.data;
  for (Index i = 0; i < n; ++i) {
    x.col(i) = view.data.col(static_cast<Index>(
        g.assign[static_cast<std::size_t>(i)]));
  }
  const ViewMatrix grouped{x};
  Matrix f(r, c);
  for (int cc = 0; cc < c; ++cc) {
    f.col(cc) = w.w.transpose() * view.data.col(static_cast<Index>(cc));
  }
  CHECK(clustering_residual(grouped, w, CentroidMatrix{f}, g) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("clustering residual hand case: WtX=[1,-1], F=[0] gives sqrt(2)") {
  // d=1, r=1, identity projection keeps the data as-is.
  ViewMatrix view;
  view.data.resize(1, 2);
  view.data << 1.0, -1.0;
  const ProjectionMatrix w{Matrix::Identity(1, 1)};
  CentroidMatrix f{Matrix::Zero(1, 1)};
  ClusterAssignment g;
  g.num_clusters = 1;
  g.assign = {0, 0};
  CHECK(clustering_residual(view, w, f, g) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("clustering residual matches element-wise recomputation") {
  const Index d = 3, n = 4, r = 2;
  const int c = 2;
  const ViewMatrix view{random_matrix(d, n)};
  const ProjectionMatrix w = random_projection(d, r);
  const CentroidMatrix f{random_matrix(r, c)};
  const ClusterAssignment g = random_assignment(n, c);

  double sq = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < r; ++j) {
      double y = 0.0;
      for (Index k = 0; k < d; ++k) y += w.w(k, j) * view.data(k, i);
      const double diff =
          y - f.f(j, g.assign[static_cast<std::size_t>(i)]);
      sq += diff * diff;
    }
  }
  CHECK(clustering_residual(view, w, f, g) ==
        doctest::Approx(std::sqrt(sq)).epsilon(1e-12));
}

TEST_CASE("clustering residual is invariant under shared r x r rotation") {
  const Index d = 6, n = 10, r = 3;
  const int c = 3;
  const ViewMatrix view{random_matrix(d, n)};
  const ProjectionMatrix w = random_projection(d, r);
  const CentroidMatrix f{random_matrix(r, c)};
  const ClusterAssignment g = random_assignment(n, c);
  const Matrix q = random_projection(r, r).w;  // square orthogonal

  const ProjectionMatrix wq{w.w * q};
  const CentroidMatrix qf{q.transpose() * f.f};
  CHECK(clustering_residual(view, w, f, g) ==
        doctest::Approx(clustering_residual(view, wq, qf, g)).epsilon(1e-10));
}

TEST_CASE("clustering residual rejects mismatched shapes") {
  const ViewMatrix view{random_matrix(4, 3)};
  const ProjectionMatrix w = random_projection(5, 2);  // wrong row count
  const CentroidMatrix f{random_matrix(2, 1)};
  ClusterAssignment g;
  g.num_clusters = 1;
  g.assign = {0, 0, 0};
  CHECK_THROWS_AS(clustering_residual(view, w, f, g), DimensionError);
}

TEST_CASE("quantization error is zero when projections equal the codes") {
  // Identity projection, data columns already +/-1.
  const Index d = 3, n = 5;
  BinaryCodeMatrix codes = random_codes(d, n);
  const ViewMatrix view{codes.b};
  const ProjectionMatrix w{Matrix::Identity(d, d)};
  CHECK(quantization_error(view, w, codes) == doctest::Approx(0.0));
}

TEST_CASE("quantization error hand case: (1 - 0.5)^2") {
  ViewMatrix view;
  view.data.resize(1, 1);
  view.data << 0.5;
  const ProjectionMatrix w{Matrix::Identity(1, 1)};
  BinaryCodeMatrix codes;
  codes.b.resize(1, 1);
  codes.b << 1.0;
  CHECK(quantization_error(view, w, codes) ==
        doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("quantization error matches recomputation") {
  const Index d = 4, n = 6, r = 2;
  const ViewMatrix view{random_matrix(d, n)};
  const ProjectionMatrix w = random_projection(d, r);
  const BinaryCodeMatrix codes = random_codes(r, n);
  double sq = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < r; ++j) {
      double y = 0.0;
      for (Index k = 0; k < d; ++k) y += w.w(k, j) * view.data(k, i);
      sq += (codes.b(j, i) - y) * (codes.b(j, i) - y);
    }
  }
  CHECK(quantization_error(view, w, codes) ==
        doctest::Approx(sq).epsilon(1e-12));
}

TEST_CASE("prototype alignment is zero for zero centroids") {
  const BinaryCodeMatrix codes = random_codes(3, 7);
  const CentroidMatrix f{Matrix::Zero(3, 2)};
  const ClusterAssignment g = random_assignment(7, 2);
  CHECK(prototype_alignment(codes, f, g) == 0.0);
}

TEST_CASE("prototype alignment hand case: (+1,-1) . (3,1) = 2") {
  BinaryCodeMatrix codes;
  codes.b.resize(2, 1);
  codes.b << 1.0, -1.0;
  CentroidMatrix f{Matrix(2, 1)};
  f.f << 3.0, 1.0;
  ClusterAssignment g;
  g.num_clusters = 1;
  g.assign = {0};
  CHECK(prototype_alignment(codes, f, g) == doctest::Approx(2.0));
}

TEST_CASE("prototype alignment matches trace recomputation") {
  const Index r = 3, n = 9;
  const int c = 4;
  const BinaryCodeMatrix codes = random_codes(r, n);
  const CentroidMatrix f{random_matrix(r, c)};
  const ClusterAssignment g = random_assignment(n, c);
  // tr(B^T F G^T) with a dense indicator matrix.
  Matrix gm = Matrix::Zero(n, c);
  for (Index i = 0; i < n; ++i) {
    gm(i, g.assign[static_cast<std::size_t>(i)]) = 1.0;
  }
  const double oracle = (codes.b.transpose() * f.f * gm.transpose()).trace();
  CHECK(prototype_alignment(codes, f, g) ==
        doctest::Approx(oracle).epsilon(1e-12));
}

namespace {

// A structurally consistent random model/dataset pair for objective tests.
struct Instance {
  CuhModel model;
  MultiViewDataset data;
};

Instance random_instance(Index n = 12, int c = 3, Index r = 2) {
  Instance inst;
  const PerView<Index> dims{5, 4};
  inst.model.hyperparams.lambda = 0.7;
  inst.model.hyperparams.beta = 0.3;
  inst.model.hyperparams.num_clusters = c;
  inst.model.hyperparams.code_length = static_cast<int>(r);
  inst.model.weights.alpha = {0.9, 1.4};
  for (int k = 0; k < 2; ++k) {
    inst.data.views[k].data = random_matrix(dims[k], n);
    inst.model.projections[k] = random_projection(dims[k], r);
    inst.model.centroids[k].f = random_matrix(r, c);
  }
  inst.model.assignment = random_assignment(n, c);
  inst.model.codes = random_codes(r, n);
  return inst;
}

}  // namespace

TEST_CASE("objective vanishes on an exact fit with beta off") {
  // Cluster prototypes are +/-1 patterns shared by both views; every item's
  // projected column equals its prototype, which is also its code, so the
  // residual and quantization terms are both exactly zero.
  Instance inst = random_instance(6, 2, 3);
  inst.model.hyperparams.beta = 0.0;
  const BinaryCodeMatrix proto = random_codes(3, 2);
  Matrix y(3, 6);
  for (Index i = 0; i < 6; ++i) {
    y.col(i) = proto.b.col(
        inst.model.assignment.assign[static_cast<std::size_t>(i)]);
  }
  for (int k = 0; k < 2; ++k) {
    inst.data.views[k].data = inst.model.projections[k].w * y;
    inst.model.centroids[k].f = proto.b;
  }
  inst.model.codes.b = y;
  CHECK(objective(inst.model, inst.data) ==
        doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("objective equals the sum of its three term operations") {
  const Instance inst = random_instance();
  double oracle = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double res = clustering_residual(inst.data.views[k],
                                           inst.model.projections[k],
                                           inst.model.centroids[k],
                                           inst.model.assignment);
    oracle += inst.model.weights.alpha[k] * res * res;
    oracle += inst.model.hyperparams.lambda *
              quantization_error(inst.data.views[k], inst.model.projections[k],
                                 inst.model.codes);
    oracle -= inst.model.hyperparams.beta *
              prototype_alignment(inst.model.codes, inst.model.centroids[k],
                                  inst.model.assignment);
  }
  CHECK(objective(inst.model, inst.data) ==
        doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("objective is invariant under simultaneous item permutation") {
  Instance inst = random_instance();
  const double before = objective(inst.model, inst.data);

  const Index n = inst.data.count();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  Instance shuffled = inst;
  for (Index i = 0; i < n; ++i) {
    const Index j = perm[static_cast<std::size_t>(i)];
    for (int k = 0; k < 2; ++k) {
      shuffled.data.views[k].data.col(i) = inst.data.views[k].data.col(j);
    }
    shuffled.model.codes.b.col(i) = inst.model.codes.b.col(j);
    shuffled.model.assignment.assign[static_cast<std::size_t>(i)] =
        inst.model.assignment.assign[static_cast<std::size_t>(j)];
  }
  CHECK(objective(shuffled.model, shuffled.data) ==
        doctest::Approx(before).epsilon(1e-10));
}

TEST_CASE("objective rejects inconsistent shapes") {
  Instance inst = random_instance();
  inst.model.codes.b.conservativeResize(inst.model.codes.b.rows(),
                                        inst.model.codes.b.cols() - 1);
  CHECK_THROWS_AS(objective(inst.model, inst.data), DimensionError);
}

TEST_CASE("is_centered detects centered and uncentered views") {
  ViewMatrix view{random_matrix(4, 10)};
  CHECK_FALSE(is_centered(view));  // raw gaussian rows rarely sum to zero
  view.data.colwise() -= Vector(view.data.rowwise().mean());
  CHECK(is_centered(view));
}

TEST_CASE("orthonormality defect is zero for orthonormal columns") {
  const ProjectionMatrix w = random_projection(7, 3);
  CHECK(orthonormality_defect(w.w) <= 1e-14);
  Matrix skewed = w.w;
  skewed.col(0) *= 1.5;
  CHECK(orthonormality_defect(skewed) > 0.1);
}

TEST_CASE("hyperparameter validation enforces documented ranges") {
  Hyperparams hp;
  CHECK_NOTHROW(hp.validate(64, 32));
  Hyperparams bad = hp;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(bad.validate(64, 32), std::invalid_argument);
  bad = hp;
  bad.beta = -1.0;
  CHECK_THROWS_AS(bad.validate(64, 32), std::invalid_argument);
  bad = hp;
  bad.num_clusters = 0;
  CHECK_THROWS_AS(bad.validate(64, 32), std::invalid_argument);
  bad = hp;
  bad.code_length = 33;  // exceeds d2 = 32
  CHECK_THROWS_AS(bad.validate(64, 32), DimensionError);
}

TEST_CASE("model validation catches broken invariants") {
  Instance inst = random_instance();
  inst.model.means = {Vector(), Vector()};
  CHECK_NOTHROW(validate_model(inst.model));

  CuhModel bad = inst.model;
  bad.codes.b(0, 0) = 0.5;
  CHECK_THROWS_AS(validate_model(bad), std::invalid_argument);

  bad = inst.model;
  bad.projections[0].w *= 1.1;
  CHECK_THROWS_AS(validate_model(bad), std::invalid_argument);

  bad = inst.model;
  bad.weights.alpha[1] = -2.0;
  CHECK_THROWS_AS(validate_model(bad), std::invalid_argument);

  bad = inst.model;
  bad.assignment.assign[0] = 99;
  CHECK_THROWS_AS(validate_model(bad), std::invalid_argument);
}
