#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cuh/errors.hpp"

namespace cuh {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Everything in the pipeline comes in per-view pairs (k = 0, 1).
template <typename T>
using PerView = std::array<T, 2>;

struct Hyperparams {
  double lambda = 0.1;  // quantization-error weight
  double beta = 1e-4;   // code-prototype weight
  int num_clusters = 40;
  int code_length = 32;
  int max_outer_iters = 50;
  int inner_w_iters = 5;
  double rel_tol = 1e-5;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on out-of-range values. The code length
  // must not exceed either ambient dimension, otherwise the projections
  // cannot have orthonormal columns.
  void validate(Index d1, Index d2) const;
};

// One modality's features: d rows by N columns, one column per item.
struct ViewMatrix {
  Matrix data;

  Index dim() const { return data.rows(); }
  Index count() const { return data.cols(); }
};

// True when every row of the view sums to zero within 1e-9 * N.
bool is_centered(const ViewMatrix& view);

// d x r with orthonormal columns.
struct ProjectionMatrix {
  Matrix w;
};

// Largest entry of |W^T W - I|.
double orthonormality_defect(const Matrix& w);

// r x C, one centroid column per cluster.
struct CentroidMatrix {
  Matrix f;
};

// One cluster id per item, values in [0, num_clusters). Equivalent to an
// indicator matrix with a single 1 per row.
struct ClusterAssignment {
  std::vector<int> assign;
  int num_clusters = 0;

  Index count() const { return static_cast<Index>(assign.size()); }
};

std::vector<Index> cluster_counts(const ClusterAssignment& g);

// r x N with entries exactly +1 or -1.
struct BinaryCodeMatrix {
  Matrix b;

  Index length() const { return b.rows(); }
  Index count() const { return b.cols(); }
};

struct ViewWeights {
  PerView<double> alpha{0.5, 0.5};
};

struct CuhModel {
  PerView<ProjectionMatrix> projections;
  PerView<CentroidMatrix> centroids;
  ViewWeights weights;
  BinaryCodeMatrix codes;
  ClusterAssignment assignment;
  PerView<Vector> means;
  Hyperparams hyperparams;
};

// Cross-checks every component invariant and shape; used on deserialized
// models. Throws std::invalid_argument / DimensionError.
void validate_model(const CuhModel& model);

// Two feature matrices over the same N items plus optional per-item label
// sets (evaluation only, never used in training).
struct MultiViewDataset {
  PerView<ViewMatrix> views;
  std::optional<std::vector<std::vector<int>>> labels;
  // Per-view means subtracted by center(); zero-length until then.
  PerView<Vector> means;

  Index count() const { return views[0].count(); }
};

}  // namespace cuh
