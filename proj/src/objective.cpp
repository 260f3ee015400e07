#include "cuh/objective.hpp"

#include <cmath>
#include <string>

namespace cuh {

namespace {

void check_projection(const ViewMatrix& view, const ProjectionMatrix& w) {
  if (w.w.rows() != view.dim()) {
    throw DimensionError("projection has " + std::to_string(w.w.rows()) +
                         " rows, view dimension is " +
                         std::to_string(view.dim()));
  }
}

void check_assignment(Index n, const ClusterAssignment& g, Index c) {
  if (g.count() != n) {
    throw DimensionError("assignment covers " + std::to_string(g.count()) +
                         " items, expected " + std::to_string(n));
  }
  if (g.num_clusters != c) {
    throw DimensionError("assignment declares " +
                         std::to_string(g.num_clusters) +
                         " clusters, centroid matrix has " +
                         std::to_string(c));
  }
}

}  // namespace

double clustering_residual(const ViewMatrix& view, const ProjectionMatrix& w,
                           const CentroidMatrix& f,
                           const ClusterAssignment& g) {
  check_projection(view, w);
  check_assignment(view.count(), g, f.f.cols());
  if (f.f.rows() != w.w.cols()) {
    throw DimensionError("centroid rows do not match projection columns");
  }
  const Matrix y = w.w.transpose() * view.data;
  double sq = 0.0;
  for (Index i = 0; i < y.cols(); ++i) {
    sq += (y.col(i) - f.f.col(g.assign[static_cast<std::size_t>(i)]))
              .squaredNorm();
  }
  return std::sqrt(sq);
}

double quantization_error(const ViewMatrix& view, const ProjectionMatrix& w,
                          const BinaryCodeMatrix& codes) {
  check_projection(view, w);
  if (codes.length() != w.w.cols() || codes.count() != view.count()) {
    throw DimensionError("code matrix shape does not match projected view");
  }
  return (codes.b - w.w.transpose() * view.data).squaredNorm();
}

double prototype_alignment(const BinaryCodeMatrix& codes,
                           const CentroidMatrix& f,
                           const ClusterAssignment& g) {
  check_assignment(codes.count(), g, f.f.cols());
  if (f.f.rows() != codes.length()) {
    throw DimensionError("centroid rows do not match code length");
  }
  double total = 0.0;
  for (Index i = 0; i < codes.count(); ++i) {
    total +=
        codes.b.col(i).dot(f.f.col(g.assign[static_cast<std::size_t>(i)]));
  }
  return total;
}

double objective(const CuhModel& model, const MultiViewDataset& data) {
  // Fused evaluation sharing one W^T X pass per view; tests cross-check it
  // against the three term operations, so this must stay an independent
  // computation route.
  double total = 0.0;
  for (int k = 0; k < 2; ++k) {
    const ViewMatrix& view = data.views[k];
    const ProjectionMatrix& w = model.projections[k];
    const CentroidMatrix& f = model.centroids[k];
    check_projection(view, w);
    check_assignment(view.count(), model.assignment, f.f.cols());
    if (model.codes.length() != w.w.cols() ||
        model.codes.count() != view.count() || f.f.rows() != w.w.cols()) {
      throw DimensionError("model shapes do not match dataset");
    }
    const Matrix y = w.w.transpose() * view.data;
    double residual_sq = 0.0;
    double align = 0.0;
    for (Index i = 0; i < y.cols(); ++i) {
      const auto centroid =
          f.f.col(model.assignment.assign[static_cast<std::size_t>(i)]);
      residual_sq += (y.col(i) - centroid).squaredNorm();
      align += model.codes.b.col(i).dot(centroid);
    }
    const double quant = (model.codes.b - y).squaredNorm();
    total += model.weights.alpha[k] * residual_sq +
             model.hyperparams.lambda * quant -
             model.hyperparams.beta * align;
  }
  return total;
}

}  // namespace cuh
