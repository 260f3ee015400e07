#include "cuh/types.hpp"

#include <cmath>
#include <string>

namespace cuh {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void Hyperparams::validate(Index d1, Index d2) const {
  require(std::isfinite(lambda) && lambda > 0.0, "lambda must be positive");
  require(std::isfinite(beta) && beta >= 0.0, "beta must be non-negative");
  require(num_clusters >= 1, "num_clusters must be >= 1");
  require(code_length >= 1, "code_length must be >= 1");
  require(max_outer_iters >= 1, "max_outer_iters must be >= 1");
  require(inner_w_iters >= 1, "inner_w_iters must be >= 1");
  require(std::isfinite(rel_tol) && rel_tol > 0.0, "rel_tol must be positive");
  if (code_length > d1 || code_length > d2) {
    throw DimensionError("code_length " + std::to_string(code_length) +
                         " exceeds a view dimension (" + std::to_string(d1) +
                         ", " + std::to_string(d2) +
                         "); orthonormal columns need r <= d_k");
  }
}

bool is_centered(const ViewMatrix& view) {
  const double tol = 1e-9 * static_cast<double>(view.count());
  return (view.data.rowwise().sum().array().abs() <= tol).all();
}

double orthonormality_defect(const Matrix& w) {
  Matrix gram = w.transpose() * w;
  gram.diagonal().array() -= 1.0;
  return gram.cwiseAbs().maxCoeff();
}

std::vector<Index> cluster_counts(const ClusterAssignment& g) {
  std::vector<Index> counts(static_cast<std::size_t>(g.num_clusters), 0);
  for (int c : g.assign) {
    if (c < 0 || c >= g.num_clusters) {
      throw std::invalid_argument("cluster id " + std::to_string(c) +
                                  " outside [0, " +
                                  std::to_string(g.num_clusters) + ")");
    }
    ++counts[static_cast<std::size_t>(c)];
  }
  return counts;
}

void validate_model(const CuhModel& model) {
  const Index r = model.hyperparams.code_length;
  const Index n = model.codes.count();
  const Index c = model.hyperparams.num_clusters;

  model.hyperparams.validate(model.projections[0].w.rows(),
                             model.projections[1].w.rows());
  for (int k = 0; k < 2; ++k) {
    const Matrix& w = model.projections[k].w;
    if (w.cols() != r) {
      throw DimensionError("projection " + std::to_string(k + 1) + " has " +
                           std::to_string(w.cols()) + " columns, expected " +
                           std::to_string(r));
    }
    if (orthonormality_defect(w) > 1e-8) {
      throw std::invalid_argument("projection " + std::to_string(k + 1) +
                                  " lost column orthonormality");
    }
    const Matrix& f = model.centroids[k].f;
    if (f.rows() != r || f.cols() != c) {
      throw DimensionError("centroid matrix " + std::to_string(k + 1) +
                           " is " + std::to_string(f.rows()) + "x" +
                           std::to_string(f.cols()) + ", expected " +
                           std::to_string(r) + "x" + std::to_string(c));
    }
    if (!f.allFinite()) {
      throw std::invalid_argument("centroid matrix " + std::to_string(k + 1) +
                                  " has non-finite entries");
    }
    if (!(model.weights.alpha[k] > 0.0) ||
        !std::isfinite(model.weights.alpha[k])) {
      throw std::invalid_argument("view weight " + std::to_string(k + 1) +
                                  " must be positive and finite");
    }
    const Vector& mean = model.means[k];
    if (mean.size() != 0 && mean.size() != w.rows()) {
      throw DimensionError("mean vector " + std::to_string(k + 1) +
                           " length does not match view dimension");
    }
  }
  if (model.codes.length() != r) {
    throw DimensionError("code matrix has " +
                         std::to_string(model.codes.length()) +
                         " rows, expected " + std::to_string(r));
  }
  if (!((model.codes.b.array() == 1.0) || (model.codes.b.array() == -1.0))
           .all()) {
    throw std::invalid_argument("code matrix entries must be exactly +1/-1");
  }
  if (model.assignment.count() != n) {
    throw DimensionError("assignment covers " +
                         std::to_string(model.assignment.count()) +
                         " items, codes cover " + std::to_string(n));
  }
  if (model.assignment.num_clusters != c) {
    throw DimensionError("assignment declares " +
                         std::to_string(model.assignment.num_clusters) +
                         " clusters, hyperparams say " + std::to_string(c));
  }
  cluster_counts(model.assignment);  // range-checks every id
}

}  // namespace cuh
