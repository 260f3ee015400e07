#pragma once

#include "cuh/types.hpp"

namespace cuh {

// Frobenius norm (not squared) of W^T X - F G^T.
double clustering_residual(const ViewMatrix& view, const ProjectionMatrix& w,
                           const CentroidMatrix& f, const ClusterAssignment& g);

// Squared Frobenius norm of B - W^T X.
double quantization_error(const ViewMatrix& view, const ProjectionMatrix& w,
                          const BinaryCodeMatrix& codes);

// tr(B^T F G^T) = sum_i b_i . f_{g(i)}.
double prototype_alignment(const BinaryCodeMatrix& codes,
                           const CentroidMatrix& f, const ClusterAssignment& g);

// Full objective at the model's current (frozen) view weights:
//   sum_k  alpha_k * residual_k^2 + lambda * quant_k - beta * align_k
double objective(const CuhModel& model, const MultiViewDataset& data);

}  // namespace cuh
