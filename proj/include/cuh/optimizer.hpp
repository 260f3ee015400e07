#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cuh/objective.hpp"

namespace cuh {

// Step-size policy for the projection update. The BB value is clamped to
// [kTauMin, kTauMax]; kTauDefault seeds the first step and covers the
// degenerate-denominator fallback.
inline constexpr double kTauDefault = 1e-2;
inline constexpr double kTauMin = 1e-6;
inline constexpr double kTauMax = 1e2;
inline constexpr int kMaxBacktracks = 20;

// Tikhonov shift applied to G^T G so empty clusters never make the
// per-cluster averaging singular; an empty cluster's centroid column
// collapses to zero and can be re-acquired by a later assignment step.
inline constexpr double kClusterRidge = 1e-10;

// Residuals are floored here before inversion in the weight update.
inline constexpr double kResidualFloor = 1e-12;

// Workspace for one view's projection update.
struct WStepWork {
  Matrix m;     // d x d, symmetric
  Matrix n;     // d x r
  Matrix grad;  // d x r, Euclidean gradient of the trace objective
  Matrix skew;  // d x d, antisymmetric
  double tau = 0.0;
};

struct TrainTrace {
  struct Record {
    int iter = 0;
    double objective = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    int g_changes = 0;  // assignments changed by this iteration
    int b_flips = 0;    // code bits flipped by this iteration
  };

  double initial_objective = 0.0;
  std::vector<Record> records;
  bool converged = false;

  // Largest relative increase between consecutive objective values
  // (initialization counts as the first value); 0 for a non-increasing
  // trace. The weight step is not guaranteed to descend, so increases are
  // reported rather than asserted away.
  double max_relative_increase() const;
};

// M = (alpha + lambda) X X^T - alpha X G (G^T G)^-1 G^T X^T
// N = lambda X B^T + (beta/2) X G (G^T G)^-1 G^T B^T
// G (G^T G)^-1 G^T acts as per-cluster column averaging; the inverse is
// ridge-regularized (kClusterRidge).
WStepWork build_m_n(const ViewMatrix& view, const ClusterAssignment& g,
                    const BinaryCodeMatrix& codes, double alpha,
                    const Hyperparams& hp);

// P = 2 (M W - N).
Matrix euclidean_gradient_w(const WStepWork& work, const ProjectionMatrix& w);

// A = P W^T - W P^T; antisymmetric bitwise by construction order.
Matrix build_skew(const Matrix& grad, const ProjectionMatrix& w);

// W+ = (I + tau/2 A)^-1 (I - tau/2 A) W. Preserves orthonormal columns for
// antisymmetric A; the system matrix is always invertible in that case.
ProjectionMatrix cayley_update(const ProjectionMatrix& w, const Matrix& skew,
                               double tau);

// tau = <dW, dW> / |<dW, dP>| clamped to [lo, hi]; returns `fallback` when
// the denominator is below 1e-18.
double bb_step_size(const Matrix& delta_w, const Matrix& delta_grad, double lo,
                    double hi, double fallback);

// Subproblem value tr(W^T M W) - 2 tr(W^T N).
double w_subproblem_value(const WStepWork& work, const Matrix& w);

// Inner driver over a prebuilt workspace: `inner_iters` Cayley steps with BB
// step sizes, each accepted only if the subproblem value does not increase
// (otherwise tau is halved, up to kMaxBacktracks times; a fully failed
// backtrack ends the loop with the current iterate). When `value_log` is
// given it receives the value at w_init and after every accepted step.
ProjectionMatrix update_w_work(WStepWork work, int inner_iters,
                               const ProjectionMatrix& w_init,
                               std::vector<double>* value_log = nullptr);

// build_m_n + update_w_work with hp.inner_w_iters steps.
ProjectionMatrix update_w(const ViewMatrix& view, const ClusterAssignment& g,
                          const BinaryCodeMatrix& codes, double alpha,
                          const Hyperparams& hp, const ProjectionMatrix& w_init,
                          std::vector<double>* value_log = nullptr);

// F = (beta/(2 alpha) B + W^T X) G (G^T G)^-1, ridge-regularized; column c is
// the mean of beta/(2 alpha) b_i + W^T x_i over the items of cluster c.
CentroidMatrix update_f(const ViewMatrix& view, const ClusterAssignment& g,
                        const BinaryCodeMatrix& codes, double alpha,
                        const Hyperparams& hp, const ProjectionMatrix& w);

// Per item: argmin_c sum_k alpha_k ||W_k^T x_k^i + beta/(2 alpha_k) b_i -
// F_k e_c||^2, ties broken toward the smallest cluster id.
ClusterAssignment update_g(const PerView<ViewMatrix>& views,
                           const PerView<ProjectionMatrix>& ws,
                           const PerView<CentroidMatrix>& fs,
                           const BinaryCodeMatrix& codes,
                           const ViewWeights& weights, const Hyperparams& hp);

// alpha_k = 1 / (2 max(residual_k, kResidualFloor)).
ViewWeights update_alpha(const PerView<ViewMatrix>& views,
                         const PerView<ProjectionMatrix>& ws,
                         const PerView<CentroidMatrix>& fs,
                         const ClusterAssignment& g);

// B = sgn(sum_k lambda W_k^T X_k + (beta/2) F_k G^T), with sgn(0) = -1.
BinaryCodeMatrix update_b(const PerView<ViewMatrix>& views,
                          const PerView<ProjectionMatrix>& ws,
                          const PerView<CentroidMatrix>& fs,
                          const ClusterAssignment& g, const Hyperparams& hp);

// Block initialization: a seeded cluster permutation repeated cyclically
// gives every cluster floor(n/c) items; the remainder items draw distinct
// clusters from a second seeded shuffle.
ClusterAssignment init_g(Index n, int c, std::uint64_t seed);

// Balanced rows: ceil(n/2) entries of +1 and floor(n/2) of -1 per row,
// positions shuffled row by row.
BinaryCodeMatrix init_b(int r, Index n, std::uint64_t seed);

// Called after initialization (iter 0) and after every outer iteration.
using TrainObserver = std::function<void(int iter, const CuhModel& model)>;

struct TrainResult {
  CuhModel model;
  TrainTrace trace;
};

// Alternating optimization, step order W -> F -> G -> B -> alpha, until the
// relative objective change drops below hp.rel_tol or hp.max_outer_iters is
// reached. `data` must be centered. Deterministic for fixed inputs and seed.
TrainResult train(const MultiViewDataset& data, const Hyperparams& hp,
                  const TrainObserver& observer = {});

}  // namespace cuh
