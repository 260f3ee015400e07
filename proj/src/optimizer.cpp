#include "cuh/optimizer.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>

namespace cuh {

namespace {

// Per-cluster column sums of `m` (one output column per cluster).
Matrix cluster_sums(const Matrix& m, const ClusterAssignment& g) {
  Matrix sums = Matrix::Zero(m.rows(), g.num_clusters);
  for (Index i = 0; i < m.cols(); ++i) {
    sums.col(g.assign[static_cast<std::size_t>(i)]) += m.col(i);
  }
  return sums;
}

// diag(1/(count_c + ridge)) as a vector; the ridge keeps empty clusters
// finite (their averaged columns collapse toward zero).
Vector inverse_counts(const ClusterAssignment& g) {
  const std::vector<Index> counts = cluster_counts(g);
  Vector inv(g.num_clusters);
  for (int c = 0; c < g.num_clusters; ++c) {
    inv(c) = 1.0 / (static_cast<double>(counts[static_cast<std::size_t>(c)]) +
                    kClusterRidge);
  }
  return inv;
}

void check_step_inputs(const ViewMatrix& view, const ClusterAssignment& g,
                       const BinaryCodeMatrix& codes) {
  if (g.count() != view.count() || codes.count() != view.count()) {
    throw DimensionError(
        "view, assignment, and codes disagree on item count (" +
        std::to_string(view.count()) + ", " + std::to_string(g.count()) +
        ", " + std::to_string(codes.count()) + ")");
  }
  if (g.num_clusters < 1) {
    throw std::invalid_argument("assignment declares no clusters");
  }
}

// Distinct sub-streams from one user seed (splitmix64 finalizer), so the
// assignment and code initializations never share draws.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double TrainTrace::max_relative_increase() const {
  double worst = 0.0;
  double prev = initial_objective;
  for (const Record& rec : records) {
    const double rise = rec.objective - prev;
    if (rise > 0.0) {
      worst = std::max(worst, rise / std::max(std::abs(prev), 1.0));
    }
    prev = rec.objective;
  }
  return worst;
}

WStepWork build_m_n(const ViewMatrix& view, const ClusterAssignment& g,
                    const BinaryCodeMatrix& codes, double alpha,
                    const Hyperparams& hp) {
  check_step_inputs(view, g, codes);
  const Matrix& x = view.data;
  const Matrix sx = cluster_sums(x, g);                      // d x C
  const Matrix sb = cluster_sums(codes.b, g);                // r x C
  const Vector inv = inverse_counts(g);

  WStepWork work;
  const Matrix raw = (alpha + hp.lambda) * (x * x.transpose()) -
                     alpha * (sx * inv.asDiagonal() * sx.transpose());
  work.m = 0.5 * (raw + raw.transpose());  // exact symmetry for the solver
  work.n = hp.lambda * (x * codes.b.transpose()) +
           (hp.beta / 2.0) * (sx * inv.asDiagonal() * sb.transpose());
  return work;
}

Matrix euclidean_gradient_w(const WStepWork& work, const ProjectionMatrix& w) {
  if (work.m.cols() != w.w.rows() || work.n.rows() != w.w.rows() ||
      work.n.cols() != w.w.cols()) {
    throw DimensionError("W-step workspace does not match projection shape");
  }
  return 2.0 * (work.m * w.w - work.n);
}

Matrix build_skew(const Matrix& grad, const ProjectionMatrix& w) {
  if (grad.rows() != w.w.rows() || grad.cols() != w.w.cols()) {
    throw DimensionError("gradient and projection shapes differ");
  }
  const Matrix u = grad * w.w.transpose();
  return u - u.transpose();  // antisymmetric to the last bit
}

ProjectionMatrix cayley_update(const ProjectionMatrix& w, const Matrix& skew,
                               double tau) {
  const Index d = w.w.rows();
  if (skew.rows() != d || skew.cols() != d) {
    throw DimensionError("skew matrix does not match projection rows");
  }
  const Matrix half = (tau / 2.0) * skew;
  const Matrix lhs = Matrix::Identity(d, d) + half;
  const Matrix rhs = (Matrix::Identity(d, d) - half) * w.w;
  return ProjectionMatrix{Eigen::PartialPivLU<Matrix>(lhs).solve(rhs)};
}

double bb_step_size(const Matrix& delta_w, const Matrix& delta_grad, double lo,
                    double hi, double fallback) {
  const double denom = std::abs(delta_w.cwiseProduct(delta_grad).sum());
  if (denom < 1e-18) return fallback;
  return std::clamp(delta_w.squaredNorm() / denom, lo, hi);
}

double w_subproblem_value(const WStepWork& work, const Matrix& w) {
  return w.cwiseProduct(work.m * w).sum() - 2.0 * w.cwiseProduct(work.n).sum();
}

ProjectionMatrix update_w_work(WStepWork work, int inner_iters,
                               const ProjectionMatrix& w_init,
                               std::vector<double>* value_log) {
  ProjectionMatrix w = w_init;
  work.grad = euclidean_gradient_w(work, w);
  work.tau = kTauDefault;
  double value = w_subproblem_value(work, w.w);
  if (value_log) value_log->push_back(value);

  Matrix prev_w, prev_grad;
  bool have_prev = false;
  for (int it = 0; it < inner_iters; ++it) {
    work.skew = build_skew(work.grad, w);
    if (have_prev) {
      work.tau = bb_step_size(w.w - prev_w, work.grad - prev_grad, kTauMin,
                              kTauMax, kTauDefault);
    }
    // Accept only non-increasing steps; halve tau otherwise.
    double tau = work.tau;
    ProjectionMatrix trial;
    double trial_value = 0.0;
    bool accepted = false;
    for (int bt = 0; bt <= kMaxBacktracks; ++bt) {
      trial = cayley_update(w, work.skew, tau);
      trial_value = w_subproblem_value(work, trial.w);
      if (trial_value <= value) {
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) break;
    prev_w = std::move(w.w);
    prev_grad = std::move(work.grad);
    have_prev = true;
    w = std::move(trial);
    value = trial_value;
    work.grad = euclidean_gradient_w(work, w);
    if (value_log) value_log->push_back(value);
  }
  return w;
}

ProjectionMatrix update_w(const ViewMatrix& view, const ClusterAssignment& g,
                          const BinaryCodeMatrix& codes, double alpha,
                          const Hyperparams& hp, const ProjectionMatrix& w_init,
                          std::vector<double>* value_log) {
  return update_w_work(build_m_n(view, g, codes, alpha, hp), hp.inner_w_iters,
                       w_init, value_log);
}

CentroidMatrix update_f(const ViewMatrix& view, const ClusterAssignment& g,
                        const BinaryCodeMatrix& codes, double alpha,
                        const Hyperparams& hp, const ProjectionMatrix& w) {
  check_step_inputs(view, g, codes);
  Matrix y = w.w.transpose() * view.data;
  y += (hp.beta / (2.0 * alpha)) * codes.b;
  const Matrix sums = cluster_sums(y, g);
  const Vector inv = inverse_counts(g);
  return CentroidMatrix{sums * inv.asDiagonal()};
}

ClusterAssignment update_g(const PerView<ViewMatrix>& views,
                           const PerView<ProjectionMatrix>& ws,
                           const PerView<CentroidMatrix>& fs,
                           const BinaryCodeMatrix& codes,
                           const ViewWeights& weights, const Hyperparams& hp) {
  const Index n = views[0].count();
  const int c = static_cast<int>(fs[0].f.cols());
  if (views[1].count() != n || codes.count() != n || fs[1].f.cols() != c) {
    throw DimensionError("views, codes, and centroids disagree on counts");
  }
  PerView<Matrix> z;
  for (int k = 0; k < 2; ++k) {
    z[k] = ws[k].w.transpose() * views[k].data;
    z[k] += (hp.beta / (2.0 * weights.alpha[k])) * codes.b;
  }
  ClusterAssignment out;
  out.num_clusters = c;
  out.assign.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    int best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int cand = 0; cand < c; ++cand) {
      double cost = 0.0;
      for (int k = 0; k < 2; ++k) {
        cost +=
            weights.alpha[k] * (z[k].col(i) - fs[k].f.col(cand)).squaredNorm();
      }
      if (cost < best_cost) {  // strict: ties stay with the smaller id
        best_cost = cost;
        best = cand;
      }
    }
    out.assign[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

ViewWeights update_alpha(const PerView<ViewMatrix>& views,
                         const PerView<ProjectionMatrix>& ws,
                         const PerView<CentroidMatrix>& fs,
                         const ClusterAssignment& g) {
  ViewWeights out;
  for (int k = 0; k < 2; ++k) {
    const double residual = clustering_residual(views[k], ws[k], fs[k], g);
    out.alpha[k] = 1.0 / (2.0 * std::max(residual, kResidualFloor));
  }
  return out;
}

BinaryCodeMatrix update_b(const PerView<ViewMatrix>& views,
                          const PerView<ProjectionMatrix>& ws,
                          const PerView<CentroidMatrix>& fs,
                          const ClusterAssignment& g, const Hyperparams& hp) {
  const Index n = views[0].count();
  const Index r = ws[0].w.cols();
  if (views[1].count() != n || g.count() != n) {
    throw DimensionError("views and assignment disagree on item count");
  }
  Matrix score = Matrix::Zero(r, n);
  for (int k = 0; k < 2; ++k) {
    score += hp.lambda * (ws[k].w.transpose() * views[k].data);
    for (Index i = 0; i < n; ++i) {
      score.col(i) += (hp.beta / 2.0) *
                      fs[k].f.col(g.assign[static_cast<std::size_t>(i)]);
    }
  }
  BinaryCodeMatrix codes;
  codes.b = score.unaryExpr([](double v) { return v > 0.0 ? 1.0 : -1.0; });
  return codes;
}

ClusterAssignment init_g(Index n, int c, std::uint64_t seed) {
  if (c < 1) throw std::invalid_argument("need at least one cluster");
  if (n < c) {
    throw std::invalid_argument("cannot spread " + std::to_string(n) +
                                " items over " + std::to_string(c) +
                                " clusters without leaving one empty");
  }
  std::mt19937_64 rng(seed);
  std::vector<int> order(static_cast<std::size_t>(c));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  ClusterAssignment g;
  g.num_clusters = c;
  g.assign.resize(static_cast<std::size_t>(n));
  const Index full = (n / c) * c;
  for (Index i = 0; i < full; ++i) {
    g.assign[static_cast<std::size_t>(i)] =
        order[static_cast<std::size_t>(i % c)];
  }
  // Remainder items draw distinct clusters from a fresh shuffle.
  std::shuffle(order.begin(), order.end(), rng);
  for (Index i = full; i < n; ++i) {
    g.assign[static_cast<std::size_t>(i)] =
        order[static_cast<std::size_t>(i - full)];
  }
  return g;
}

BinaryCodeMatrix init_b(int r, Index n, std::uint64_t seed) {
  if (r < 1 || n < 1) {
    throw std::invalid_argument("code matrix needs r >= 1 and n >= 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<double> row(static_cast<std::size_t>(n));
  BinaryCodeMatrix codes;
  codes.b.resize(r, n);
  const Index positives = (n + 1) / 2;
  for (int j = 0; j < r; ++j) {
    for (Index i = 0; i < n; ++i) {
      row[static_cast<std::size_t>(i)] = i < positives ? 1.0 : -1.0;
    }
    std::shuffle(row.begin(), row.end(), rng);
    for (Index i = 0; i < n; ++i) {
      codes.b(j, i) = row[static_cast<std::size_t>(i)];
    }
  }
  return codes;
}

TrainResult train(const MultiViewDataset& data, const Hyperparams& hp,
                  const TrainObserver& observer) {
  const Index n = data.count();
  if (data.views[1].count() != n) {
    throw DimensionError("views disagree on item count");
  }
  hp.validate(data.views[0].dim(), data.views[1].dim());
  for (int k = 0; k < 2; ++k) {
    if (!is_centered(data.views[k])) {
      throw std::invalid_argument("view " + std::to_string(k + 1) +
                                  " is not zero-centered; run center() first");
    }
  }

  TrainResult result;
  CuhModel& model = result.model;
  model.hyperparams = hp;
  model.means = data.means;
  for (int k = 0; k < 2; ++k) {
    model.projections[k].w =
        Matrix::Identity(data.views[k].dim(), hp.code_length);
  }
  model.assignment = init_g(n, hp.num_clusters, mix_seed(hp.seed, 0));
  model.codes = init_b(hp.code_length, n, mix_seed(hp.seed, 1));
  model.weights = ViewWeights{};
  for (int k = 0; k < 2; ++k) {
    model.centroids[k] =
        update_f(data.views[k], model.assignment, model.codes,
                 model.weights.alpha[k], hp, model.projections[k]);
  }

  TrainTrace& trace = result.trace;
  double prev_objective = objective(model, data);
  trace.initial_objective = prev_objective;
  if (observer) observer(0, model);

  std::vector<int> prev_assign = model.assignment.assign;
  Matrix prev_codes = model.codes.b;
  for (int iter = 1; iter <= hp.max_outer_iters; ++iter) {
    for (int k = 0; k < 2; ++k) {
      model.projections[k] =
          update_w(data.views[k], model.assignment, model.codes,
                   model.weights.alpha[k], hp, model.projections[k]);
    }
    for (int k = 0; k < 2; ++k) {
      model.centroids[k] =
          update_f(data.views[k], model.assignment, model.codes,
                   model.weights.alpha[k], hp, model.projections[k]);
    }
    model.assignment = update_g(data.views, model.projections, model.centroids,
                                model.codes, model.weights, hp);
    model.codes = update_b(data.views, model.projections, model.centroids,
                           model.assignment, hp);
    model.weights = update_alpha(data.views, model.projections,
                                 model.centroids, model.assignment);

    TrainTrace::Record rec;
    rec.iter = iter;
    rec.objective = objective(model, data);
    rec.alpha1 = model.weights.alpha[0];
    rec.alpha2 = model.weights.alpha[1];
    for (Index i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      rec.g_changes += model.assignment.assign[idx] != prev_assign[idx];
    }
    rec.b_flips =
        static_cast<int>((model.codes.b.array() != prev_codes.array()).count());
    trace.records.push_back(rec);
    if (!std::isfinite(rec.objective)) {
      throw std::runtime_error("objective diverged to a non-finite value at "
                               "iteration " +
                               std::to_string(iter));
    }
    if (observer) observer(iter, model);

    const double change = std::abs(rec.objective - prev_objective);
    if (change / std::max(std::abs(prev_objective), 1.0) < hp.rel_tol) {
      trace.converged = true;
      break;
    }
    prev_objective = rec.objective;
    prev_assign = model.assignment.assign;
    prev_codes = model.codes.b;
  }
  return result;
}

}  // namespace cuh
