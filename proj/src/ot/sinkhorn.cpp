#include "otval/ot/sinkhorn.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "otval/error.hpp"
#include "otval/measure.hpp"
#include "otval/simd/kernels.hpp"

namespace otval {
namespace {

Vector log_weights(const Vector& w) {
  Vector out(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    out[i] = w[i] > 0.0 ? std::log(w[i]) : -std::numeric_limits<double>::infinity();
  }
  return out;
}

// One half-sweep: out_i = -eps * log sum_j exp((pot_j - C_ij) / eps + logw_j),
// with C given row-major as rows x cols.
void soft_min(const Matrix& c, const Vector& pot, const Vector& logw, double eps, Vector& out) {
  const double inv_eps = 1.0 / eps;
  Vector h = pot * inv_eps + logw;
  const Index cols = c.cols();
  for (Index i = 0; i < c.rows(); ++i) {
    out[i] = -eps * simd::scaled_logsumexp(c.data() + i * cols, h.data(), inv_eps,
                                           static_cast<std::size_t>(cols));
  }
}

Matrix plan_from_potentials(const Matrix& c, const Vector& f, const Vector& g,
                            const Vector& a, const Vector& b, double eps) {
  Matrix p(c.rows(), c.cols());
  for (Index i = 0; i < c.rows(); ++i) {
    for (Index j = 0; j < c.cols(); ++j) {
      const double w = a[i] * b[j];
      p(i, j) = w > 0.0 ? w * std::exp((f[i] + g[j] - c(i, j)) / eps) : 0.0;
    }
  }
  return p;
}

// Projects an approximate coupling onto U(a, b) (Altschuler et al. rounding).
Matrix round_to_marginals(Matrix p, const Vector& a, const Vector& b) {
  Vector r = p.rowwise().sum();
  for (Index i = 0; i < p.rows(); ++i) {
    if (r[i] > a[i]) p.row(i) *= a[i] / r[i];
  }
  Vector col = p.colwise().sum().transpose();
  for (Index j = 0; j < p.cols(); ++j) {
    if (col[j] > b[j]) p.col(j) *= b[j] / col[j];
  }
  const Vector err_r = (a - p.rowwise().sum()).cwiseMax(0.0);
  const Vector err_c = (b - p.colwise().sum().transpose()).cwiseMax(0.0);
  const double mass = err_r.sum();
  if (mass > 0.0) p.noalias() += err_r * err_c.transpose() / mass;
  return p;
}

}  // namespace

OtSolution solve_entropic(const CostMatrix& cost, const Vector& a, const Vector& b,
                          double epsilon, const SinkhornOptions& options) {
  const Index n = cost.rows();
  const Index m = cost.cols();
  if (n < 1 || m < 1) throw InputError("solve_entropic: empty cost matrix");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InputError("solve_entropic: epsilon must be a positive finite number");
  }
  if (options.max_sweeps < 1 || options.check_every < 1) {
    throw InputError("solve_entropic: max_sweeps and check_every must be positive");
  }
  validate_weights(a, n, "solve_entropic source");
  validate_weights(b, m, "solve_entropic target");
  if (!cost.entries.allFinite()) throw InputError("solve_entropic: non-finite cost entries");

  const Matrix& c = cost.entries;
  const Matrix ct = c.transpose();
  const Vector log_a = log_weights(a);
  const Vector log_b = log_weights(b);

  Vector f = Vector::Zero(n);
  Vector g = Vector::Zero(m);
  Vector f_next(n);
  double err = std::numeric_limits<double>::infinity();
  int sweep = 0;
  while (sweep < options.max_sweeps) {
    soft_min(c, g, log_b, epsilon, f);
    soft_min(ct, f, log_a, epsilon, g);
    ++sweep;
    if (!f.allFinite() || !g.allFinite()) {
      throw SolverError("Sinkhorn iterates became non-finite; increase epsilon (now " +
                        std::to_string(epsilon) + ")");
    }
    if (sweep % options.check_every == 0 || sweep == options.max_sweeps) {
      // Columns are exact after the g half-step; the row error is read off
      // the next f update: row_i = a_i * exp((f_i - f_next_i) / eps).
      soft_min(c, g, log_b, epsilon, f_next);
      err = 0.0;
      for (Index i = 0; i < n; ++i) {
        if (a[i] > 0.0) err += std::abs(a[i] * std::exp((f[i] - f_next[i]) / epsilon) - a[i]);
      }
      if (err < options.marginal_tolerance) break;
    }
  }
  if (err >= options.marginal_tolerance) {
    spdlog::warn("Sinkhorn stopped after {} sweeps with marginal error {:.3e}", sweep, err);
  } else {
    spdlog::debug("Sinkhorn converged in {} sweeps (marginal error {:.3e})", sweep, err);
  }

  OtSolution sol;
  sol.plan.coupling = round_to_marginals(plan_from_potentials(c, f, g, a, b, epsilon), a, b);
  sol.plan.source_weights = a;
  sol.plan.target_weights = b;
  sol.potentials.f = f;
  sol.potentials.g = g;
  normalize_potentials(sol.potentials, b);
  sol.transport_cost = std::max(0.0, (sol.plan.coupling.array() * c.array()).sum());
  sol.distance = std::pow(sol.transport_cost, 1.0 / cost.power);
  return sol;
}

}  // namespace otval
