#include "otval/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_set>

#include "otval/error.hpp"

namespace otval {
namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Detection detect_with_solution(const OtSolution& sol) {
  const Vector g = calibrated_gradients(sol.potentials.f);
  Detection out;
  out.distance = sol.distance;
  out.data.resize(static_cast<std::size_t>(g.size()));
  for (Index l = 0; l < g.size(); ++l) out.data[static_cast<std::size_t>(l)] = {l, g[l], g[l] > 0.0};
  return out;
}

}  // namespace

std::vector<double> contribution_shares(const std::vector<double>& distances) {
  if (distances.empty()) throw InputError("contribution_shares: no distances");
  std::size_t zeros = 0;
  for (double d : distances) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw InputError("contribution_shares: distances must be finite and nonnegative");
    }
    if (d == 0.0) ++zeros;
  }
  std::vector<double> shares(distances.size(), 0.0);
  if (zeros > 0) {
    for (std::size_t i = 0; i < distances.size(); ++i)
      if (distances[i] == 0.0) shares[i] = 1.0 / static_cast<double>(zeros);
    return shares;
  }
  double total = 0.0;
  for (double d : distances) total += 1.0 / d;
  for (std::size_t i = 0; i < distances.size(); ++i) shares[i] = (1.0 / distances[i]) / total;
  return shares;
}

Vector calibrated_gradients(const Vector& f) {
  const Index m = f.size();
  if (m < 2) throw InputError("calibrated gradients need at least two potentials");
  // Centre first: the result is shift invariant and the sum cancels exactly
  // up to rounding of the centred values.
  const Vector c = f.array() - f.mean();
  const double total = c.sum();
  const double inv = 1.0 / static_cast<double>(m - 1);
  Vector g(m);
  for (Index l = 0; l < m; ++l) g[l] = c[l] - (total - c[l]) * inv;
  return g;
}

DetectionMode parse_detection_mode(std::string_view name) {
  if (name == "eta_q") return DetectionMode::kEtaQ;
  if (name == "gamma") return DetectionMode::kGamma;
  if (name == "server_eta_q") return DetectionMode::kServerEtaQ;
  if (name == "server_q") return DetectionMode::kServerQ;
  throw InputError("unknown detection mode '" + std::string(name) +
                   "' (expected eta_q|gamma|server_eta_q|server_q)");
}

std::string_view detection_mode_name(DetectionMode mode) {
  switch (mode) {
    case DetectionMode::kEtaQ:
      return "eta_q";
    case DetectionMode::kGamma:
      return "gamma";
    case DetectionMode::kServerEtaQ:
      return "server_eta_q";
    case DetectionMode::kServerQ:
      return "server_q";
  }
  return "unknown";
}

Detection detect_noisy(const DiscreteMeasure& source, const DiscreteMeasure& target,
                       const SolverConfig& config) {
  if (source.size() < 2) throw InputError("detection needs at least two data points");
  return detect_with_solution(wasserstein(source, target, config));
}

Detection detect_noisy(const fed::FedSession& session, int client, DetectionMode mode) {
  if (client < 0 || client >= static_cast<int>(session.clients.size())) {
    throw InputError("no client " + std::to_string(client) + " in session");
  }
  if (session.rounds_run == 0) throw InputError("session has not run");
  const auto i = static_cast<std::size_t>(client);
  const fed::ClientState& c = session.clients[i];
  const SolverConfig& solver = session.config.solver;
  switch (mode) {
    case DetectionMode::kEtaQ:
      return detect_noisy(c.data, session.server.eta_q[i], solver);
    case DetectionMode::kGamma:
      return detect_noisy(c.data, c.gamma, solver);
    case DetectionMode::kServerEtaQ:
      return detect_noisy(c.eta_p, session.server.eta_q[i], solver);
    case DetectionMode::kServerQ:
      return detect_noisy(c.eta_p, session.server.q, solver);
  }
  throw InputError("unknown detection mode");
}

FiniteDifference finite_difference_check(const DiscreteMeasure& source,
                                         const DiscreteMeasure& target, Index datum,
                                         double delta, const SolverConfig& config) {
  source.validate();
  if (datum < 0 || datum >= source.size()) throw InputError("datum index out of range");
  if (!(delta > 0.0) || !(delta < source.weights.minCoeff())) {
    throw InputError("delta must lie in (0, min weight)");
  }
  const CostMatrix cost = cost_matrix(source.support, target.support, config.power);
  const OtSolution base = solve(cost, source.weights, target.weights, config);

  // Moving a_l by +-delta and renormalizing is a step along e_l - a; equal
  // steps either way keep the difference centred on kinks of the cost.
  auto shifted = [&](double step) {
    Vector a = source.weights * (1.0 - step);
    a[datum] += step;
    return a;
  };
  const Vector up = shifted(delta);
  const Vector down = shifted(-delta);
  const double c_up = solve(cost, up, target.weights, config).transport_cost;
  const double c_down = solve(cost, down, target.weights, config).transport_cost;

  FiniteDifference fd;
  fd.analytic = calibrated_gradients(base.potentials.f)[datum];
  fd.numeric = (c_up - c_down) / (up[datum] - down[datum]);
  return fd;
}

RelevanceReport relevance_from_distances(const std::vector<double>& distances) {
  RelevanceReport report;
  const std::vector<double> shares = contribution_shares(distances);
  report.median = median_of(distances);
  std::vector<double> dev(distances.size());
  for (std::size_t i = 0; i < distances.size(); ++i) dev[i] = std::abs(distances[i] - report.median);
  report.mad = median_of(dev);
  // The floor keeps exact ties from being flagged when the MAD is zero.
  report.threshold = report.median + std::max(kMadMultiplier * kMadScale * report.mad,
                                              1e-6 * std::abs(report.median));
  for (std::size_t i = 0; i < distances.size(); ++i) {
    report.clients.push_back({static_cast<int>(i), distances[i], shares[i],
                              distances[i] > report.threshold});
  }
  return report;
}

RelevanceReport relevance_report(const fed::FedSession& session) {
  if (session.estimates.empty()) throw InputError("session has not run");
  return relevance_from_distances(session.final_estimates());
}

DetectionMetrics score_detection(const std::vector<DatumValuation>& data,
                                 const std::vector<Index>& truth) {
  const std::unordered_set<Index> truth_set(truth.begin(), truth.end());
  DetectionMetrics m;
  m.truth = truth_set.size();
  for (const auto& d : data) {
    if (!d.flagged) continue;
    ++m.flagged;
    if (truth_set.count(d.index) > 0) ++m.true_positives;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto tp = static_cast<double>(m.true_positives);
  m.precision = m.flagged > 0 ? tp / static_cast<double>(m.flagged) : nan;
  m.recall = m.truth > 0 ? tp / static_cast<double>(m.truth) : nan;
  if (std::isnan(m.precision) || std::isnan(m.recall)) {
    m.f1 = nan;
  } else {
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                        : 0.0;
  }
  return m;
}

}  // namespace otval
