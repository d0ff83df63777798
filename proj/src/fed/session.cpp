#include "otval/fed/session.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

#include "otval/error.hpp"
#include "otval/geodesic.hpp"

namespace otval::fed {
namespace {

// Runs body(i) for every client, on one thread each when `parallel` is set.
// The lowest-index failure is rethrown after all workers finish.
template <class Body>
void for_each_client(std::size_t n, bool parallel, Body body) {
  if (!parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> workers;
  workers.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    workers.emplace_back([&, i] {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Matrix normal_draws(Index rows, Index cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix x(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) x(i, k) = scale * nd(rng);
  return x;
}

std::uint64_t client_seed(std::uint64_t seed, int client) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(client) + 1U};
  std::uint64_t out[1];
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out[0];
}

template <class Fn>
auto with_client_context(int client, Fn fn) {
  try {
    return fn();
  } catch (const SolverError& e) {
    throw SolverError("client " + std::to_string(client) + ": " + e.what());
  }
}

}  // namespace

Mode parse_mode(std::string_view name) {
  if (name == "fixed") return Mode::kFixedValidation;
  if (name == "barycenter") return Mode::kBarycenter;
  throw InputError("unknown mode '" + std::string(name) + "' (expected fixed|barycenter)");
}

std::string_view mode_name(Mode mode) {
  return mode == Mode::kFixedValidation ? "fixed" : "barycenter";
}

void FedConfig::validate() const {
  if (num_clients < 1) throw InputError("need at least one client");
  if (rounds < 1) throw InputError("rounds K must be at least 1");
  if (support_size < 1) throw InputError("support size S must be at least 1");
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("t must lie in [0, 1]");
  if (!(solver.power >= 1.0) || !std::isfinite(solver.power)) throw InputError("p must be >= 1");
  if (solver.backend == Backend::kEntropic && !(solver.epsilon > 0.0)) {
    throw InputError("entropic backend needs epsilon > 0");
  }
  if (!(stop_tolerance >= 0.0)) throw InputError("stop tolerance must be nonnegative");
  if (!(range_hint >= 0.0) || !std::isfinite(range_hint)) {
    throw InputError("range hint must be a nonnegative finite number");
  }
  if (!lambda.empty()) {
    if (static_cast<Index>(lambda.size()) != num_clients) {
      throw InputError("lambda needs one weight per client");
    }
    double total = 0.0;
    for (double l : lambda) {
      if (!(l >= 0.0)) throw InputError("lambda entries must be nonnegative");
      total += l;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InputError("lambda must sum to one");
  }
}

std::vector<double> FedConfig::weights() const {
  if (!lambda.empty()) return lambda;
  return std::vector<double>(static_cast<std::size_t>(num_clients),
                             1.0 / static_cast<double>(num_clients));
}

double range_hint(const std::vector<Matrix>& parties) {
  double rms = 0.0;
  for (const Matrix& x : parties) {
    if (x.size() == 0) continue;
    rms = std::max(rms, std::sqrt(x.squaredNorm() / static_cast<double>(x.size())));
  }
  if (!(rms > 0.0)) return 1.0;
  return std::exp2(std::ceil(std::log2(rms)));
}

FedSession init_session(const std::vector<Matrix>& clients, const std::optional<Matrix>& validation,
                        FedConfig config) {
  if (clients.empty()) throw InputError("need at least one client dataset");
  config.num_clients = static_cast<Index>(clients.size());
  config.validate();
  const Index dim = clients.front().cols();
  for (std::size_t i = 0; i < clients.size(); ++i) {
    if (clients[i].rows() < 1) throw InputError("client " + std::to_string(i) + " has no data");
    if (clients[i].cols() != dim) {
      throw InputError("client " + std::to_string(i) + " has dimension " +
                       std::to_string(clients[i].cols()) + ", expected " + std::to_string(dim));
    }
  }
  const bool fixed = config.mode == Mode::kFixedValidation;
  if (fixed && !validation) throw InputError("fixed-validation mode needs a validation set");
  if (!fixed && validation) throw InputError("barycenter mode takes no validation set");
  if (validation && validation->cols() != dim) {
    throw InputError("validation set has dimension " + std::to_string(validation->cols()) +
                     ", expected " + std::to_string(dim));
  }

  FedSession session;
  session.config = config;
  if (config.range_hint > 0.0) {
    session.range_hint = config.range_hint;
  } else {
    std::vector<Matrix> parties = clients;
    if (validation) parties.push_back(*validation);
    session.range_hint = range_hint(parties);
  }

  // Domain-separated from plain mt19937_64(seed) streams so the public initial
  // draws never replay a generator a party may have used for its own data.
  std::seed_seq init_seq{static_cast<std::uint32_t>(config.seed),
                         static_cast<std::uint32_t>(config.seed >> 32), 0x696e6974U};
  std::mt19937_64 init_rng(init_seq);
  const auto n = clients.size();
  session.clients.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ClientState& c = session.clients[i];
    c.id = static_cast<int>(i);
    c.data = DiscreteMeasure::uniform(clients[i]);
    c.data.validate();
    c.gamma = DiscreteMeasure::uniform(
        normal_draws(config.support_size, dim, session.range_hint, init_rng));
    c.rng.seed(client_seed(config.seed, c.id));
  }
  ServerState& s = session.server;
  s.q = fixed ? DiscreteMeasure::uniform(*validation)
              : DiscreteMeasure::uniform(
                    normal_draws(config.support_size, dim, session.range_hint, init_rng));
  s.q.validate();
  s.eta_q.resize(n);
  s.w_q_eta.assign(n, 0.0);
  s.w_eta_gamma.assign(n, 0.0);
  s.client_sums.assign(n, 0.0);
  s.last_gammas.resize(n);
  return session;
}

FedSession init_session(const std::vector<AugmentedDataset>& clients,
                        const std::optional<AugmentedDataset>& validation, FedConfig config) {
  std::vector<Matrix> mats;
  mats.reserve(clients.size());
  for (const auto& c : clients) mats.push_back(c.stacked);
  std::optional<Matrix> val;
  if (validation) val = validation->stacked;
  return init_session(mats, val, std::move(config));
}

ClientRoundOutput client_round(ClientState& state, const FedConfig& config) {
  return with_client_context(state.id, [&] {
    if (state.gamma.dim() != state.data.dim()) throw InputError("gamma dimension mismatch");
    const OtSolution to_gamma = wasserstein(state.data, state.gamma, config.solver);
    state.eta_p = interpolate_with_plan(state.data, state.gamma, to_gamma.plan, config.t);
    state.w_data_eta = wasserstein(state.data, state.eta_p, config.solver).distance;
    state.w_eta_gamma = wasserstein(state.eta_p, state.gamma, config.solver).distance;
    ClientRoundOutput out;
    out.eta_p = state.eta_p;
    out.distance = ClientDistance{state.id, state.w_data_eta + state.w_eta_gamma};
    out.share = GammaShare{state.id, state.gamma};
    return out;
  });
}

ServerRoundOutput server_round(ServerState& server, int client, const DiscreteMeasure& gamma,
                               const FedConfig& config) {
  return with_client_context(client, [&] {
    if (gamma.dim() != server.q.dim()) throw InputError("gamma dimension mismatch");
    const auto i = static_cast<std::size_t>(client);
    const OtSolution to_gamma = wasserstein(server.q, gamma, config.solver);
    DiscreteMeasure eta = interpolate_with_plan(server.q, gamma, to_gamma.plan, config.t);
    server.w_q_eta[i] = wasserstein(server.q, eta, config.solver).distance;
    server.w_eta_gamma[i] = wasserstein(eta, gamma, config.solver).distance;
    server.eta_q[i] = eta;
    ServerRoundOutput out;
    out.share = EtaQShare{client, eta};
    out.eta_q = std::move(eta);
    return out;
  });
}

DiscreteMeasure gamma_update(const DiscreteMeasure& eta_p, const DiscreteMeasure& eta_q,
                             const SolverConfig& solver) {
  return geodesic_midpoint(eta_p, eta_q, solver);
}

DiscreteMeasure resample(const DiscreteMeasure& m, Index size, std::mt19937_64& rng) {
  if (size < 1) throw InputError("resample: size must be positive");
  const Index n = m.size();
  std::vector<Index> pick;
  if (n == size) {
    pick.resize(static_cast<std::size_t>(n));
    std::iota(pick.begin(), pick.end(), Index{0});
  } else if (n > size) {
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});
    for (Index i = 0; i < size; ++i) {
      std::uniform_int_distribution<Index> u(i, n - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(u(rng))]);
    }
    pick.assign(all.begin(), all.begin() + size);
    std::sort(pick.begin(), pick.end());
  } else {
    pick.resize(static_cast<std::size_t>(n));
    std::iota(pick.begin(), pick.end(), Index{0});
    std::uniform_int_distribution<Index> u(0, n - 1);
    while (static_cast<Index>(pick.size()) < size) pick.push_back(u(rng));
  }
  Matrix support(size, m.dim());
  for (Index i = 0; i < size; ++i) support.row(i) = m.support.row(pick[static_cast<std::size_t>(i)]);
  return DiscreteMeasure::uniform(std::move(support));
}

Matrix barycenter_update(const ServerState& server, const std::vector<DiscreteMeasure>& gammas,
                         const std::vector<double>& lambda, const SolverConfig& solver) {
  return barycenter_step(server.q, gammas, lambda, solver);
}

void run(FedSession& session) {
  const FedConfig& cfg = session.config;
  const auto n = session.clients.size();
  const bool barycenter = cfg.mode == Mode::kBarycenter;
  const std::vector<double> lambda = cfg.weights();
  int stable = 0;

  for (int k = 1;; ++k) {
    // Phase 1: clients interpolate toward their gamma and report.
    std::vector<ClientRoundOutput> client_out(n);
    for_each_client(n, cfg.parallel_clients,
                    [&](std::size_t i) { client_out[i] = client_round(session.clients[i], cfg); });
    for (std::size_t i = 0; i < n; ++i) {
      session.server.client_sums[i] = client_out[i].distance.distance;
      session.server.last_gammas[i] = client_out[i].share.gamma;
      session.transcript.push_back({k, "client", client_out[i].distance});
      session.transcript.push_back({k, "client", std::move(client_out[i].share)});
    }

    // Phase 2: the server moves Q with the gammas it just received, then
    // interpolates toward each of them.
    if (barycenter && k >= 2) {
      session.server.q.support =
          barycenter_update(session.server, session.server.last_gammas, lambda, cfg.solver);
    }
    session.q_history.push_back(session.server.q.support);
    std::vector<ServerRoundOutput> server_out(n);
    for_each_client(n, cfg.parallel_clients, [&](std::size_t i) {
      server_out[i] = server_round(session.server, static_cast<int>(i),
                                   session.server.last_gammas[i], cfg);
    });
    std::vector<double> estimate(n);
    for (std::size_t i = 0; i < n; ++i) {
      estimate[i] = session.server.client_sums[i] + session.server.w_eta_gamma[i] +
                    session.server.w_q_eta[i];
      session.transcript.push_back({k, "server", std::move(server_out[i].share)});
    }
    const double a = std::accumulate(estimate.begin(), estimate.end(), 0.0);
    if (!session.a_history.empty()) {
      const double prev = session.a_history.back();
      const double rel = std::abs(a - prev) / std::max(prev, 1e-300);
      stable = rel < cfg.stop_tolerance ? stable + 1 : 0;
    }
    session.a_history.push_back(a);
    session.estimates.push_back(std::move(estimate));
    session.rounds_run = k;
    spdlog::debug("round {}: A = {:.9g}", k, a);

    if (k == cfg.rounds + 1) break;
    if (cfg.stop_tolerance > 0.0 && stable >= kStopPatience) {
      session.early_stopped = true;
      spdlog::info("A stabilised; round {} closes the run", k);
      break;
    }

    // Phase 3: each client moves gamma to the midpoint of eta_P and eta_Q.
    for_each_client(n, cfg.parallel_clients, [&](std::size_t i) {
      ClientState& c = session.clients[i];
      with_client_context(c.id, [&] {
        c.gamma = resample(gamma_update(c.eta_p, server_out[i].eta_q, cfg.solver),
                           cfg.support_size, c.rng);
        return 0;
      });
    });
  }
}

}  // namespace otval::fed
