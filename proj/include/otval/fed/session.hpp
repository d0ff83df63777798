#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "otval/augment.hpp"
#include "otval/fed/config.hpp"
#include "otval/fed/message.hpp"
#include "otval/measure.hpp"

namespace otval::fed {

struct ClientState {
  int id = 0;
  DiscreteMeasure data;  ///< private; never placed in a message
  DiscreteMeasure gamma;
  DiscreteMeasure eta_p;
  double w_data_eta = 0.0;   ///< W(X_i, eta_P)
  double w_eta_gamma = 0.0;  ///< W(eta_P, gamma_i)
  std::mt19937_64 rng;
};

struct ServerState {
  DiscreteMeasure q;  ///< validation set or current barycenter support
  std::vector<DiscreteMeasure> eta_q;
  std::vector<double> w_q_eta;      ///< W(Q, eta_Q_i)
  std::vector<double> w_eta_gamma;  ///< W(eta_Q_i, gamma_i)
  std::vector<double> client_sums;  ///< last ClientDistance per client
  std::vector<DiscreteMeasure> last_gammas;
};

struct FedSession {
  FedConfig config;
  std::vector<ClientState> clients;
  ServerState server;
  std::vector<Message> transcript;
  /// a_history[k] = A(k); the last entry is measured in the closing round.
  std::vector<double> a_history;
  /// estimates[k][i]: four-term estimate of W(X_i, Q) at A(k).
  std::vector<std::vector<double>> estimates;
  /// Q support at every evaluated round (barycenter mode tracks its motion).
  std::vector<Matrix> q_history;
  double range_hint = 0.0;
  int rounds_run = 0;  ///< protocol rounds executed, closing round included
  bool early_stopped = false;

  /// Four-term estimates from the closing round.
  const std::vector<double>& final_estimates() const { return estimates.back(); }
};

struct ClientRoundOutput {
  DiscreteMeasure eta_p;
  ClientDistance distance;
  GammaShare share;
};

struct ServerRoundOutput {
  DiscreteMeasure eta_q;
  EtaQShare share;
};

/// Builds the initial session. `validation` must be present exactly in fixed
/// mode; in barycenter mode Q(0) is drawn like the gammas.
FedSession init_session(const std::vector<Matrix>& clients, const std::optional<Matrix>& validation,
                        FedConfig config);
FedSession init_session(const std::vector<AugmentedDataset>& clients,
                        const std::optional<AugmentedDataset>& validation, FedConfig config);

/// Phase 1 for one client: eta_P = interpolate(X_i, gamma_i, t) and the two
/// distances around it.
ClientRoundOutput client_round(ClientState& state, const FedConfig& config);

/// Phase 2 for one client: eta_Q = interpolate(Q, gamma_i, t).
ServerRoundOutput server_round(ServerState& server, int client, const DiscreteMeasure& gamma,
                               const FedConfig& config);

/// Geodesic midpoint of eta_P and eta_Q (before resampling to S atoms).
DiscreteMeasure gamma_update(const DiscreteMeasure& eta_p, const DiscreteMeasure& eta_q,
                             const SolverConfig& solver = {});

/// Uniform measure on exactly `size` atoms of `m`: all of them when sizes
/// agree, a subsample without replacement when m is larger, and all atoms
/// plus draws with replacement when it is smaller.
DiscreteMeasure resample(const DiscreteMeasure& m, Index size, std::mt19937_64& rng);

/// Free-support step of Q toward the lambda-weighted barycenter of gammas.
Matrix barycenter_update(const ServerState& server, const std::vector<DiscreteMeasure>& gammas,
                         const std::vector<double>& lambda, const SolverConfig& solver);

/// Runs rounds until K updates (or early stop), then a closing evaluation
/// round. On failure the session keeps the partial history and the error is
/// rethrown.
void run(FedSession& session);

/// Maximum RMS coordinate across the matrices, rounded up to a power of two.
double range_hint(const std::vector<Matrix>& parties);

}  // namespace otval::fed
