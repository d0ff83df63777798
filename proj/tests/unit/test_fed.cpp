#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "otval/error.hpp"
#include "otval/fed/audit.hpp"
#include "otval/fed/session.hpp"

using namespace otval;
using namespace otval::fed;
using otval::testing::from_rows;
using otval::testing::gaussian_points;

namespace {

FedConfig config_for(Index n, Index support, int rounds, Mode mode = Mode::kFixedValidation) {
  FedConfig cfg;
  cfg.num_clients = n;
  cfg.support_size = support;
  cfg.rounds = rounds;
  cfg.mode = mode;
  cfg.seed = 42;
  return cfg;
}

std::vector<Matrix> blobs(int n, Index m, Index d, std::uint64_t seed) {
  std::vector<Matrix> out;
  for (int i = 0; i < n; ++i) out.push_back(gaussian_points(m, d, seed + static_cast<std::uint64_t>(i)));
  return out;
}

void check_monotone(const FedSession& s) {
  const double slack = 1e-6 * s.a_history.front();
  for (std::size_t k = 1; k < s.a_history.size(); ++k) {
    CHECK(s.a_history[k] <= s.a_history[k - 1] + slack);
  }
}

}  // namespace

TEST_CASE("config validation") {
  FedConfig cfg = config_for(2, 10, 3);
  CHECK_NOTHROW(cfg.validate());
  cfg.t = 1.5;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = config_for(2, 10, 3);
  cfg.lambda = {0.2, 0.2};
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = config_for(2, 0, 3);
  CHECK_THROWS_AS(cfg.validate(), InputError);
  CHECK(parse_mode("fixed") == Mode::kFixedValidation);
  CHECK(parse_mode("barycenter") == Mode::kBarycenter);
  CHECK_THROWS_AS(parse_mode("other"), InputError);
}

TEST_CASE("session initialisation") {
  SUBCASE("one client in fixed mode keeps the validation set") {
    const Matrix val = gaussian_points(30, 2, 1);
    const FedSession s = init_session(blobs(1, 20, 2, 2), val, config_for(1, 10, 2));
    CHECK(s.clients.size() == 1);
    CHECK(s.server.q.support == val);
  }
  SUBCASE("same seed gives identical state") {
    const auto clients = blobs(3, 20, 2, 3);
    const FedSession a = init_session(clients, std::nullopt, config_for(3, 15, 2, Mode::kBarycenter));
    const FedSession b = init_session(clients, std::nullopt, config_for(3, 15, 2, Mode::kBarycenter));
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.clients[i].gamma.support == b.clients[i].gamma.support);
    CHECK(a.server.q.support == b.server.q.support);
  }
  SUBCASE("shapes") {
    const FedSession s = init_session(blobs(5, 40, 4, 4), gaussian_points(50, 4, 9), config_for(5, 100, 2));
    for (const ClientState& c : s.clients) {
      CHECK(c.gamma.size() == 100);
      CHECK(c.gamma.dim() == 4);
      CHECK((c.gamma.weights.array() == 0.01).all());
    }
  }
  SUBCASE("mode and validation must agree") {
    CHECK_THROWS_AS(init_session(blobs(2, 10, 2, 5), std::nullopt, config_for(2, 10, 2)), InputError);
    CHECK_THROWS_AS(init_session(blobs(2, 10, 2, 5), gaussian_points(5, 2, 1),
                                 config_for(2, 10, 2, Mode::kBarycenter)),
                    InputError);
    CHECK_THROWS_AS(init_session(blobs(2, 10, 2, 5), gaussian_points(5, 3, 1), config_for(2, 10, 2)),
                    InputError);
  }
}

TEST_CASE("client round") {
  FedConfig cfg = config_for(1, 1, 1);
  ClientState c;
  SUBCASE("gamma equal to the data") {
    c.data = DiscreteMeasure::uniform(gaussian_points(25, 2, 6));
    c.gamma = c.data;
    const ClientRoundOutput out = client_round(c, cfg);
    CHECK(out.distance.distance <= 1e-6);
    CHECK((out.eta_p.support - c.data.support).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("Dirac pair") {
    c.data = from_rows({{0.0}});
    c.gamma = from_rows({{2.0}});
    const ClientRoundOutput out = client_round(c, cfg);
    CHECK(out.eta_p.support(0, 0) == 1.0);
    CHECK(out.distance.distance == doctest::Approx(2.0));
  }
  SUBCASE("random 2-D client against a direct solve") {
    c.data = DiscreteMeasure::uniform(gaussian_points(40, 2, 7));
    c.gamma = DiscreteMeasure::uniform(gaussian_points(40, 2, 8, 1.0, 1.5));
    const ClientRoundOutput out = client_round(c, cfg);
    const double direct = wasserstein(c.data, c.gamma).distance;
    CHECK(std::abs(out.distance.distance - direct) <= 1e-4 * direct);
  }
}

TEST_CASE("server round") {
  FedConfig cfg = config_for(1, 1, 1);
  ServerState server;
  server.eta_q.resize(1);
  server.w_q_eta.resize(1);
  server.w_eta_gamma.resize(1);
  SUBCASE("gamma equal to Q") {
    server.q = DiscreteMeasure::uniform(gaussian_points(20, 2, 9));
    const ServerRoundOutput out = server_round(server, 0, server.q, cfg);
    CHECK(server.w_q_eta[0] + server.w_eta_gamma[0] <= 1e-6);
    CHECK((out.eta_q.support - server.q.support).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("Dirac pair") {
    server.q = from_rows({{0.0}});
    const ServerRoundOutput out = server_round(server, 0, from_rows({{4.0}}), cfg);
    CHECK(out.eta_q.support(0, 0) == 2.0);
  }
  SUBCASE("random fixture against a direct solve") {
    server.q = DiscreteMeasure::uniform(gaussian_points(30, 2, 10));
    const auto gamma = DiscreteMeasure::uniform(gaussian_points(30, 2, 11, 2.0));
    server_round(server, 0, gamma, cfg);
    const double direct = wasserstein(server.q, gamma).distance;
    CHECK(std::abs(server.w_q_eta[0] + server.w_eta_gamma[0] - direct) <= 1e-4 * direct);
  }
}

TEST_CASE("gamma update") {
  const auto mu = DiscreteMeasure::uniform(gaussian_points(12, 2, 12));
  const DiscreteMeasure same = gamma_update(mu, mu);
  CHECK(wasserstein(same, mu).distance <= 1e-9);

  const DiscreteMeasure mid = gamma_update(from_rows({{0.0}}), from_rows({{4.0}}));
  CHECK(mid.support(0, 0) == 2.0);

  const auto p = DiscreteMeasure::uniform(gaussian_points(35, 2, 13));
  const auto q = DiscreteMeasure::uniform(gaussian_points(35, 2, 14, 1.0, 2.0));
  const DiscreteMeasure g = gamma_update(p, q);
  const double objective = wasserstein(p, g).distance + wasserstein(g, q).distance;
  CHECK(std::abs(objective - wasserstein(p, q).distance) <= 1e-4 * wasserstein(p, q).distance);
}

TEST_CASE("resampling keeps S atoms") {
  std::mt19937_64 rng(3);
  const auto m = DiscreteMeasure::uniform(gaussian_points(10, 2, 15));
  CHECK(resample(m, 10, rng).support == m.support);
  CHECK(resample(m, 4, rng).size() == 4);
  const DiscreteMeasure up = resample(m, 25, rng);
  CHECK(up.size() == 25);
  CHECK(up.weights.sum() == doctest::Approx(1.0));
}

TEST_CASE("barycenter update") {
  ServerState server;
  server.q = DiscreteMeasure::uniform(gaussian_points(8, 2, 16));
  Matrix same = barycenter_update(server, {server.q, server.q}, {0.5, 0.5}, {});
  CHECK((same - server.q.support).cwiseAbs().maxCoeff() <= 1e-12);
  server.q = from_rows({{7.0}});
  same = barycenter_update(server, {from_rows({{0.0}}), from_rows({{2.0}})}, {0.5, 0.5}, {});
  CHECK(same(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("full runs: monitor, bounds, message law, determinism") {
  const auto clients = blobs(3, 30, 2, 20);
  const Matrix val = gaussian_points(30, 2, 30, 1.0, 0.5);
  FedConfig cfg = config_for(3, 30, 6);
  cfg.stop_tolerance = 0.0;
  FedSession s = init_session(clients, val, cfg);
  run(s);
  CHECK(s.rounds_run == 7);
  CHECK(s.a_history.size() == 7);
  check_monotone(s);
  for (std::size_t i = 0; i < 3; ++i) {
    const double direct = wasserstein(DiscreteMeasure::uniform(clients[i]), DiscreteMeasure::uniform(val)).distance;
    for (const auto& est : s.estimates) CHECK(est[i] >= direct - 1e-6);
  }
  const AuditReport audit = audit_transcript(s.transcript, clients);
  CHECK(audit.passed());
  for (const auto& [round, kinds] : audit.counts) {
    CHECK(kinds.at("ClientDistance") == 3);
    CHECK(kinds.at("GammaShare") == 3);
    CHECK(kinds.at("EtaQShare") == 3);
  }
  CHECK(s.transcript.size() == 3u * 3u * 7u);

  FedSession again = init_session(clients, val, cfg);
  run(again);
  CHECK(again.a_history == s.a_history);
  std::ostringstream t1, t2;
  write_jsonl(s.transcript, t1);
  write_jsonl(again.transcript, t2);
  CHECK(t1.str() == t2.str());

  cfg.parallel_clients = true;
  FedSession threaded = init_session(clients, val, cfg);
  run(threaded);
  CHECK(threaded.a_history == s.a_history);
}

TEST_CASE("one client equal to the validation set") {
  const Matrix x = gaussian_points(40, 2, 40);
  FedConfig cfg = config_for(1, 40, 20);
  FedSession s = init_session({x}, x, cfg);
  run(s);
  check_monotone(s);
  CHECK(s.final_estimates()[0] <= 1e-3 * s.range_hint);
}

TEST_CASE("barycenter mode runs and stays monotone") {
  FedConfig cfg = config_for(3, 25, 8, Mode::kBarycenter);
  cfg.stop_tolerance = 0.0;
  FedSession s = init_session(blobs(3, 25, 2, 50), std::nullopt, cfg);
  run(s);
  check_monotone(s);
  CHECK(s.q_history.size() == s.a_history.size());
  CHECK(s.q_history.front() != s.q_history.back());
}

TEST_CASE("early stop") {
  FedConfig cfg = config_for(2, 20, 50);
  cfg.stop_tolerance = 1e-3;
  FedSession s = init_session(blobs(2, 20, 2, 60), gaussian_points(20, 2, 61, 1.0, 2.0), cfg);
  run(s);
  CHECK(s.early_stopped);
  CHECK(s.rounds_run < 51);
}

TEST_CASE("transcript serialisation and audit") {
  const auto clients = blobs(2, 15, 2, 70);
  FedConfig cfg = config_for(2, 15, 2);
  FedSession s = init_session(clients, gaussian_points(15, 2, 80), cfg);
  run(s);
  std::stringstream io;
  write_jsonl(s.transcript, io);
  const std::vector<Message> back = read_jsonl(io);
  REQUIRE(back.size() == s.transcript.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(digest(back[i]) == digest(s.transcript[i]));
    CHECK(back[i].kind() == s.transcript[i].kind());
  }

  // Plant a raw row inside a shared gamma.
  std::vector<Message> tampered = s.transcript;
  for (Message& m : tampered) {
    if (auto* share = std::get_if<GammaShare>(&m.payload); share && share->client == 1) {
      share->gamma.support.row(3) = clients[1].row(7);
      break;
    }
  }
  const AuditReport bad = audit_transcript(tampered, clients);
  CHECK_FALSE(bad.passed());
  REQUIRE(bad.matches.size() == 1);
  CHECK(bad.matches[0].matrix_index == 1);
  CHECK(bad.matches[0].matrix_row == 7);
  CHECK_THROWS_AS(bad.ensure_passed(), AuditError);
}
