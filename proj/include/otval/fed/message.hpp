#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "otval/measure.hpp"

namespace otval::fed {

/// Client -> server: the client's two-term estimate of W(X_i, gamma_i).
struct ClientDistance {
  int client = 0;
  double distance = 0.0;
};

/// Client -> server: the client's current gamma_i.
struct GammaShare {
  int client = 0;
  DiscreteMeasure gamma;
};

/// Server -> client i: eta_{Q_i}, the server-side interpolating measure.
struct EtaQShare {
  int client = 0;
  DiscreteMeasure eta_q;
};

/// Phase marker. The synchronous session keeps its barriers implicit, so these
/// are only produced by callers that drive rounds themselves.
struct RoundControl {
  int round = 0;
  std::string phase;
};

using Payload = std::variant<ClientDistance, GammaShare, EtaQShare, RoundControl>;

struct Message {
  int round = 0;
  std::string phase;  ///< "client", "server" or "control"
  Payload payload;

  std::string_view kind() const;
  int client() const;  ///< -1 for RoundControl
  /// Measure carried by the payload, or nullptr.
  const DiscreteMeasure* measure() const;
};

/// FNV-1a over the payload's bytes (kind tag, client id, numbers).
std::uint64_t digest(const Message& message);

/// One JSON object per line: round, phase, kind, client, digest, payload.
void write_jsonl(const std::vector<Message>& transcript, std::ostream& out);
std::vector<Message> read_jsonl(std::istream& in);

}  // namespace otval::fed
