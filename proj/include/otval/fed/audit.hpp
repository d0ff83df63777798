#pragma once

#include <map>
#include <string>
#include <vector>

#include "otval/fed/message.hpp"
#include "otval/types.hpp"

namespace otval::fed {

struct AuditMatch {
  std::size_t message_index = 0;
  Index payload_row = 0;
  std::size_t matrix_index = 0;
  Index matrix_row = 0;
};

struct AuditReport {
  std::size_t messages = 0;
  std::size_t rows_scanned = 0;
  std::vector<AuditMatch> matches;
  /// counts[round][kind]
  std::map<int, std::map<std::string, std::size_t>> counts;

  bool passed() const { return matches.empty(); }
  /// Throws AuditError naming the offending message indices.
  void ensure_passed() const;
};

/// Scans every measure payload for rows equal to a row of any private matrix.
/// A matrix narrower than the payload is compared against the payload's
/// leading columns (raw features inside stacked vectors).
AuditReport audit_transcript(const std::vector<Message>& transcript,
                             const std::vector<Matrix>& private_matrices);

}  // namespace otval::fed
