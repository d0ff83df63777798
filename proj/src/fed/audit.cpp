#include "otval/fed/audit.hpp"

#include <cstring>
#include <string>
#include <unordered_map>

#include "otval/error.hpp"

namespace otval::fed {
namespace {

// Byte key of a row prefix; +0.0 and -0.0 are folded together.
std::string row_key(const double* row, Index width) {
  std::string key(static_cast<std::size_t>(width) * sizeof(double), '\0');
  for (Index k = 0; k < width; ++k) {
    const double v = row[k] == 0.0 ? 0.0 : row[k];
    std::memcpy(key.data() + k * sizeof(double), &v, sizeof(double));
  }
  return key;
}

}  // namespace

void AuditReport::ensure_passed() const {
  if (passed()) return;
  std::string list;
  for (std::size_t i = 0; i < matches.size() && i < 10; ++i) {
    if (i > 0) list += ", ";
    list += std::to_string(matches[i].message_index);
  }
  throw AuditError("transcript leaks private rows in " + std::to_string(matches.size()) +
                   " place(s); message indices: " + list);
}

AuditReport audit_transcript(const std::vector<Message>& transcript,
                             const std::vector<Matrix>& private_matrices) {
  using Origin = std::pair<std::size_t, Index>;
  std::unordered_map<Index, std::unordered_map<std::string, Origin>> index;
  for (std::size_t mi = 0; mi < private_matrices.size(); ++mi) {
    const Matrix& x = private_matrices[mi];
    auto& by_key = index[x.cols()];
    for (Index r = 0; r < x.rows(); ++r) by_key.emplace(row_key(x.data() + r * x.cols(), x.cols()), Origin{mi, r});
  }

  AuditReport report;
  report.messages = transcript.size();
  for (std::size_t idx = 0; idx < transcript.size(); ++idx) {
    const Message& msg = transcript[idx];
    ++report.counts[msg.round][std::string(msg.kind())];
    const DiscreteMeasure* m = msg.measure();
    if (m == nullptr) continue;
    const Index width = m->dim();
    for (Index r = 0; r < m->size(); ++r) {
      ++report.rows_scanned;
      const double* row = m->support.data() + r * width;
      for (const auto& [w, by_key] : index) {
        if (w > width) continue;
        const auto hit = by_key.find(row_key(row, w));
        if (hit != by_key.end()) {
          report.matches.push_back({idx, r, hit->second.first, hit->second.second});
        }
      }
    }
  }
  return report;
}

}  // namespace otval::fed
