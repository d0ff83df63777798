#pragma once

#include <string_view>
#include <vector>

#include "otval/fed/session.hpp"
#include "otval/measure.hpp"
#include "otval/ot/wasserstein.hpp"

namespace otval {

struct ClientScore {
  int client = 0;
  double distance = 0.0;
  double share = 0.0;
  bool flagged = false;  ///< relevance outlier (relevance_report only)
};

struct DatumValuation {
  Index index = 0;
  double gradient = 0.0;
  bool flagged = false;  ///< gradient > 0
};

/// s_i = (1/W_i) / sum_j (1/W_j). Zero distances take all the mass, split
/// evenly among them. Throws InputError on empty or negative input.
std::vector<double> contribution_shares(const std::vector<double>& distances);

/// g_l = f_l - sum_{j != l} f_j / (m - 1). Throws InputError when m < 2.
Vector calibrated_gradients(const Vector& f);

/// Which coupling the per-datum gradients are read from.
enum class DetectionMode {
  kEtaQ,         ///< client data vs eta_Q (default)
  kGamma,        ///< client data vs gamma (experimental)
  kServerEtaQ,   ///< eta_P vs eta_Q, gradients w.r.t. eta_P atoms (experimental)
  kServerQ,      ///< eta_P vs Q, gradients w.r.t. eta_P atoms (experimental)
};

DetectionMode parse_detection_mode(std::string_view name);
std::string_view detection_mode_name(DetectionMode mode);

struct Detection {
  std::vector<DatumValuation> data;
  double distance = 0.0;
};

/// Solves OT from `source` to `target` and flags atoms of `source` whose
/// calibrated gradient is positive.
Detection detect_noisy(const DiscreteMeasure& source, const DiscreteMeasure& target,
                       const SolverConfig& config = {});

/// Same, on the measures a finished session holds for `client`.
Detection detect_noisy(const fed::FedSession& session, int client, DetectionMode mode);

struct FiniteDifference {
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Central difference of the transport cost along a +- delta (e_l - a), the
/// direction of adding mass to atom l and renormalizing, per unit change of
/// a_l, next to the calibrated gradient. Throws InputError unless
/// 0 < delta < min weight.
FiniteDifference finite_difference_check(const DiscreteMeasure& source,
                                         const DiscreteMeasure& target, Index datum,
                                         double delta, const SolverConfig& config = {});

struct RelevanceReport {
  std::vector<ClientScore> clients;
  double median = 0.0;
  double mad = 0.0;
  double threshold = 0.0;
};

inline constexpr double kMadScale = 1.4826;
inline constexpr double kMadMultiplier = 3.0;

/// Scores from a list of distances: shares plus flags for distances above
/// median + 3 * 1.4826 * MAD.
RelevanceReport relevance_from_distances(const std::vector<double>& distances);

/// Uses each client's closing four-term estimate.
RelevanceReport relevance_report(const fed::FedSession& session);

/// Detection quality against a ground-truth index set.
struct DetectionMetrics {
  std::size_t flagged = 0;
  std::size_t truth = 0;
  std::size_t true_positives = 0;
  double precision = 0.0;  ///< NaN when nothing is flagged
  double recall = 0.0;     ///< NaN when the truth set is empty
  double f1 = 0.0;         ///< NaN when either is undefined
};

DetectionMetrics score_detection(const std::vector<DatumValuation>& data,
                                 const std::vector<Index>& truth);

}  // namespace otval
