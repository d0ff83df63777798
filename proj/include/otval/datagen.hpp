#pragma once

#include <cstdint>
#include <vector>

#include "otval/augment.hpp"

namespace otval {

/// n_clusters * points_per labelled points; cluster y ~ N(means.row(y), cov).
/// Throws InputError when cov is not symmetric PSD or means are not distinct.
LabeledDataset gaussian_blobs(int n_clusters, Index points_per, const Matrix& means,
                              const Matrix& cov, std::uint64_t seed);

/// Class centres drawn as separation * N(0, I), seeded.
Matrix class_means(int classes, Index dim, double separation, std::uint64_t seed);

enum class NoiseKind { kFeature, kLabel };

struct NoisedDataset {
  LabeledDataset data;
  std::vector<Index> noisy;  ///< sorted ground-truth indices
};

/// Number of rows touched by a noise fraction: ceil(fraction * m).
Index noise_count(double fraction, Index m);

/// Feature noise adds N(0, sigma^2 I) to ceil(fraction * m) random rows; label
/// noise moves each chosen label uniformly to a different class.
NoisedDataset inject_noise(const LabeledDataset& data, double fraction, NoiseKind kind,
                           double sigma, std::uint64_t seed);

struct CaseSpec {
  int case_id = 1;
  std::vector<Index> sizes;                      ///< per client
  std::vector<std::vector<double>> proportions;  ///< per client, per class
  std::vector<double> noise_ratios;              ///< per client (cases 4 and 5)
  double sigma = 1.0;                            ///< feature noise scale (case 5)
  std::uint64_t seed = 0;

  /// The five standard cases for `clients` clients over `classes` classes.
  /// `per_client` is the size of every client in cases 1, 2, 4 and 5; case 3
  /// spreads clients * per_client points with ratios proportional to 2 + i.
  static CaseSpec standard(int case_id, int clients, Index per_client, int classes,
                           std::uint64_t seed);
  void validate(int classes) const;
};

struct ClientData {
  LabeledDataset data;
  std::vector<Index> noisy;
};

/// Draws each client's rows from `base` without replacement, class by class,
/// then applies the case's noise. Throws InputError when `base` runs short.
std::vector<ClientData> make_case(const CaseSpec& spec, const LabeledDataset& base);

}  // namespace otval
