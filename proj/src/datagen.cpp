#include "otval/datagen.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "otval/error.hpp"

namespace otval {

Matrix class_means(int classes, Index dim, double separation, std::uint64_t seed) {
  if (classes < 1 || dim < 1) throw InputError("class_means: need classes >= 1 and dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix means(classes, dim);
  for (Index y = 0; y < classes; ++y)
    for (Index k = 0; k < dim; ++k) means(y, k) = separation * nd(rng);
  return means;
}

LabeledDataset gaussian_blobs(int n_clusters, Index points_per, const Matrix& means,
                              const Matrix& cov, std::uint64_t seed) {
  if (n_clusters < 1 || points_per < 1) throw InputError("gaussian_blobs: empty request");
  if (means.rows() != n_clusters) throw InputError("gaussian_blobs: one mean per cluster");
  const Index d = means.cols();
  if (cov.rows() != d || cov.cols() != d) throw InputError("gaussian_blobs: covariance shape");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + cov.cwiseAbs().maxCoeff())) {
    throw InputError("gaussian_blobs: covariance is not symmetric");
  }
  for (Index a = 0; a < n_clusters; ++a)
    for (Index b = a + 1; b < n_clusters; ++b)
      if (means.row(a) == means.row(b)) throw InputError("gaussian_blobs: means must be distinct");

  // LDLT handles singular PSD matrices; reject clearly negative pivots.
  const Eigen::MatrixXd c = cov;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(c);
  const double tol = 1e-12 * (1.0 + cov.cwiseAbs().maxCoeff());
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() < -tol).any()) {
    throw InputError("gaussian_blobs: covariance is not positive semidefinite");
  }
  const Vector root_d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd l = ldlt.matrixL();
  const Eigen::MatrixXd factor = ldlt.transpositionsP().transpose() * l * root_d.asDiagonal();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  LabeledDataset out;
  out.num_classes = n_clusters;
  out.features.resize(n_clusters * points_per, d);
  out.labels.resize(static_cast<std::size_t>(n_clusters * points_per));
  Vector z(d);
  for (Index y = 0; y < n_clusters; ++y) {
    for (Index j = 0; j < points_per; ++j) {
      const Index row = y * points_per + j;
      for (Index k = 0; k < d; ++k) z[k] = nd(rng);
      out.features.row(row) = means.row(y) + (factor * z).transpose();
      out.labels[static_cast<std::size_t>(row)] = static_cast<int>(y);
    }
  }
  return out;
}

Index noise_count(double fraction, Index m) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InputError("noise fraction must lie in [0, 1]");
  // The slack absorbs products like 0.15 * 1000 = 150.00000000000003.
  const auto count = static_cast<Index>(std::ceil(fraction * static_cast<double>(m) - 1e-9));
  return std::clamp<Index>(count, 0, m);
}

NoisedDataset inject_noise(const LabeledDataset& data, double fraction, NoiseKind kind,
                           double sigma, std::uint64_t seed) {
  data.validate();
  const Index m = data.size();
  const Index count = noise_count(fraction, m);
  if (kind == NoiseKind::kLabel && count > 0 && data.num_classes < 2) {
    throw InputError("label noise needs at least two classes");
  }
  if (kind == NoiseKind::kFeature && !(sigma > 0.0)) {
    throw InputError("feature noise needs sigma > 0");
  }
  std::mt19937_64 rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> u(i, m - 1);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(u(rng))]);
  }
  NoisedDataset out;
  out.data = data;
  out.noisy.assign(order.begin(), order.begin() + count);
  std::sort(out.noisy.begin(), out.noisy.end());

  std::normal_distribution<double> nd(0.0, sigma > 0.0 ? sigma : 1.0);
  std::uniform_int_distribution<int> other(1, std::max(1, data.num_classes - 1));
  for (Index idx : out.noisy) {
    if (kind == NoiseKind::kFeature) {
      for (Index k = 0; k < data.dim(); ++k) out.data.features(idx, k) += nd(rng);
    } else {
      auto& y = out.data.labels[static_cast<std::size_t>(idx)];
      y = (y + other(rng)) % data.num_classes;
    }
  }
  return out;
}

CaseSpec CaseSpec::standard(int case_id, int clients, Index per_client, int classes,
                            std::uint64_t seed) {
  if (case_id < 1 || case_id > 5) throw InputError("case must be 1..5");
  if (clients < 1 || per_client < 1 || classes < 1) {
    throw InputError("case needs clients, per-client size and classes >= 1");
  }
  CaseSpec spec;
  spec.case_id = case_id;
  spec.seed = seed;
  const auto n = static_cast<std::size_t>(clients);
  const std::vector<double> even(static_cast<std::size_t>(classes), 1.0 / classes);
  spec.sizes.assign(n, per_client);
  spec.proportions.assign(n, even);
  spec.noise_ratios.assign(n, 0.0);

  if (case_id == 2) {
    // Client c concentrates 80% on two classes and spreads 20% over the rest.
    if (classes < 3) throw InputError("case 2 needs at least three classes");
    for (std::size_t c = 0; c < n; ++c) {
      auto& p = spec.proportions[c];
      const int first = static_cast<int>((2 * c) % static_cast<std::size_t>(classes));
      const int second = (first + 1) % classes;
      std::fill(p.begin(), p.end(), 0.2 / (classes - 2));
      p[static_cast<std::size_t>(first)] = 0.4;
      p[static_cast<std::size_t>(second)] = 0.4;
    }
  } else if (case_id == 3) {
    const double total = static_cast<double>(clients) * static_cast<double>(per_client);
    double denom = 0.0;
    for (int i = 0; i < clients; ++i) denom += 2.0 + i;
    for (std::size_t c = 0; c < n; ++c) {
      spec.sizes[c] = std::max<Index>(1, std::llround(total * (2.0 + static_cast<double>(c)) / denom));
    }
  } else if (case_id == 4 || case_id == 5) {
    for (std::size_t c = 0; c < n; ++c) spec.noise_ratios[c] = std::min(1.0, 0.05 * static_cast<double>(c));
  }
  return spec;
}

void CaseSpec::validate(int classes) const {
  if (case_id < 1 || case_id > 5) throw InputError("case must be 1..5");
  const std::size_t n = sizes.size();
  if (n == 0) throw InputError("case has no clients");
  if (proportions.size() != n || noise_ratios.size() != n) {
    throw InputError("case spec vectors must have one entry per client");
  }
  for (std::size_t c = 0; c < n; ++c) {
    if (sizes[c] < 1) throw InputError("client sizes must be positive");
    if (static_cast<int>(proportions[c].size()) != classes) {
      throw InputError("class proportions must cover every class");
    }
    double total = 0.0;
    for (double p : proportions[c]) {
      if (!(p >= 0.0)) throw InputError("class proportions must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InputError("class proportions must sum to one");
    if (!(noise_ratios[c] >= 0.0 && noise_ratios[c] <= 1.0)) {
      throw InputError("noise ratios must lie in [0, 1]");
    }
  }
  if (!(sigma > 0.0)) throw InputError("sigma must be positive");
}

std::vector<ClientData> make_case(const CaseSpec& spec, const LabeledDataset& base) {
  base.validate();
  spec.validate(base.num_classes);
  const auto classes = static_cast<std::size_t>(base.num_classes);

  // Shuffled row pools per class; clients draw from the front.
  std::mt19937_64 rng(spec.seed);
  std::vector<std::vector<Index>> pool(classes);
  for (Index i = 0; i < base.size(); ++i) pool[static_cast<std::size_t>(base.labels[static_cast<std::size_t>(i)])].push_back(i);
  for (auto& p : pool) std::shuffle(p.begin(), p.end(), rng);
  std::vector<std::size_t> next(classes, 0);

  std::vector<ClientData> out;
  for (std::size_t c = 0; c < spec.sizes.size(); ++c) {
    const Index m = spec.sizes[c];
    // Largest-remainder rounding so counts sum to m exactly.
    std::vector<Index> counts(classes);
    std::vector<std::pair<double, std::size_t>> rem;
    Index assigned = 0;
    for (std::size_t y = 0; y < classes; ++y) {
      const double exact = spec.proportions[c][y] * static_cast<double>(m);
      counts[y] = static_cast<Index>(std::floor(exact));
      assigned += counts[y];
      rem.emplace_back(exact - std::floor(exact), y);
    }
    std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < m; ++r, ++assigned) ++counts[rem[r % classes].second];

    ClientData cd;
    cd.data.num_classes = base.num_classes;
    cd.data.features.resize(m, base.dim());
    cd.data.labels.reserve(static_cast<std::size_t>(m));
    Index row = 0;
    for (std::size_t y = 0; y < classes; ++y) {
      if (next[y] + static_cast<std::size_t>(counts[y]) > pool[y].size()) {
        throw InputError("base pool has too few points of class " + std::to_string(y) +
                         " for client " + std::to_string(c));
      }
      for (Index k = 0; k < counts[y]; ++k) {
        cd.data.features.row(row++) = base.features.row(pool[y][next[y]++]);
        cd.data.labels.push_back(static_cast<int>(y));
      }
    }
    const double ratio = spec.noise_ratios[c];
    if ((spec.case_id == 4 || spec.case_id == 5) && ratio > 0.0) {
      const NoiseKind kind = spec.case_id == 4 ? NoiseKind::kLabel : NoiseKind::kFeature;
      NoisedDataset noised = inject_noise(cd.data, ratio, kind, spec.sigma, spec.seed + 1000 + c);
      cd.data = std::move(noised.data);
      cd.noisy = std::move(noised.noisy);
    }
    out.push_back(std::move(cd));
  }
  return out;
}

}  // namespace otval
