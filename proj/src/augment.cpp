#include "otval/augment.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "otval/error.hpp"

namespace otval {

void LabeledDataset::validate() const {
  if (features.rows() < 1 || features.cols() < 1) throw InputError("dataset is empty");
  if (static_cast<Index>(labels.size()) != features.rows()) {
    throw InputError("dataset has " + std::to_string(features.rows()) + " rows but " +
                     std::to_string(labels.size()) + " labels");
  }
  if (num_classes < 1) throw InputError("dataset needs at least one class");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw InputError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(num_classes) + ")");
    }
  }
  if (!features.allFinite()) throw InputError("dataset has non-finite features");
}

Index ClassStats::stacked_dim() const {
  return diagonal ? 3 * feature_dim : 2 * feature_dim + feature_dim * feature_dim;
}

Matrix psd_sqrt(const Matrix& s) {
  const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw SolverError("eigendecomposition failed");
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Matrix out = v * root.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

ClassStats class_stats(const LabeledDataset& data, double regularization, CovarianceMode mode) {
  data.validate();
  if (!(regularization >= 0.0)) throw InputError("regularization must be nonnegative");
  const Index d = data.dim();
  ClassStats stats;
  stats.feature_dim = d;
  stats.diagonal = mode == CovarianceMode::kDiagonal ||
                   (mode == CovarianceMode::kAuto && d > kDiagonalThreshold);
  stats.classes.resize(static_cast<std::size_t>(data.num_classes));

  std::vector<Index> count(stats.classes.size(), 0);
  for (auto& c : stats.classes) {
    c.mean = Vector::Zero(d);
    c.covariance = Matrix::Zero(d, d);
  }
  for (Index i = 0; i < data.size(); ++i) {
    const auto y = static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)]);
    stats.classes[y].mean += data.features.row(i).transpose();
    ++count[y];
  }
  for (std::size_t y = 0; y < count.size(); ++y) {
    if (count[y] > 0) stats.classes[y].mean /= static_cast<double>(count[y]);
  }
  for (Index i = 0; i < data.size(); ++i) {
    const auto y = static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)]);
    const Vector diff = data.features.row(i).transpose() - stats.classes[y].mean;
    if (stats.diagonal) {
      stats.classes[y].covariance.diagonal() += diff.cwiseAbs2();
    } else {
      stats.classes[y].covariance.noalias() += diff * diff.transpose();
    }
  }
  for (std::size_t y = 0; y < count.size(); ++y) {
    ClassEntry& c = stats.classes[y];
    c.count = count[y];
    c.empty = count[y] == 0;
    if (!c.empty) c.covariance /= static_cast<double>(count[y]);
    const double trace = c.covariance.trace();
    const double scale = trace > 0.0 ? trace / static_cast<double>(d) : 1.0;
    c.covariance.diagonal().array() += regularization * scale;
    if (stats.diagonal) {
      c.sqrt_cov = Matrix::Zero(d, d);
      c.sqrt_cov.diagonal() = c.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    } else {
      c.sqrt_cov = psd_sqrt(c.covariance);
    }
  }
  return stats;
}

AugmentedDataset stack(const LabeledDataset& data, const ClassStats& stats) {
  data.validate();
  const Index d = data.dim();
  if (d != stats.feature_dim) throw InputError("class stats were built for another dimension");
  AugmentedDataset out;
  out.feature_dim = d;
  out.labels = data.labels;
  out.stacked.resize(data.size(), stats.stacked_dim());
  for (Index i = 0; i < data.size(); ++i) {
    const int y = data.labels[static_cast<std::size_t>(i)];
    if (y >= static_cast<int>(stats.classes.size())) {
      throw InputError("no class statistics for label " + std::to_string(y));
    }
    const ClassEntry& c = stats.classes[static_cast<std::size_t>(y)];
    auto row = out.stacked.row(i);
    row.segment(0, d) = data.features.row(i);
    row.segment(d, d) = c.mean.transpose();
    if (stats.diagonal) {
      row.segment(2 * d, d) = c.sqrt_cov.diagonal().transpose();
    } else {
      // vec() stacks columns; the root is symmetric so rows would do as well.
      for (Index col = 0; col < d; ++col) row.segment(2 * d + col * d, d) = c.sqrt_cov.col(col).transpose();
    }
  }
  return out;
}

AugmentedDataset augment(const LabeledDataset& data, double regularization,
                         CovarianceMode mode) {
  return stack(data, class_stats(data, regularization, mode));
}

DiscreteMeasure AugmentedDataset::measure() const { return DiscreteMeasure::uniform(stacked); }

double gaussian_w2_squared(const ClassEntry& a, const ClassEntry& b) {
  if (a.mean.size() != b.mean.size()) throw InputError("gaussian_w2_squared: dimension mismatch");
  return (a.mean - b.mean).squaredNorm() + (a.sqrt_cov - b.sqrt_cov).squaredNorm();
}

}  // namespace otval
