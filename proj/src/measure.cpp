#include "otval/measure.hpp"

#include <cmath>
#include <string>

#include "otval/error.hpp"

namespace otval {

DiscreteMeasure DiscreteMeasure::uniform(Matrix support) {
  const Index n = support.rows();
  if (n < 1) throw InputError("uniform measure needs at least one atom");
  DiscreteMeasure m;
  m.weights = Vector::Constant(n, 1.0 / static_cast<double>(n));
  m.support = std::move(support);
  return m;
}

void validate_weights(const Vector& w, Index n, const char* what) {
  if (w.size() != n) {
    throw InputError(std::string(what) + ": expected " + std::to_string(n) + " weights, got " +
                     std::to_string(w.size()));
  }
  double sum = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0) {
      throw InputError(std::string(what) + ": weight " + std::to_string(i) +
                       " is negative or not finite");
    }
    sum += w[i];
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    throw InputError(std::string(what) + ": weights sum to " + std::to_string(sum) +
                     ", expected 1");
  }
}

void DiscreteMeasure::validate() const {
  if (support.rows() < 1 || support.cols() < 1) {
    throw InputError("measure must have at least one atom and one coordinate");
  }
  if (!support.allFinite()) throw InputError("measure support has non-finite coordinates");
  validate_weights(weights, support.rows(), "measure");
}

}  // namespace otval
