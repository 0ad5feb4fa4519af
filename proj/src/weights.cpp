#include "sovai/weights.hpp"

#include "sovai/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace sovai {

namespace {

constexpr double kReciprocityTolerance = 1e-9;
constexpr double kPowerTolerance = 1e-12;
constexpr int kPowerMaxIterations = 10000;
constexpr double kAcceptableCr = 0.1;

std::string cell(std::size_t i, std::size_t j) {
  return "matrix[" + std::to_string(i) + "][" + std::to_string(j) + "]";
}

void normalizeSum(std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) {
    sum += x;
  }
  for (double& x : v) {
    x /= sum;
  }
}

}  // namespace

PairwiseMatrix::PairwiseMatrix(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
  const std::size_t n = rows_.size();
  if (n == 0) {
    throw DomainError("pairwise matrix must not be empty");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (rows_[i].size() != n) {
      throw DomainError("pairwise matrix must be square");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = rows_[i][j];
      if (!std::isfinite(v) || v <= 0.0) {
        throw DomainError(cell(i, j) + " must be finite and > 0");
      }
      if (i == j && std::abs(v - 1.0) > kReciprocityTolerance) {
        throw DomainError(cell(i, j) + " must be 1 on the diagonal");
      }
      if (j > i && std::abs(rows_[j][i] * v - 1.0) > kReciprocityTolerance) {
        throw DomainError(cell(j, i) + " must equal 1 / " + cell(i, j));
      }
    }
  }
}

PairwiseMatrix PairwiseMatrix::fromWeights(const std::vector<double>& weights) {
  std::vector<std::vector<double>> rows(weights.size(), std::vector<double>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (std::size_t j = 0; j < weights.size(); ++j) {
      rows[i][j] = i == j ? 1.0 : weights[i] / weights[j];
    }
  }
  return PairwiseMatrix(std::move(rows));
}

PillarMap<double> WeightResult::pillarWeights() const {
  if (weights.size() != kPillarCount) {
    throw DomainError("pillar weights need a 4x4 comparison matrix");
  }
  PillarMap<double> out;
  for (PillarId id : kAllPillars) {
    out[id] = weights[index(id)];
  }
  return out;
}

double randomIndex(std::size_t n) {
  static constexpr std::array<double, 11> kTable = {0.0,  0.0,  0.0,  0.58, 0.90, 1.12,
                                                    1.24, 1.32, 1.41, 1.45, 1.49};
  if (n < kTable.size()) {
    return kTable[n];
  }
  return kTable.back();
}

WeightResult ahpWeights(const PairwiseMatrix& matrix) {
  const std::size_t n = matrix.size();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);

  WeightResult result;
  bool converged = false;
  for (int it = 1; it <= kPowerMaxIterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        acc += matrix(i, j) * w[j];
      }
      next[i] = acc;
    }
    normalizeSum(next);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      change += std::abs(next[i] - w[i]);
    }
    w.swap(next);
    result.iterations = it;
    if (change <= kPowerTolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw DomainError("AHP power iteration did not converge within " +
                      std::to_string(kPowerMaxIterations) + " iterations");
  }

  // Rayleigh quotient w'Aw / w'w.
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row += matrix(i, j) * w[j];
    }
    num += w[i] * row;
    den += w[i] * w[i];
  }
  result.principalEigenvalue = num / den;
  result.weights = std::move(w);

  const double ri = randomIndex(n);
  if (n <= 2 || ri == 0.0) {
    result.consistencyRatio = 0.0;
  } else {
    const double ci = (result.principalEigenvalue - static_cast<double>(n)) /
                      static_cast<double>(n - 1);
    result.consistencyRatio = std::max(0.0, ci / ri);
  }
  result.consistent = result.consistencyRatio <= kAcceptableCr;
  return result;
}

}  // namespace sovai
