#pragma once

#include "sovai/pillar.hpp"

#include <cstddef>
#include <vector>

namespace sovai {

/// Square pairwise-comparison matrix; entry(i, j) is the judged importance of
/// item i over item j. Reciprocity and positivity are checked at construction.
class PairwiseMatrix {
 public:
  explicit PairwiseMatrix(std::vector<std::vector<double>> rows);

  /// Matrix with entry(i, j) = w_i / w_j, which is perfectly consistent.
  static PairwiseMatrix fromWeights(const std::vector<double>& weights);

  std::size_t size() const { return rows_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return rows_[i][j]; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }

 private:
  std::vector<std::vector<double>> rows_;
};

struct WeightResult {
  std::vector<double> weights;     ///< principal eigenvector, sums to 1
  double principalEigenvalue = 0;  ///< lambda_max (Rayleigh quotient)
  double consistencyRatio = 0;     ///< CI / RI(n)
  bool consistent = true;          ///< CR <= 0.1
  int iterations = 0;

  /// Requires a 4x4 result; maps entries onto pillars in PillarId order.
  PillarMap<double> pillarWeights() const;
};

/// Saaty's random consistency index for an n x n matrix (0 for n <= 2).
double randomIndex(std::size_t n);

/// Eigenvector method. Throws DomainError if power iteration does not reach
/// 1e-12 within 10^4 iterations.
WeightResult ahpWeights(const PairwiseMatrix& matrix);

}  // namespace sovai
