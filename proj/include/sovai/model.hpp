#pragma once

// Planner's model: saturating pillar capacities, model autonomy with the
// data x compute complementarity, the weighted sovereignty index, openness
// benefit/exposure and welfare. Everything here is a pure function of
// immutable values; no solving happens in this header.

#include "sovai/errors.hpp"
#include "sovai/pillar.hpp"

namespace sovai {

struct PillarParams {
  double productivity = 1.0;  ///< a_i > 0, capacity per budget unit
  double weight = 0.25;       ///< w_i >= 0

  friend bool operator==(const PillarParams&, const PillarParams&) = default;
};

struct OpennessParams {
  double benefitScale = 1.0;      ///< g > 0
  double benefitCurvature = 1.0;  ///< k > 0
  double exposureSlope = 0.0;     ///< p >= 0
  double riskSensitivity = 0.0;   ///< lambda >= 0
  double sovereigntyWeight = 1.0; ///< alpha in [0, 1]

  /// Throws DomainError on the first violated bound.
  void validate() const;

  friend bool operator==(const OpennessParams&, const OpennessParams&) = default;
};

/// Normalizes non-negative raw scores to sum to one.
///
/// The result is snapped to a 2^-32 grid and the rounding residue is folded
/// into the largest weight, so the weights sum to exactly 1.0 and rescaling
/// every raw score by the same positive factor yields bit-identical output.
/// Deviation from the exact ratio raw_i / sum is below 5e-10.
PillarMap<double> normalizeWeights(const PillarMap<double>& raw);

/// All model parameters. Weights are normalized at construction; the raw
/// scores are retained for audit and serialization.
class EconomyModel {
 public:
  /// `pillars[i].weight` holds the raw (unnormalized) score.
  EconomyModel(const PillarMap<PillarParams>& pillars, double theta,
               const OpennessParams& openness, double budget);

  double productivity(PillarId id) const { return productivity_[id]; }
  double weight(PillarId id) const { return weights_[id]; }
  double rawWeight(PillarId id) const { return rawWeights_[id]; }
  const PillarMap<double>& productivities() const { return productivity_; }
  const PillarMap<double>& weights() const { return weights_; }
  const PillarMap<double>& rawWeights() const { return rawWeights_; }
  double theta() const { return theta_; }
  const OpennessParams& openness() const { return openness_; }
  double alpha() const { return openness_.sovereigntyWeight; }
  double budget() const { return budget_; }

  /// Raw pillar parameters, as passed to the constructor.
  PillarMap<PillarParams> rawPillars() const;

  EconomyModel withBudget(double budget) const;
  EconomyModel withTheta(double theta) const;
  EconomyModel withOpenness(const OpennessParams& openness) const;
  EconomyModel withPillar(PillarId id, const PillarParams& raw) const;
  EconomyModel withRawWeights(const PillarMap<double>& raw) const;

  friend bool operator==(const EconomyModel&, const EconomyModel&) = default;

 private:
  PillarMap<double> productivity_;
  PillarMap<double> rawWeights_;
  PillarMap<double> weights_;
  double theta_;
  OpennessParams openness_;
  double budget_;
};

/// Spending per pillar, in budget units.
struct Allocation {
  PillarMap<double> x{};

  double operator[](PillarId id) const { return x[id]; }
  double& operator[](PillarId id) { return x[id]; }
  double total() const;

  /// Throws DomainError unless every entry is finite and non-negative.
  void validate() const;

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

struct CapacityVector {
  double D = 0.0;
  double C = 0.0;
  double M = 0.0;
  double N = 0.0;
  bool mClipped = false;  ///< the min{1, .} bound in model autonomy is active

  double operator[](PillarId id) const;

  friend bool operator==(const CapacityVector&, const CapacityVector&) = default;
};

struct ModelAutonomy {
  double value = 0.0;
  bool clipped = false;
};

struct MarginalReturns {
  PillarMap<double> dS_dx{};
  bool mClipped = false;

  double operator[](PillarId id) const { return dS_dx[id]; }

  friend bool operator==(const MarginalReturns&, const MarginalReturns&) = default;
};

struct WelfareBreakdown {
  double S = 0.0;  ///< sovereignty index
  double G = 0.0;  ///< openness benefit
  double P = 0.0;  ///< exposure cost (before lambda)
  double W = 0.0;  ///< alpha*S + (1-alpha)*G - lambda*P

  friend bool operator==(const WelfareBreakdown&, const WelfareBreakdown&) = default;
};

/// 1 - exp(-a x).
double capacity(double a, double x);

/// min{1, 1 - exp(-aM xM) + theta D C}. `clipped` is set whenever the
/// unclipped value reaches 1.
ModelAutonomy modelAutonomy(double xM, double D, double C, double aM, double theta);

CapacityVector capacities(const EconomyModel& model, const Allocation& alloc);

double sovereigntyIndex(const EconomyModel& model, const CapacityVector& caps);

/// g ln(1 + k O).
double opennessBenefit(double g, double k, double O);

/// p O.
double exposureCost(double p, double O);

/// Unconstrained evaluation: the allocation need not respect the budget.
WelfareBreakdown welfare(const EconomyModel& model, const Allocation& alloc, double O);

/// Analytic partials of S. When model autonomy is clipped the right
/// derivative is used: dS/dx_M = 0 and the coupling terms in dS/dx_D and
/// dS/dx_C vanish.
MarginalReturns marginalReturns(const EconomyModel& model, const Allocation& alloc);

/// The funding bar mu / alpha. Throws DomainError for mu <= 0 or alpha outside (0, 1].
double spendingBar(double mu, double alpha);

/// True iff marginalReturn >= mu / alpha.
bool clearsBar(double marginalReturn, double mu, double alpha);

}  // namespace sovai
