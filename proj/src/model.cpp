#include "sovai/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sovai {

namespace {

// 2^32: weight normalization grid.
constexpr int kWeightGridBits = 32;

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw DomainError(what);
  }
}

bool isFinite(double v) { return std::isfinite(v); }

}  // namespace

void OpennessParams::validate() const {
  require(isFinite(benefitScale) && benefitScale > 0.0, "openness.g must be > 0");
  require(isFinite(benefitCurvature) && benefitCurvature > 0.0, "openness.k must be > 0");
  require(isFinite(exposureSlope) && exposureSlope >= 0.0, "openness.p must be >= 0");
  require(isFinite(riskSensitivity) && riskSensitivity >= 0.0,
          "openness.lambda must be >= 0");
  require(isFinite(sovereigntyWeight) && sovereigntyWeight >= 0.0 && sovereigntyWeight <= 1.0,
          "openness.alpha must lie in [0, 1]");
}

PillarMap<double> normalizeWeights(const PillarMap<double>& raw) {
  double sum = 0.0;
  for (PillarId id : kAllPillars) {
    require(isFinite(raw[id]) && raw[id] >= 0.0,
            "raw weight for " + std::string(pillarName(id)) + " must be finite and >= 0");
    sum += raw[id];
  }
  require(sum > 0.0 && isFinite(sum), "at least one raw weight must be positive");

  const double unit = std::ldexp(1.0, kWeightGridBits);
  PillarMap<double> ticks;
  double tickSum = 0.0;
  PillarId largest = PillarId::Data;
  for (PillarId id : kAllPillars) {
    ticks[id] = std::round(std::ldexp(raw[id] / sum, kWeightGridBits));
    tickSum += ticks[id];
    if (ticks[id] > ticks[largest]) {
      largest = id;
    }
  }
  ticks[largest] += unit - tickSum;

  PillarMap<double> out;
  for (PillarId id : kAllPillars) {
    out[id] = std::ldexp(ticks[id], -kWeightGridBits);
  }
  return out;
}

EconomyModel::EconomyModel(const PillarMap<PillarParams>& pillars, double theta,
                           const OpennessParams& openness, double budget)
    : theta_(theta), openness_(openness), budget_(budget) {
  for (PillarId id : kAllPillars) {
    const auto& p = pillars[id];
    require(isFinite(p.productivity) && p.productivity > 0.0,
            "productivity for " + std::string(pillarName(id)) + " must be > 0");
    productivity_[id] = p.productivity;
    rawWeights_[id] = p.weight;
  }
  weights_ = normalizeWeights(rawWeights_);
  require(isFinite(theta) && theta >= 0.0, "theta must be >= 0");
  require(isFinite(budget) && budget > 0.0, "budget must be > 0");
  openness_.validate();
}

PillarMap<PillarParams> EconomyModel::rawPillars() const {
  PillarMap<PillarParams> out;
  for (PillarId id : kAllPillars) {
    out[id] = {productivity_[id], rawWeights_[id]};
  }
  return out;
}

EconomyModel EconomyModel::withBudget(double budget) const {
  return EconomyModel(rawPillars(), theta_, openness_, budget);
}

EconomyModel EconomyModel::withTheta(double theta) const {
  return EconomyModel(rawPillars(), theta, openness_, budget_);
}

EconomyModel EconomyModel::withOpenness(const OpennessParams& openness) const {
  return EconomyModel(rawPillars(), theta_, openness, budget_);
}

EconomyModel EconomyModel::withPillar(PillarId id, const PillarParams& raw) const {
  auto pillars = rawPillars();
  pillars[id] = raw;
  return EconomyModel(pillars, theta_, openness_, budget_);
}

EconomyModel EconomyModel::withRawWeights(const PillarMap<double>& raw) const {
  auto pillars = rawPillars();
  for (PillarId id : kAllPillars) {
    pillars[id].weight = raw[id];
  }
  return EconomyModel(pillars, theta_, openness_, budget_);
}

double Allocation::total() const {
  double sum = 0.0;
  for (double v : x) {
    sum += v;
  }
  return sum;
}

void Allocation::validate() const {
  for (PillarId id : kAllPillars) {
    require(isFinite(x[id]) && x[id] >= 0.0,
            "allocation for " + std::string(pillarName(id)) + " must be finite and >= 0");
  }
}

double CapacityVector::operator[](PillarId id) const {
  switch (id) {
    case PillarId::Data:
      return D;
    case PillarId::Compute:
      return C;
    case PillarId::Model:
      return M;
    case PillarId::Norms:
      return N;
  }
  return 0.0;
}

double capacity(double a, double x) {
  require(isFinite(a) && a > 0.0, "capacity: productivity must be > 0");
  require(isFinite(x) && x >= 0.0, "capacity: spending must be finite and >= 0");
  return -std::expm1(-a * x);
}

ModelAutonomy modelAutonomy(double xM, double D, double C, double aM, double theta) {
  require(D >= 0.0 && D <= 1.0, "modelAutonomy: D must lie in [0, 1]");
  require(C >= 0.0 && C <= 1.0, "modelAutonomy: C must lie in [0, 1]");
  require(isFinite(theta) && theta >= 0.0, "modelAutonomy: theta must be >= 0");
  const double unclipped = capacity(aM, xM) + theta * D * C;
  if (unclipped >= 1.0) {
    return {1.0, true};
  }
  return {unclipped, false};
}

CapacityVector capacities(const EconomyModel& model, const Allocation& alloc) {
  alloc.validate();
  CapacityVector caps;
  caps.D = capacity(model.productivity(PillarId::Data), alloc[PillarId::Data]);
  caps.C = capacity(model.productivity(PillarId::Compute), alloc[PillarId::Compute]);
  caps.N = capacity(model.productivity(PillarId::Norms), alloc[PillarId::Norms]);
  const auto m = modelAutonomy(alloc[PillarId::Model], caps.D, caps.C,
                               model.productivity(PillarId::Model), model.theta());
  caps.M = m.value;
  caps.mClipped = m.clipped;
  return caps;
}

double sovereigntyIndex(const EconomyModel& model, const CapacityVector& caps) {
  double s = 0.0;
  for (PillarId id : kAllPillars) {
    s += model.weight(id) * caps[id];
  }
  return std::clamp(s, 0.0, 1.0);
}

double opennessBenefit(double g, double k, double O) {
  require(isFinite(g) && g > 0.0, "opennessBenefit: g must be > 0");
  require(isFinite(k) && k > 0.0, "opennessBenefit: k must be > 0");
  require(O >= 0.0 && O <= 1.0, "opennessBenefit: O must lie in [0, 1]");
  return g * std::log1p(k * O);
}

double exposureCost(double p, double O) {
  require(isFinite(p) && p >= 0.0, "exposureCost: p must be >= 0");
  require(O >= 0.0 && O <= 1.0, "exposureCost: O must lie in [0, 1]");
  return p * O;
}

WelfareBreakdown welfare(const EconomyModel& model, const Allocation& alloc, double O) {
  const auto& op = model.openness();
  WelfareBreakdown out;
  out.S = sovereigntyIndex(model, capacities(model, alloc));
  out.G = opennessBenefit(op.benefitScale, op.benefitCurvature, O);
  out.P = exposureCost(op.exposureSlope, O);
  const double alpha = op.sovereigntyWeight;
  out.W = alpha * out.S + (1.0 - alpha) * out.G - op.riskSensitivity * out.P;
  return out;
}

MarginalReturns marginalReturns(const EconomyModel& model, const Allocation& alloc) {
  const auto caps = capacities(model, alloc);
  const double coupling = caps.mClipped ? 0.0 : model.weight(PillarId::Model) * model.theta();

  // a_i exp(-a_i x_i): slope of the saturating capacity.
  auto slope = [&](PillarId id) {
    const double a = model.productivity(id);
    return a * std::exp(-a * alloc[id]);
  };

  MarginalReturns out;
  out.mClipped = caps.mClipped;
  out.dS_dx[PillarId::Data] = (model.weight(PillarId::Data) + coupling * caps.C) * slope(PillarId::Data);
  out.dS_dx[PillarId::Compute] =
      (model.weight(PillarId::Compute) + coupling * caps.D) * slope(PillarId::Compute);
  out.dS_dx[PillarId::Model] = caps.mClipped ? 0.0 : model.weight(PillarId::Model) * slope(PillarId::Model);
  out.dS_dx[PillarId::Norms] = model.weight(PillarId::Norms) * slope(PillarId::Norms);
  return out;
}

double spendingBar(double mu, double alpha) {
  require(isFinite(mu) && mu > 0.0, "bar: mu must be > 0");
  require(isFinite(alpha) && alpha > 0.0 && alpha <= 1.0, "bar: alpha must lie in (0, 1]");
  return mu / alpha;
}

bool clearsBar(double marginalReturn, double mu, double alpha) {
  require(isFinite(marginalReturn) && marginalReturn >= 0.0,
          "clearsBar: marginal return must be >= 0");
  return marginalReturn >= spendingBar(mu, alpha);
}

}  // namespace sovai
