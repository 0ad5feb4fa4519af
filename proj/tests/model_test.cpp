#include "sovai/model.hpp"

#include "oracles.hpp"

#include "gtest/gtest.h"

#include <cmath>

using namespace sovai;

namespace {

Allocation alloc(double d, double c, double m, double n) {
  Allocation x;
  x[PillarId::Data] = d;
  x[PillarId::Compute] = c;
  x[PillarId::Model] = m;
  x[PillarId::Norms] = n;
  return x;
}

}  // namespace

TEST(Capacity, Examples) {
  EXPECT_EQ(capacity(2.0, 0.0), 0.0);
  EXPECT_NEAR(capacity(1.0, std::log(2.0)), 0.5, 1e-15);
  EXPECT_NEAR(capacity(1.0, 40.0), 1.0, 1e-12);
  EXPECT_THROW(capacity(0.0, 1.0), DomainError);
  EXPECT_THROW(capacity(-1.0, 1.0), DomainError);
  EXPECT_THROW(capacity(1.0, -0.1), DomainError);
}

TEST(Capacity, MonotoneAndConcave) {
  oracle::Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const double a = rng.logUniform(0.01, 50.0);
    double x1 = rng.uniform(0.0, 5.0), x2 = rng.uniform(0.0, 5.0);
    if (x1 > x2) std::swap(x1, x2);
    const double c1 = capacity(a, x1), c2 = capacity(a, x2);
    ASSERT_GE(c1, 0.0);
    ASSERT_LE(c2, 1.0);
    ASSERT_LE(c1, c2);
    ASSERT_GE(capacity(a, 0.5 * (x1 + x2)), 0.5 * (c1 + c2) - 1e-15);
  }
}

TEST(ModelAutonomy, Examples) {
  auto r = modelAutonomy(0.0, 0.9, 0.9, 1.0, 0.0);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_FALSE(r.clipped);
  r = modelAutonomy(0.0, 1.0, 1.0, 1.0, 2.0);
  EXPECT_EQ(r.value, 1.0);
  EXPECT_TRUE(r.clipped);
  r = modelAutonomy(std::log(2.0), 0.5, 0.5, 1.0, 1.0);
  EXPECT_NEAR(r.value, 0.75, 1e-15);
  EXPECT_FALSE(r.clipped);
  EXPECT_THROW(modelAutonomy(0.0, 1.5, 0.5, 1.0, 1.0), DomainError);
  EXPECT_THROW(modelAutonomy(0.0, 0.5, 0.5, 1.0, -1.0), DomainError);
}

TEST(Capacities, Examples) {
  const auto m = oracle::makeModel({1, 1, 1, 1}, {1, 1, 1, 1}, 0.0, 1.0, 1.0);
  auto c = capacities(m, alloc(0, 0, 0, 0));
  EXPECT_EQ(c.D, 0.0);
  EXPECT_EQ(c.M, 0.0);
  EXPECT_FALSE(c.mClipped);

  const double l2 = std::log(2.0);
  c = capacities(m, alloc(l2, l2, l2, l2));
  for (PillarId id : kAllPillars) EXPECT_NEAR(c[id], 0.5, 1e-15);

  c = capacities(m.withTheta(4.0), alloc(l2, l2, 0, 0));
  EXPECT_EQ(c.M, 1.0);
  EXPECT_TRUE(c.mClipped);
}

TEST(SovereigntyIndex, Examples) {
  const auto m = oracle::makeModel({1, 1, 1, 1}, {0.4, 0.3, 0.2, 0.1}, 0.0, 1.0, 1.0);
  EXPECT_EQ(sovereigntyIndex(m, CapacityVector{}), 0.0);
  EXPECT_NEAR(sovereigntyIndex(m, CapacityVector{1, 1, 1, 1, false}), 1.0, 1e-15);
  EXPECT_NEAR(sovereigntyIndex(m, CapacityVector{0.5, 0.5, 0.75, 0.0, false}), 0.5, 1e-9);
}

TEST(SovereigntyIndex, UnitInterval) {
  oracle::Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto m = oracle::randomModel(rng, 0.0, 3.0);
    const auto x = alloc(rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 3));
    const double s = sovereigntyIndex(m, capacities(m, x));
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0 + 1e-15);
  }
}

TEST(Openness, BenefitAndExposure) {
  EXPECT_EQ(opennessBenefit(1, 4, 0), 0.0);
  EXPECT_NEAR(opennessBenefit(1, 4, 1), 1.609438, 1e-6);
  EXPECT_NEAR(opennessBenefit(2, 1, 0.5), 0.810930, 1e-6);
  EXPECT_EQ(exposureCost(0.3, 0), 0.0);
  EXPECT_NEAR(exposureCost(0.3, 1), 0.3, 1e-15);
  EXPECT_NEAR(exposureCost(0.5, 0.4), 0.2, 1e-15);
  EXPECT_THROW(opennessBenefit(1, 4, 1.5), DomainError);
  EXPECT_THROW(opennessBenefit(0, 4, 0.5), DomainError);
  EXPECT_THROW(exposureCost(-0.1, 0.5), DomainError);
}

TEST(Welfare, Examples) {
  const auto x = alloc(0.3, 0.2, 0.1, 0.4);
  const auto pure = oracle::makeModel({1, 2, 3, 4}, {1, 1, 1, 1}, 0.5, 1.0, 1.0);
  const auto wb = welfare(pure, x, 0.6);
  EXPECT_EQ(wb.W, wb.S - 1.0 * wb.P);

  const auto open = oracle::makeModel({1, 2, 3, 4}, {1, 1, 1, 1}, 0.5, 0.0, 1.0, 1.0, 4.0, 0.3, 0.0);
  EXPECT_NEAR(welfare(open, x, 1.0).W, std::log(5.0), 1e-15);

  // S = 0.5 at caps (0.5, 0.5, 0.75, 0) with w = (0.4, 0.3, 0.2, 0.1)
  const double l2 = std::log(2.0);
  const auto m = oracle::makeModel({1, 1, 1, 1}, {0.4, 0.3, 0.2, 0.1}, 1.0, 0.7, 1.0);
  const auto w = welfare(m, alloc(l2, l2, l2, 0), 0.75);
  EXPECT_NEAR(w.S, 0.5, 1e-9);
  EXPECT_NEAR(w.W, 0.35 + 0.3 * std::log(4.0) - 0.225, 1e-9);
  EXPECT_NEAR(w.W, 0.540888, 1e-6);
}

TEST(Welfare, SeparableInOpenness) {
  oracle::Rng rng(13);
  for (int i = 0; i < 500; ++i) {
    const auto m = oracle::randomModel(rng, 0.0, 3.0);
    const double O1 = rng.uniform(0, 1), O2 = rng.uniform(0, 1);
    const auto x = alloc(rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2));
    const auto y = alloc(rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2));
    const double dx = welfare(m, x, O1).W - welfare(m, x, O2).W;
    const double dy = welfare(m, y, O1).W - welfare(m, y, O2).W;
    ASSERT_NEAR(dx, dy, 1e-12);
  }
}

TEST(MarginalReturns, AtZero) {
  const auto m = oracle::makeModel({1.5, 2, 0.5, 3}, {0.4, 0.3, 0.2, 0.1}, 0.0, 1.0, 1.0);
  const auto mr = marginalReturns(m, alloc(0, 0, 0, 0));
  for (PillarId id : kAllPillars) EXPECT_NEAR(mr[id], m.weight(id) * m.productivity(id), 1e-15);
}

TEST(MarginalReturns, CouplingExample) {
  // w_D = w_M = 0.25, theta = 1, C = 0.5, a_D = 1, x_D = 0
  const auto m = oracle::makeModel({1, 1, 1, 1}, {0.25, 0.25, 0.25, 0.25}, 1.0, 1.0, 1.0);
  const auto mr = marginalReturns(m, alloc(0, std::log(2.0), 0, 0));
  EXPECT_NEAR(mr[PillarId::Data], 0.375, 1e-15);
}

TEST(MarginalReturns, ClippedUsesRightDerivative) {
  const auto m = oracle::makeModel({1, 1, 1, 1}, {0.25, 0.25, 0.25, 0.25}, 4.0, 1.0, 1.0);
  const auto x = alloc(1.0, 1.0, 0.5, 0.2);
  const auto mr = marginalReturns(m, x);
  EXPECT_TRUE(mr.mClipped);
  EXPECT_EQ(mr[PillarId::Model], 0.0);
  EXPECT_NEAR(mr[PillarId::Data], 0.25 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(mr[PillarId::Compute], 0.25 * std::exp(-1.0), 1e-15);
}

TEST(MarginalReturns, MatchFiniteDifferences) {
  oracle::Rng rng(17);
  int checked = 0;
  while (checked < 100) {
    const auto m = oracle::randomModel(rng, 0.0, 2.0);
    oracle::Vec4 a{}, w{}, x{};
    for (PillarId id : kAllPillars) {
      a[index(id)] = m.productivity(id);
      w[index(id)] = m.weight(id);
      x[index(id)] = rng.uniform(0.05, 2.0 / a[index(id)]);
    }
    const auto xa = alloc(x[0], x[1], x[2], x[3]);
    const auto caps = capacities(m, xa);
    if (caps.M > 0.99) continue;
    const auto mr = marginalReturns(m, xa);
    for (int i = 0; i < 4; ++i) {
      const double fd = oracle::partial(a, w, m.theta(), x, i);
      ASSERT_LT(std::fabs(mr.dS_dx.values[i] - fd) / std::fabs(fd), kGradientCheckTolerance)
          << "pillar " << i << " point " << checked;
    }
    ++checked;
  }
}

TEST(MarginalReturns, DataReturnRisesWithComputeSpending) {
  oracle::Rng rng(19);
  for (int i = 0; i < 500; ++i) {
    const auto m = oracle::makeModel({rng.logUniform(0.3, 3), rng.logUniform(0.3, 3), rng.logUniform(0.3, 3), 1},
                                     {0.25, 0.25, 0.25, 0.25}, rng.uniform(0.1, 1.0), 0.7, 1.0);
    const double xD = rng.uniform(0, 1), xM = rng.uniform(0, 0.3);
    double c1 = rng.uniform(0, 1), c2 = rng.uniform(0, 1);
    if (c1 > c2) std::swap(c1, c2);
    if (c2 - c1 < 1e-6) continue;
    const auto x1 = alloc(xD, c1, xM, 0), x2 = alloc(xD, c2, xM, 0);
    if (capacities(m, x2).mClipped) continue;
    ASSERT_LT(marginalReturns(m, x1)[PillarId::Data], marginalReturns(m, x2)[PillarId::Data]);
  }
}

TEST(Bar, McpfRangeEndpoints) {
  auto twoSig = [](double v) { return std::round(v * 10.0) / 10.0; };
  EXPECT_EQ(twoSig(spendingBar(1.54, 0.7)), 2.2);
  EXPECT_EQ(twoSig(spendingBar(2.17, 0.7)), 3.1);
  EXPECT_TRUE(clearsBar(2.2000001, 1.54, 0.7));
  EXPECT_FALSE(clearsBar(2.1999, 1.54, 0.7));
  EXPECT_THROW(spendingBar(1.54, 0.0), DomainError);
  EXPECT_THROW(clearsBar(1.0, 1.54, 0.0), DomainError);
}

TEST(Weights, Normalize) {
  EXPECT_EQ(normalizeWeights({{1, 1, 1, 1}}), (PillarMap<double>{{0.25, 0.25, 0.25, 0.25}}));
  EXPECT_EQ(normalizeWeights({{2, 1, 1, 0}}), (PillarMap<double>{{0.5, 0.25, 0.25, 0}}));
  EXPECT_THROW(normalizeWeights({{0, 0, 0, 0}}), DomainError);
  EXPECT_THROW(normalizeWeights({{1, -1, 1, 1}}), DomainError);

  oracle::Rng rng(23);
  for (int i = 0; i < 1000; ++i) {
    PillarMap<double> raw;
    for (auto& r : raw) r = rng.uniform(0, 10);
    const auto w = normalizeWeights(raw);
    double sum = 0, rawSum = 0;
    for (PillarId id : kAllPillars) {
      sum += w[id];
      rawSum += raw[id];
    }
    ASSERT_EQ(sum, 1.0);
    for (PillarId id : kAllPillars) ASSERT_NEAR(w[id], raw[id] / rawSum, kDomainTolerance);
  }
}

TEST(Weights, ScaleInvarianceIsBitExact) {
  oracle::Rng rng(29);
  for (int i = 0; i < 300; ++i) {
    oracle::Vec4 a{}, w{};
    for (int j = 0; j < 4; ++j) {
      a[j] = rng.logUniform(0.3, 5);
      w[j] = rng.logUniform(0.01, 1);
    }
    const double c = rng.logUniform(1e-3, 1e3);
    const oracle::Vec4 wc{c * w[0], c * w[1], c * w[2], c * w[3]};
    const auto m1 = oracle::makeModel(a, w, 1.3, 0.7, 1.0);
    const auto m2 = oracle::makeModel(a, wc, 1.3, 0.7, 1.0);
    ASSERT_EQ(m1.weights(), m2.weights());
    const auto x = alloc(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1));
    ASSERT_EQ(welfare(m1, x, 0.4), welfare(m2, x, 0.4));
    ASSERT_EQ(marginalReturns(m1, x), marginalReturns(m2, x));
  }
}

TEST(EconomyModel, RejectsInvalidParameters) {
  EXPECT_THROW(oracle::makeModel({1, -1, 1, 1}, {1, 1, 1, 1}, 0, 0.7, 1), DomainError);
  EXPECT_THROW(oracle::makeModel({1, 1, 1, 1}, {1, 1, 1, 1}, -0.5, 0.7, 1), DomainError);
  EXPECT_THROW(oracle::makeModel({1, 1, 1, 1}, {1, 1, 1, 1}, 0, 1.2, 1), DomainError);
  EXPECT_THROW(oracle::makeModel({1, 1, 1, 1}, {1, 1, 1, 1}, 0, 0.7, 0), DomainError);
  EXPECT_THROW(oracle::makeModel({1, 1, 1, 1}, {1, 1, 1, 1}, 0, 0.7, 1, 0.0), DomainError);
  EXPECT_THROW(oracle::makeModel({1, 1, 1, 1}, {1, 1, 1, 1}, 0, 0.7, 1, 1, 4, -0.3), DomainError);
}

TEST(Allocation, Validate) {
  EXPECT_NO_THROW(alloc(0, 1, 2, 3).validate());
  EXPECT_THROW(alloc(0, -1, 2, 3).validate(), DomainError);
  EXPECT_THROW(alloc(0, NAN, 2, 3).validate(), DomainError);
}
