#include "sovai/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

namespace sovai {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kMaxOracleEvaluations = 100'000'000;
constexpr std::uint64_t kMaxGlobalityGrid = 10'000'000;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

double sovereignty(const EconomyModel& model, const Allocation& x) {
  return sovereigntyIndex(model, capacities(model, x));
}

/// Unclipped model-autonomy argument 1 - exp(-aM xM) + theta D C.
double autonomyArgument(const EconomyModel& model, const Allocation& x) {
  const double D = capacity(model.productivity(PillarId::Data), x[PillarId::Data]);
  const double C = capacity(model.productivity(PillarId::Compute), x[PillarId::Compute]);
  return capacity(model.productivity(PillarId::Model), x[PillarId::Model]) + model.theta() * D * C;
}

std::vector<PillarId> fundedPillars(const Allocation& x) {
  std::vector<PillarId> out;
  for (PillarId id : kAllPillars) {
    if (x[id] > 0.0) {
      out.push_back(id);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Derivatives of S and of the saturation surface.
// ---------------------------------------------------------------------------

using Hessian = std::array<std::array<double, kPillarCount>, kPillarCount>;

/// Clip-aware Hessian of S (same regime convention as marginalReturns).
Hessian hessianOfS(const EconomyModel& model, const Allocation& x, bool clipped) {
  Hessian h{};
  PillarMap<double> e;
  for (PillarId id : kAllPillars) {
    e[id] = std::exp(-model.productivity(id) * x[id]);
  }
  const double aD = model.productivity(PillarId::Data);
  const double aC = model.productivity(PillarId::Compute);
  const double aM = model.productivity(PillarId::Model);
  const double aN = model.productivity(PillarId::Norms);
  const double D = 1.0 - e[PillarId::Data];
  const double C = 1.0 - e[PillarId::Compute];
  const double coupling = clipped ? 0.0 : model.weight(PillarId::Model) * model.theta();
  constexpr auto iD = index(PillarId::Data);
  constexpr auto iC = index(PillarId::Compute);
  constexpr auto iM = index(PillarId::Model);
  constexpr auto iN = index(PillarId::Norms);
  h[iD][iD] = -(model.weight(PillarId::Data) + coupling * C) * aD * aD * e[PillarId::Data];
  h[iC][iC] = -(model.weight(PillarId::Compute) + coupling * D) * aC * aC * e[PillarId::Compute];
  h[iD][iC] = h[iC][iD] = coupling * aD * e[PillarId::Data] * aC * e[PillarId::Compute];
  h[iM][iM] = clipped ? 0.0 : -model.weight(PillarId::Model) * aM * aM * e[PillarId::Model];
  h[iN][iN] = -model.weight(PillarId::Norms) * aN * aN * e[PillarId::Norms];
  return h;
}

/// On the saturation surface M = 1 the index reduces to
/// w_D D + w_C C + w_M + w_N N, constrained by K(x) = 0 with
/// K = 1 - exp(-aM xM) + theta D C - 1.
struct SurfaceTerms {
  PillarMap<double> gradS{};
  Hessian hessS{};
  double K = 0.0;
  PillarMap<double> gradK{};
  Hessian hessK{};
};

SurfaceTerms surfaceTerms(const EconomyModel& model, const Allocation& x) {
  SurfaceTerms t;
  PillarMap<double> e;
  for (PillarId id : kAllPillars) {
    e[id] = std::exp(-model.productivity(id) * x[id]);
  }
  const double aD = model.productivity(PillarId::Data);
  const double aC = model.productivity(PillarId::Compute);
  const double aM = model.productivity(PillarId::Model);
  const double aN = model.productivity(PillarId::Norms);
  const double D = 1.0 - e[PillarId::Data];
  const double C = 1.0 - e[PillarId::Compute];
  const double theta = model.theta();
  constexpr auto iD = index(PillarId::Data);
  constexpr auto iC = index(PillarId::Compute);
  constexpr auto iM = index(PillarId::Model);
  constexpr auto iN = index(PillarId::Norms);

  t.gradS[PillarId::Data] = model.weight(PillarId::Data) * aD * e[PillarId::Data];
  t.gradS[PillarId::Compute] = model.weight(PillarId::Compute) * aC * e[PillarId::Compute];
  t.gradS[PillarId::Norms] = model.weight(PillarId::Norms) * aN * e[PillarId::Norms];
  t.hessS[iD][iD] = -model.weight(PillarId::Data) * aD * aD * e[PillarId::Data];
  t.hessS[iC][iC] = -model.weight(PillarId::Compute) * aC * aC * e[PillarId::Compute];
  t.hessS[iN][iN] = -model.weight(PillarId::Norms) * aN * aN * e[PillarId::Norms];

  t.K = -std::expm1(-aM * x[PillarId::Model]) + theta * D * C - 1.0;
  t.gradK[PillarId::Data] = theta * C * aD * e[PillarId::Data];
  t.gradK[PillarId::Compute] = theta * D * aC * e[PillarId::Compute];
  t.gradK[PillarId::Model] = aM * e[PillarId::Model];
  t.hessK[iD][iD] = -theta * C * aD * aD * e[PillarId::Data];
  t.hessK[iC][iC] = -theta * D * aC * aC * e[PillarId::Compute];
  t.hessK[iD][iC] = t.hessK[iC][iD] = theta * aD * e[PillarId::Data] * aC * e[PillarId::Compute];
  t.hessK[iM][iM] = -aM * aM * e[PillarId::Model];
  return t;
}

// ---------------------------------------------------------------------------
// Candidates and the active-set Newton polish.
// ---------------------------------------------------------------------------

enum class Regime { Smooth, Saturation };

struct Candidate {
  Allocation x;
  double S = -kInf;
  double priceS = 0.0;     ///< multiplier in units of S per budget unit
  bool stationary = false; ///< passed the KKT checks
  Regime regime = Regime::Smooth;
};

struct NewtonOutcome {
  enum class Status { Converged, DropIndex, Failed } status = Status::Failed;
  Allocation x;
  double priceS = 0.0;
  double nu = 0.0;
  PillarId dropped = PillarId::Data;
};

/// Newton's method on the equality-constrained stationarity system for a
/// fixed funded set; unfunded entries stay at exactly zero.
NewtonOutcome newtonOnFace(const EconomyModel& model, Allocation x, const std::vector<PillarId>& funded,
                           Regime regime, int maxIterations) {
  const double B = model.budget();
  const std::size_t nf = funded.size();
  const bool saturation = regime == Regime::Saturation;
  const std::size_t dim = nf + 1 + (saturation ? 1 : 0);

  for (PillarId id : kAllPillars) {
    if (std::find(funded.begin(), funded.end(), id) == funded.end()) {
      x[id] = 0.0;
    }
  }

  // Stationarity residual at x for given multipliers.
  auto residual = [&](const Allocation& at, double price, double nu, Vector& r, double& scale) {
    r.resize(static_cast<Eigen::Index>(dim));
    scale = 0.0;
    if (saturation) {
      const auto t = surfaceTerms(model, at);
      for (std::size_t k = 0; k < nf; ++k) {
        const PillarId id = funded[k];
        const double g = t.gradS[id] + nu * t.gradK[id];
        scale = std::max(scale, std::abs(g));
        r(static_cast<Eigen::Index>(k)) = g - price;
      }
      r(static_cast<Eigen::Index>(nf + 1)) = t.K;
    } else {
      const auto mr = marginalReturns(model, at);
      for (std::size_t k = 0; k < nf; ++k) {
        const double g = mr[funded[k]];
        scale = std::max(scale, std::abs(g));
        r(static_cast<Eigen::Index>(k)) = g - price;
      }
    }
    r(static_cast<Eigen::Index>(nf)) = (at.total() - B) / std::max(1.0, B);
    scale = std::max(scale, 1e-300);
  };

  auto normOf = [&](const Vector& r, double scale) {
    double m = 0.0;
    for (std::size_t k = 0; k < nf; ++k) {
      m = std::max(m, std::abs(r(static_cast<Eigen::Index>(k))) / scale);
    }
    for (std::size_t k = nf; k < dim; ++k) {
      m = std::max(m, std::abs(r(static_cast<Eigen::Index>(k))));
    }
    return m;
  };

  // Initial multipliers: least squares on the stationarity rows.
  double price = 0.0;
  double nu = 0.0;
  if (saturation) {
    const auto t = surfaceTerms(model, x);
    if (nf >= 2) {
      Matrix A(static_cast<Eigen::Index>(nf), 2);
      Vector b(static_cast<Eigen::Index>(nf));
      for (std::size_t k = 0; k < nf; ++k) {
        A(static_cast<Eigen::Index>(k), 0) = 1.0;
        A(static_cast<Eigen::Index>(k), 1) = -t.gradK[funded[k]];
        b(static_cast<Eigen::Index>(k)) = t.gradS[funded[k]];
      }
      const Vector sol = A.colPivHouseholderQr().solve(b);
      price = sol(0);
      nu = sol(1);
    } else {
      nu = 0.5 * model.weight(PillarId::Model);
      price = t.gradS[funded[0]] + nu * t.gradK[funded[0]];
    }
  } else {
    const auto mr = marginalReturns(model, x);
    for (PillarId id : funded) {
      price += mr[id];
    }
    price /= static_cast<double>(nf);
  }

  Vector r;
  double scale = 1.0;
  residual(x, price, nu, r, scale);
  double norm = normOf(r, scale);

  NewtonOutcome out;
  for (int it = 0; it < maxIterations; ++it) {
    if (norm <= 1e-14) {
      break;
    }
    Matrix J = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    if (saturation) {
      const auto t = surfaceTerms(model, x);
      for (std::size_t a = 0; a < nf; ++a) {
        for (std::size_t b = 0; b < nf; ++b) {
          const auto ia = index(funded[a]);
          const auto ib = index(funded[b]);
          J(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
              t.hessS[ia][ib] + nu * t.hessK[ia][ib];
        }
        J(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(nf + 1)) = t.gradK[funded[a]];
        J(static_cast<Eigen::Index>(nf + 1), static_cast<Eigen::Index>(a)) = t.gradK[funded[a]];
      }
    } else {
      const bool clipped = autonomyArgument(model, x) >= 1.0;
      const auto h = hessianOfS(model, x, clipped);
      for (std::size_t a = 0; a < nf; ++a) {
        for (std::size_t b = 0; b < nf; ++b) {
          J(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
              h[index(funded[a])][index(funded[b])];
        }
      }
    }
    for (std::size_t a = 0; a < nf; ++a) {
      J(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(nf)) = -1.0;
      J(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(a)) = 1.0 / std::max(1.0, B);
    }

    const auto lu = J.fullPivLu();
    if (lu.rank() < static_cast<Eigen::Index>(dim)) {
      return out;
    }
    const Vector step = lu.solve(-r);

    // Fraction-to-boundary: funded entries must stay strictly positive.
    double t = 1.0;
    std::optional<PillarId> blocking;
    for (std::size_t k = 0; k < nf; ++k) {
      const double xi = x[funded[k]];
      const double dx = step(static_cast<Eigen::Index>(k));
      if (dx < 0.0 && xi + dx <= 0.0) {
        const double limit = 0.5 * xi / -dx;
        if (limit < t) {
          t = limit;
          blocking = funded[k];
        }
      }
    }

    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      Allocation trial = x;
      for (std::size_t k = 0; k < nf; ++k) {
        trial[funded[k]] = x[funded[k]] + t * step(static_cast<Eigen::Index>(k));
      }
      const double trialPrice = price + t * step(static_cast<Eigen::Index>(nf));
      const double trialNu = saturation ? nu + t * step(static_cast<Eigen::Index>(nf + 1)) : nu;
      Vector rt;
      double st = 1.0;
      residual(trial, trialPrice, trialNu, rt, st);
      const double nt = normOf(rt, st);
      if (nt < norm || nt <= 1e-14) {
        x = trial;
        price = trialPrice;
        nu = trialNu;
        r = rt;
        scale = st;
        norm = nt;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      break;
    }
    if (blocking && x[*blocking] <= 1e-12 * std::max(1.0, B)) {
      out.status = NewtonOutcome::Status::DropIndex;
      out.dropped = *blocking;
      return out;
    }
  }

  if (norm > 1e-10) {
    return out;
  }
  out.status = NewtonOutcome::Status::Converged;
  out.x = x;
  out.priceS = price;
  out.nu = nu;
  return out;
}

/// Active-set loop around newtonOnFace; returns a stationary candidate or nothing.
std::optional<Candidate> polish(const EconomyModel& model, const Allocation& start, Regime regime,
                                const SolveOptions& opts) {
  const double B = model.budget();
  const bool saturation = regime == Regime::Saturation;
  std::vector<PillarId> funded;
  for (PillarId id : kAllPillars) {
    if (start[id] > 1e-9 * B) {
      funded.push_back(id);
    }
  }
  if (funded.empty()) {
    return std::nullopt;
  }

  Allocation x = start;
  const int newtonIterations = std::min(opts.maxIterations, 200);
  for (int round = 0; round < 12; ++round) {
    auto outcome = newtonOnFace(model, x, funded, regime, newtonIterations);
    if (outcome.status == NewtonOutcome::Status::DropIndex) {
      funded.erase(std::find(funded.begin(), funded.end(), outcome.dropped));
      if (funded.empty()) {
        return std::nullopt;
      }
      continue;
    }
    if (outcome.status == NewtonOutcome::Status::Failed) {
      return std::nullopt;
    }

    const Allocation& sol = outcome.x;
    for (PillarId id : funded) {
      if (!(sol[id] > 0.0)) {
        return std::nullopt;
      }
    }
    if (outcome.priceS < 0.0) {
      return std::nullopt;
    }

    // Slopes of the unfunded pillars at zero must not exceed the price.
    PillarMap<double> slopes;
    if (saturation) {
      const double wM = model.weight(PillarId::Model);
      if (outcome.nu < -1e-12 || outcome.nu > wM + 1e-12) {
        return std::nullopt;
      }
      const auto t = surfaceTerms(model, sol);
      for (PillarId id : kAllPillars) {
        slopes[id] = t.gradS[id] + outcome.nu * t.gradK[id];
      }
    } else {
      slopes = marginalReturns(model, sol).dS_dx;
    }
    std::optional<PillarId> violator;
    double worst = 0.0;
    for (PillarId id : kAllPillars) {
      if (std::find(funded.begin(), funded.end(), id) != funded.end()) {
        continue;
      }
      const double excess = slopes[id] - outcome.priceS;
      if (excess > 1e-12 * std::max(outcome.priceS, 1e-300) && excess > worst) {
        worst = excess;
        violator = id;
      }
    }
    if (violator) {
      funded.push_back(*violator);
      std::sort(funded.begin(), funded.end());
      x = sol;
      const double seed = 1e-6 * B;
      x[*violator] = seed;
      for (PillarId id : funded) {
        if (id != *violator) {
          x[id] = std::max(x[id] - seed / static_cast<double>(funded.size() - 1), 0.5 * x[id]);
        }
      }
      continue;
    }

    Candidate c;
    c.x = sol;
    c.S = sovereignty(model, sol);
    c.priceS = outcome.priceS;
    c.stationary = true;
    c.regime = regime;
    return c;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Price-taking allocation: maximize S(x) - price * sum x over x >= 0.
// ---------------------------------------------------------------------------

/// argmax over x >= 0 of coef * cap(x) - price * x, with price = exp(lnPrice).
double invertSlope(double coef, double a, double lnPrice) {
  if (!(coef > 0.0)) {
    return 0.0;
  }
  return std::max(0.0, (std::log(coef * a) - lnPrice) / a);
}

/// Best response of Data (or Compute) given the other coupled capacity and
/// the model-autonomy spend. The objective w cap(x) + w_M min{1, cm +
/// theta other cap(x)} - price x is concave in x, so the maximizer is the
/// below-saturation root, the above-saturation root, or the kink between them.
double coupledBestResponse(double w, double a, double other, double cm, double theta, double wM,
                           double lnPrice) {
  const double reach = theta * other;
  if (!(reach > 0.0)) {
    return invertSlope(w, a, lnPrice);
  }
  const double kinkCap = (1.0 - cm) / reach;
  const double below = invertSlope(w + wM * reach, a, lnPrice);
  if (kinkCap >= 1.0 || -std::expm1(-a * below) <= kinkCap) {
    return below;
  }
  const double above = invertSlope(w, a, lnPrice);
  if (-std::expm1(-a * above) >= kinkCap) {
    return above;
  }
  return -std::log1p(-kinkCap) / a;
}

double modelBestResponse(const EconomyModel& model, double D, double C, double lnPrice) {
  const double base = model.theta() * D * C;
  if (base >= 1.0) {
    return 0.0;
  }
  const double aM = model.productivity(PillarId::Model);
  const double unconstrained = invertSlope(model.weight(PillarId::Model), aM, lnPrice);
  if (base <= 0.0) {
    return unconstrained;
  }
  return std::min(unconstrained, -std::log(base) / aM);
}

Allocation coordinateAscent(const EconomyModel& model, Allocation x, double lnPrice, int maxIterations) {
  const double aD = model.productivity(PillarId::Data);
  const double aC = model.productivity(PillarId::Compute);
  const double aM = model.productivity(PillarId::Model);
  const double wD = model.weight(PillarId::Data);
  const double wC = model.weight(PillarId::Compute);
  const double wM = model.weight(PillarId::Model);
  const double theta = model.theta();

  x[PillarId::Norms] =
      invertSlope(model.weight(PillarId::Norms), model.productivity(PillarId::Norms), lnPrice);
  for (int it = 0; it < maxIterations; ++it) {
    const Allocation prev = x;
    const double cm0 = -std::expm1(-aM * x[PillarId::Model]);
    const double C0 = -std::expm1(-aC * x[PillarId::Compute]);
    x[PillarId::Data] = coupledBestResponse(wD, aD, C0, cm0, theta, wM, lnPrice);
    const double D1 = -std::expm1(-aD * x[PillarId::Data]);
    x[PillarId::Compute] = coupledBestResponse(wC, aC, D1, cm0, theta, wM, lnPrice);
    const double C1 = -std::expm1(-aC * x[PillarId::Compute]);
    x[PillarId::Model] = modelBestResponse(model, D1, C1, lnPrice);

    double change = 0.0;
    double size = 1.0;
    for (PillarId id : kAllPillars) {
      change = std::max(change, std::abs(x[id] - prev[id]));
      size = std::max(size, x[id]);
    }
    if (change <= 1e-15 * size) {
      break;
    }
  }
  return x;
}

/// Coordinate ascent from the fully-coupled top and from zero; keeps the
/// higher value of the price-taking objective.
Allocation allocationAtPrice(const EconomyModel& model, double lnPrice, int maxIterations) {
  const double wM = model.weight(PillarId::Model);
  const double theta = model.theta();
  Allocation top;
  top[PillarId::Data] = invertSlope(model.weight(PillarId::Data) + wM * theta,
                                    model.productivity(PillarId::Data), lnPrice);
  top[PillarId::Compute] = invertSlope(model.weight(PillarId::Compute) + wM * theta,
                                       model.productivity(PillarId::Compute), lnPrice);
  top[PillarId::Model] = invertSlope(wM, model.productivity(PillarId::Model), lnPrice);

  const Allocation fromTop = coordinateAscent(model, top, lnPrice, maxIterations);
  if (theta == 0.0) {
    return fromTop;
  }
  const Allocation fromZero = coordinateAscent(model, Allocation{}, lnPrice, maxIterations);
  const double price = std::exp(lnPrice);
  const double valueTop = sovereignty(model, fromTop) - price * fromTop.total();
  const double valueZero = sovereignty(model, fromZero) - price * fromZero.total();
  return valueZero > valueTop ? fromZero : fromTop;
}

/// ln of the supremum of any pillar's slope at zero, max_i (w_i + w_M theta) a_i.
double lnPriceCeiling(const EconomyModel& model) {
  double top = 0.0;
  for (PillarId id : kAllPillars) {
    top = std::max(top, (model.weight(id) + model.weight(PillarId::Model) * model.theta()) *
                            model.productivity(id));
  }
  return std::log(top);
}

/// Bisection on ln(price) until spending clears the budget. Returns the
/// allocation on the affordable side of the bracket.
Allocation priceBisection(const EconomyModel& model, const SolveOptions& opts) {
  const double B = model.budget();
  const int inner = opts.maxIterations;
  double hi = lnPriceCeiling(model);
  double step = 1.0;
  double lo = hi - step;
  Allocation atLo = allocationAtPrice(model, lo, inner);
  while (atLo.total() < B) {
    step *= 2.0;
    if (step > 4096.0) {
      return atLo;  // spending saturates below B: budget slack
    }
    hi = lo;
    lo = hi - step;
    atLo = allocationAtPrice(model, lo, inner);
  }
  Allocation atHi = allocationAtPrice(model, hi, inner);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    Allocation atMid = allocationAtPrice(model, mid, inner);
    if (atMid.total() >= B) {
      lo = mid;
    } else {
      hi = mid;
      atHi = atMid;
    }
  }
  return atHi;
}

// ---------------------------------------------------------------------------
// Projected-gradient ascent on {x >= 0, sum x <= B}.
// ---------------------------------------------------------------------------

Allocation projectOntoBudgetSet(const Allocation& in, double B) {
  Allocation y;
  for (PillarId id : kAllPillars) {
    y[id] = std::max(0.0, in[id]);
  }
  if (y.total() <= B) {
    return y;
  }
  std::array<double, kPillarCount> sorted = in.x.values;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < kPillarCount; ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - B) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) {
      tau = candidate;
    }
  }
  for (PillarId id : kAllPillars) {
    y[id] = std::max(0.0, in[id] - tau);
  }
  return y;
}

Allocation projectedGradientAscent(const EconomyModel& model, const Allocation& start, int maxIterations) {
  const double B = model.budget();
  Allocation x = projectOntoBudgetSet(start, B);
  double value = sovereignty(model, x);
  double step = -1.0;
  for (int it = 0; it < maxIterations; ++it) {
    const auto g = marginalReturns(model, x).dS_dx;
    const double gmax = *std::max_element(g.begin(), g.end());
    if (!(gmax > 0.0)) {
      break;
    }
    if (step < 0.0) {
      step = B / gmax;
    }
    bool moved = false;
    Allocation next;
    double nextValue = value;
    for (int halving = 0; halving < 60; ++halving) {
      Allocation trial;
      for (PillarId id : kAllPillars) {
        trial[id] = x[id] + step * g[id];
      }
      trial = projectOntoBudgetSet(trial, B);
      double predicted = 0.0;
      for (PillarId id : kAllPillars) {
        predicted += g[id] * (trial[id] - x[id]);
      }
      const double trialValue = sovereignty(model, trial);
      if (trialValue >= value + 1e-4 * predicted) {
        next = trial;
        nextValue = trialValue;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      break;
    }
    double change = 0.0;
    for (PillarId id : kAllPillars) {
      change = std::max(change, std::abs(next[id] - x[id]));
    }
    x = next;
    value = nextValue;
    step *= 2.0;
    if (change <= 1e-12 * std::max(1.0, B)) {
      break;
    }
  }
  return x;
}

/// Uniform point on the budget simplex {x >= 0, sum x = B}.
Allocation randomSimplexPoint(std::mt19937_64& rng, double B) {
  Allocation x;
  double sum = 0.0;
  for (PillarId id : kAllPillars) {
    // 53-bit uniform in (0, 1].
    const double u = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
    x[id] = -std::log(u);
    sum += x[id];
  }
  for (PillarId id : kAllPillars) {
    x[id] = B * x[id] / sum;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Simplex grid enumeration shared by the oracle and the globality check.
// ---------------------------------------------------------------------------

/// Visits every point of the simplex grid with its sovereignty index. The
/// index is accumulated in the same order as sovereigntyIndex, so values are
/// bit-identical to evaluating capacities() and sovereigntyIndex() per point.
template <typename Visit>
void forEachGridAllocation(const EconomyModel& model, int resolution, Visit&& visit) {
  const double B = model.budget();
  const auto R = static_cast<std::size_t>(resolution);
  std::vector<double> level(R + 1);
  for (std::size_t j = 0; j <= R; ++j) {
    level[j] = B * static_cast<double>(j) / resolution;
  }
  PillarMap<std::vector<double>> cap;
  for (PillarId id : kAllPillars) {
    cap[id].resize(level.size());
    for (std::size_t j = 0; j < level.size(); ++j) {
      cap[id][j] = capacity(model.productivity(id), level[j]);
    }
  }
  const double theta = model.theta();
  const auto& w = model.weights();
  const auto& capD = cap[PillarId::Data];
  const auto& capC = cap[PillarId::Compute];
  const auto& capM = cap[PillarId::Model];
  const auto& capN = cap[PillarId::Norms];

  Allocation x;
  for (std::size_t jD = 0; jD <= R; ++jD) {
    x[PillarId::Data] = level[jD];
    for (std::size_t jC = 0; jC <= R - jD; ++jC) {
      x[PillarId::Compute] = level[jC];
      const double coupled = theta * capD[jD] * capC[jC];
      const double partialDC = w[PillarId::Data] * capD[jD] + w[PillarId::Compute] * capC[jC];
      for (std::size_t jM = 0; jM <= R - jD - jC; ++jM) {
        x[PillarId::Model] = level[jM];
        const double unclipped = capM[jM] + coupled;
        const double M = unclipped >= 1.0 ? 1.0 : unclipped;
        const double partial = partialDC + w[PillarId::Model] * M;
        for (std::size_t jN = 0; jN <= R - jD - jC - jM; ++jN) {
          x[PillarId::Norms] = level[jN];
          visit(x, std::clamp(partial + w[PillarId::Norms] * capN[jN], 0.0, 1.0));
        }
      }
    }
  }
}

Candidate bestGridAllocation(const EconomyModel& model, int resolution) {
  Candidate best;
  forEachGridAllocation(model, resolution, [&](const Allocation& x, double S) {
    if (S > best.S) {
      best.S = S;
      best.x = x;
    }
  });
  return best;
}

// ---------------------------------------------------------------------------
// Candidate bookkeeping.
// ---------------------------------------------------------------------------

/// Multiplier estimate for an unpolished point: mean slope over funded pillars,
/// or zero when the budget is slack.
double estimatePrice(const EconomyModel& model, const Allocation& x) {
  if (x.total() < model.budget() * (1.0 - 1e-12)) {
    return 0.0;
  }
  const auto mr = marginalReturns(model, x);
  double sum = 0.0;
  int count = 0;
  for (PillarId id : kAllPillars) {
    if (x[id] > 0.0) {
      sum += mr[id];
      ++count;
    }
  }
  return count > 0 ? sum / count : 0.0;
}

Candidate rawCandidate(const EconomyModel& model, const Allocation& x) {
  Candidate c;
  c.x = x;
  c.S = sovereignty(model, x);
  c.priceS = estimatePrice(model, x);
  return c;
}

class CandidatePool {
 public:
  CandidatePool(const EconomyModel& model, const SolveOptions& opts) : model_(model), opts_(opts) {}

  /// Adds the raw point and its polished stationary points.
  void addWithPolish(const Allocation& x) {
    offer(rawCandidate(model_, x));
    if (auto c = polish(model_, x, Regime::Smooth, opts_)) {
      offer(*c);
    }
    if (model_.theta() > 0.0 && autonomyArgument(model_, x) > 0.9) {
      if (auto c = polish(model_, x, Regime::Saturation, opts_)) {
        offer(*c);
      }
    }
  }

  /// Best stationary candidate, unless an unpolished point beats it by more
  /// than the tolerance.
  std::optional<Candidate> best() const {
    if (stationary_ && (!raw_ || raw_->S <= stationary_->S + 1e-9)) {
      return stationary_;
    }
    return raw_;
  }

  double bestValue() const {
    const auto b = best();
    return b ? b->S : -kInf;
  }

 private:
  void offer(const Candidate& c) {
    auto& slot = c.stationary ? stationary_ : raw_;
    if (!slot || c.S > slot->S + 1e-15) {
      slot = c;
    }
  }

  const EconomyModel& model_;
  const SolveOptions& opts_;
  std::optional<Candidate> stationary_;
  std::optional<Candidate> raw_;
};

PlannerSolution assemble(const EconomyModel& model, const Candidate& c, const SolveOptions& opts) {
  PlannerSolution sol;
  sol.allocation = c.x;
  sol.openness = 0.0;
  sol.multiplier = model.alpha() * c.priceS;
  sol.capacities = capacities(model, c.x);
  sol.welfare = welfare(model, c.x, 0.0);
  sol.fundedSet = fundedPillars(c.x);
  sol.flags.mClipped = sol.capacities.mClipped || c.regime == Regime::Saturation;
  sol.flags.budgetBinding = sol.multiplier > opts.tolerance;
  sol.kktResiduals = kktResiduals(model, sol);
  return sol;
}

}  // namespace

void SolveOptions::validate() const {
  if (!(tolerance > 0.0 && tolerance < 1.0)) {
    throw DomainError("tolerance must lie in (0, 1)");
  }
  if (maxIterations <= 0) {
    throw DomainError("maxIterations must be positive");
  }
  if (multistartCount <= 0) {
    throw DomainError("multistartCount must be positive");
  }
  if (oracleResolution <= 0) {
    throw DomainError("oracleResolution must be positive");
  }
}

double KktResiduals::maxAbs() const {
  double m = std::max(std::abs(openness), std::abs(complementarySlackness));
  for (double v : pillars) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

std::string_view verdictName(Verdict v) { return v == Verdict::Fund ? "fund" : "defer"; }

OpennessChoice optimalOpenness(const OpennessParams& params) {
  params.validate();
  const double alpha = params.sovereigntyWeight;
  const double cost = params.riskSensitivity * params.exposureSlope;
  if (cost == 0.0) {
    return alpha < 1.0 ? OpennessChoice{1.0, true} : OpennessChoice{0.0, true};
  }
  const double unclamped = (1.0 - alpha) * params.benefitScale / cost - 1.0 / params.benefitCurvature;
  if (unclamped <= 0.0) {
    return {0.0, true};
  }
  if (unclamped >= 1.0) {
    return {1.0, true};
  }
  return {unclamped, false};
}

std::uint64_t simplexGridSize(int resolution) {
  if (resolution < 0) {
    return 0;
  }
  // C(R + 4, 4)
  const auto r = static_cast<std::uint64_t>(resolution);
  return (r + 1) * (r + 2) * (r + 3) * (r + 4) / 24;
}

PlannerSolution solveAllocation(const EconomyModel& model, const SolveOptions& opts) {
  opts.validate();
  CandidatePool pool(model, opts);

  const Allocation bisected = priceBisection(model, opts);
  pool.addWithPolish(bisected);

  // Deterministic starts first, then seeded random restarts.
  const double B = model.budget();
  Allocation even;
  for (PillarId id : kAllPillars) {
    even[id] = B / 4.0;
  }
  std::vector<Allocation> starts = {bisected, even};
  std::mt19937_64 rng(opts.randomSeed);
  for (int k = 0; k < opts.multistartCount; ++k) {
    starts.push_back(randomSimplexPoint(rng, B));
  }
  for (const auto& start : starts) {
    pool.addWithPolish(projectedGradientAscent(model, start, opts.maxIterations));
  }

  bool verified = false;
  if (simplexGridSize(opts.oracleResolution) <= kMaxGlobalityGrid) {
    const Candidate grid = bestGridAllocation(model, opts.oracleResolution);
    if (grid.S > pool.bestValue() + 1e-12) {
      pool.addWithPolish(grid.x);
      pool.addWithPolish(projectedGradientAscent(model, grid.x, opts.maxIterations));
    }
    verified = pool.bestValue() >= grid.S - 1e-12;
  }

  const auto best = pool.best();
  if (!best) {
    throw SolverFailure("no feasible candidate", PlannerSolution{});
  }
  PlannerSolution sol = assemble(model, *best, opts);
  sol.flags.globalityVerified = verified;
  if (!best->stationary && !sol.flags.mClipped) {
    double worst = 0.0;
    for (double r : sol.kktResiduals.pillars) {
      worst = std::max(worst, std::abs(r));
    }
    worst = std::max(worst, std::abs(sol.kktResiduals.complementarySlackness));
    if (worst > opts.tolerance) {
      throw SolverFailure("allocation did not reach the optimality conditions within " +
                              std::to_string(opts.maxIterations) + " iterations",
                          sol);
    }
  }
  return sol;
}

PlannerSolution solveJoint(const EconomyModel& model, const SolveOptions& opts) {
  PlannerSolution sol = solveAllocation(model, opts);
  const auto choice = optimalOpenness(model.openness());
  sol.openness = choice.O;
  sol.flags.opennessAtBound = choice.atBound;
  sol.welfare = welfare(model, sol.allocation, choice.O);
  sol.kktResiduals = kktResiduals(model, sol);
  return sol;
}

OracleSolution gridOracle(const EconomyModel& model, int resolution) {
  if (resolution < 2) {
    throw DomainError("oracle resolution must be >= 2");
  }
  const std::uint64_t evaluations =
      simplexGridSize(resolution) * (static_cast<std::uint64_t>(resolution) + 1);
  if (evaluations > kMaxOracleEvaluations) {
    throw DomainError("oracle grid of " + std::to_string(evaluations) +
                      " evaluations exceeds the limit of 10^8");
  }
  const auto& op = model.openness();
  const double alpha = op.sovereigntyWeight;
  std::vector<double> levels(static_cast<std::size_t>(resolution) + 1);
  std::vector<double> opennessTerm(levels.size());
  for (std::size_t j = 0; j < levels.size(); ++j) {
    levels[j] = static_cast<double>(j) / resolution;
    opennessTerm[j] =
        (1.0 - alpha) * opennessBenefit(op.benefitScale, op.benefitCurvature, levels[j]) -
        op.riskSensitivity * exposureCost(op.exposureSlope, levels[j]);
  }

  OracleSolution best;
  best.gridResolution = resolution;
  double bestW = -kInf;
  forEachGridAllocation(model, resolution, [&](const Allocation& x, double S) {
    for (std::size_t j = 0; j < levels.size(); ++j) {
      const double W = alpha * S + opennessTerm[j];
      if (W > bestW) {
        bestW = W;
        best.allocation = x;
        best.openness = levels[j];
      }
    }
  });
  best.welfare = welfare(model, best.allocation, best.openness);
  return best;
}

KktResiduals kktResiduals(const EconomyModel& model, const PlannerSolution& sol) {
  KktResiduals out;
  const double alpha = model.alpha();
  const auto mr = marginalReturns(model, sol.allocation);
  for (PillarId id : kAllPillars) {
    const double r = alpha * mr[id] - sol.multiplier;
    out.pillars[id] = sol.allocation[id] > 0.0 ? r : std::max(0.0, r);
  }
  if (!sol.flags.opennessAtBound) {
    const auto& op = model.openness();
    out.openness = (1.0 - alpha) * op.benefitScale * op.benefitCurvature /
                       (1.0 + op.benefitCurvature * sol.openness) -
                   op.riskSensitivity * op.exposureSlope;
  }
  out.complementarySlackness = sol.multiplier * (model.budget() - sol.allocation.total());
  return out;
}

std::vector<double> shadowPrice(const EconomyModel& model, const std::vector<double>& budgets,
                                const SolveOptions& opts) {
  for (std::size_t k = 0; k < budgets.size(); ++k) {
    if (!(budgets[k] > 0.0)) {
      throw DomainError("budgets must be positive");
    }
    if (k > 0 && budgets[k] < budgets[k - 1]) {
      throw DomainError("budgets must be sorted ascending");
    }
  }
  std::vector<double> out;
  out.reserve(budgets.size());
  for (double B : budgets) {
    out.push_back(solveAllocation(model.withBudget(B), opts).multiplier);
  }
  return out;
}

GateResult gateModeAllocation(const EconomyModel& model, double mu, const SolveOptions& opts) {
  if (!(std::isfinite(mu) && mu > 0.0)) {
    throw DomainError("gate: mu must be > 0");
  }
  opts.validate();
  GateResult out;
  if (model.alpha() > 0.0) {
    const double lnPrice = std::log(mu) - std::log(model.alpha());
    out.allocation = allocationAtPrice(model, lnPrice, opts.maxIterations);
  }
  out.impliedBudget = out.allocation.total();
  out.allDeferred = true;
  for (PillarId id : kAllPillars) {
    out.verdicts[id] = out.allocation[id] > 0.0 ? Verdict::Fund : Verdict::Defer;
    if (out.verdicts[id] == Verdict::Fund) {
      out.allDeferred = false;
    }
  }
  return out;
}

}  // namespace sovai
