// Copyright 2026 The POSR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "posr/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "posr/game.hpp"

namespace posr {

double LogBarrier(std::span<const double> x) {
  double r = 0.0;
  for (double v : x) r -= std::log(v);
  return r;
}

double LogBarrierDivergence(std::span<const double> x, std::span<const double> y) {
  POSR_CHECK(x.size() == y.size(), "divergence of points of different dimension");
  double d = 0.0;
  for (size_t a = 0; a < x.size(); ++a) {
    d += std::log(y[a] / x[a]) + (x[a] - y[a]) / y[a];
  }
  return d;
}

LocalNorms ComputeLocalNorms(std::span<const double> v, std::span<const double> x) {
  LocalNorms n;
  double p = 0.0, q = 0.0;
  for (size_t a = 0; a < v.size(); ++a) {
    const double r = v[a] / x[a];
    p += r * r;
    const double s = v[a] * x[a];
    q += s * s;
  }
  n.primal = std::sqrt(p);
  n.dual = std::sqrt(q);
  return n;
}

double LocalPrimalNorm(std::span<const double> v, std::span<const double> x) {
  return ComputeLocalNorms(v, x).primal;
}

double LocalDualNorm(std::span<const double> v, std::span<const double> x) {
  return ComputeLocalNorms(v, x).dual;
}

namespace {

constexpr int kProxMaxIterations = 200;
constexpr double kProxSumTol = 1e-12;

double ClampCoordinate(double c, double lambda, double lo, double hi) {
  const double denom = c + lambda;
  // denom <= 1/hi means the unconstrained coordinate would exceed the cap
  // (including denom <= 0, where the barrier pushes the coordinate up).
  if (denom <= 1.0 / hi) return hi;
  return std::max(lo, std::min(hi, 1.0 / denom));
}

double CoordinateSum(std::span<const double> c, double lambda, double lo, double hi) {
  double s = 0.0;
  for (double ci : c) s += ClampCoordinate(ci, lambda, lo, hi);
  return s;
}

// Derivative of the unclamped coordinate sum; used for the Newton polish.
double CoordinateSumSlope(std::span<const double> c, double lambda, double lo,
                          double hi) {
  double s = 0.0;
  for (double ci : c) {
    const double x = ClampCoordinate(ci, lambda, lo, hi);
    if (x > lo && x < hi) s += x * x;
  }
  return s;
}

}  // namespace

ProxResult BregmanProx(std::span<const double> y, std::span<const double> g,
                       double eta, double gamma) {
  const int d = static_cast<int>(y.size());
  POSR_CHECK(d >= 1, "empty point");
  POSR_CHECK(g.size() == y.size(), "loss vector of wrong dimension");
  POSR_CHECK(gamma > 0.0 && gamma <= 1.0 / (2.0 * d) + 1e-15,
             "gamma must lie in (0, 1/(2d)]");
  POSR_CHECK(eta >= 0.0, "negative learning rate");
  for (double v : g) POSR_CHECK(std::isfinite(v) && v >= 0.0, "losses must be finite and nonnegative");

  ProxResult result;
  const double lo = gamma;
  const double hi = 1.0 - (d - 1) * gamma;

  // Constant losses do not move the argmin: the objective reduces to
  // D_R(x, y), minimized at the feasible point y itself.
  const auto [gmin_it, gmax_it] = std::minmax_element(g.begin(), g.end());
  if (*gmin_it == *gmax_it) {
    result.x.assign(y.begin(), y.end());
    result.lambda = -eta * *gmin_it;
    result.kkt_residual = 0.0;
    return result;
  }

  std::vector<double> c(d);
  double cmin = std::numeric_limits<double>::infinity();
  for (int a = 0; a < d; ++a) {
    c[a] = eta * g[a] + 1.0 / y[a];
    cmin = std::min(cmin, c[a]);
  }

  // S(lambda) >= hi + (d-1) lo = 1 at the left end, = d*gamma < 1 at the right.
  double lo_lambda = -cmin;
  double hi_lambda = 1.0 / gamma - cmin;
  double lambda = 0.5 * (lo_lambda + hi_lambda);
  double best_lambda = lambda;
  double best_err = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < kProxMaxIterations; ++it) {
    lambda = 0.5 * (lo_lambda + hi_lambda);
    const double s = CoordinateSum(c, lambda, lo, hi);
    const double err = std::abs(s - 1.0);
    if (err < best_err) {
      best_err = err;
      best_lambda = lambda;
    }
    if (err <= kProxSumTol) break;
    if (s > 1.0) {
      lo_lambda = lambda;
    } else {
      hi_lambda = lambda;
    }
    if (lo_lambda == hi_lambda) break;
  }
  lambda = best_lambda;

  // Newton polish inside the active set; bisection already landed close.
  for (int k = 0; k < 3; ++k) {
    const double s = CoordinateSum(c, lambda, lo, hi);
    if (std::abs(s - 1.0) <= best_err) {
      best_err = std::abs(s - 1.0);
      best_lambda = lambda;
    }
    const double slope = CoordinateSumSlope(c, lambda, lo, hi);
    if (slope <= 0.0) break;
    lambda += (s - 1.0) / slope;
  }
  {
    const double s = CoordinateSum(c, lambda, lo, hi);
    if (std::abs(s - 1.0) > best_err) lambda = best_lambda;
  }

  result.lambda = lambda;
  result.iterations = it + 1;
  result.x.resize(d);
  double sum = 0.0;
  for (int a = 0; a < d; ++a) {
    result.x[a] = ClampCoordinate(c[a], lambda, lo, hi);
    sum += result.x[a];
  }
  result.kkt_residual = std::abs(sum - 1.0);
  POSR_CHECK(result.kkt_residual <= 1e-9,
             "prox multiplier search failed to converge");
  return result;
}

TruncatedPoint UniformPoint(int d) {
  return TruncatedPoint(d, 1.0 / d);
}

void SnapToTruncated(TruncatedPoint& x, double gamma) {
  double deficit = 0.0;
  size_t largest = 0;
  for (size_t a = 0; a < x.size(); ++a) {
    if (x[a] < gamma) {
      deficit += gamma - x[a];
      x[a] = gamma;
    }
    if (x[a] > x[largest]) largest = a;
  }
  if (deficit > 0.0) x[largest] -= deficit;
}

std::vector<double> FtrlArgminEntropy(std::span<const double> cumulative, double eta) {
  const double lmin = *std::min_element(cumulative.begin(), cumulative.end());
  std::vector<double> x(cumulative.size());
  double z = 0.0;
  for (size_t a = 0; a < x.size(); ++a) {
    x[a] = std::exp(-eta * (cumulative[a] - lmin));
    z += x[a];
  }
  for (double& v : x) v /= z;
  return x;
}

std::vector<double> FtrlArgminLogBarrier(std::span<const double> cumulative,
                                         double eta) {
  const int d = static_cast<int>(cumulative.size());
  const double lmin = *std::min_element(cumulative.begin(), cumulative.end());
  std::vector<double> delta(d);
  for (int a = 0; a < d; ++a) delta[a] = eta * (cumulative[a] - lmin);

  // x(a) = 1 / (delta(a) + lambda); the minimizing coordinate contributes
  // exactly 1/lambda, so [1, d] brackets sum = 1.
  double lo = 1.0, hi = static_cast<double>(d);
  double lambda = 1.0;
  for (int it = 0; it < kProxMaxIterations; ++it) {
    lambda = 0.5 * (lo + hi);
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += 1.0 / (delta[a] + lambda);
    if (std::abs(s - 1.0) <= kProxSumTol) break;
    if (s > 1.0) {
      lo = lambda;
    } else {
      hi = lambda;
    }
  }
  std::vector<double> x(d);
  double sum = 0.0;
  for (int a = 0; a < d; ++a) {
    x[a] = 1.0 / (delta[a] + lambda);
    sum += x[a];
  }
  for (double& v : x) v /= sum;
  return x;
}

}  // namespace posr
