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

#ifndef POSR_SIMPLEX_H_
#define POSR_SIMPLEX_H_

#include <span>
#include <vector>

namespace posr {

// Points of the gamma-truncated simplex: x in Delta_d, x(a) >= gamma.
using TruncatedPoint = std::vector<double>;

// R(x) = sum_a log(1/x(a)) over the truncated simplex.
double LogBarrier(std::span<const double> x);

// D_R(x, y) = sum_a log(y(a)/x(a)) + (x(a) - y(a)) / y(a). Nonnegative,
// zero iff x == y; finite on the truncated simplex.
double LogBarrierDivergence(std::span<const double> x, std::span<const double> y);

struct LocalNorms {
  double primal = 0.0;  // sqrt(sum v(a)^2 / x(a)^2)
  double dual = 0.0;    // sqrt(sum v(a)^2 * x(a)^2)
};
LocalNorms ComputeLocalNorms(std::span<const double> v, std::span<const double> x);

double LocalPrimalNorm(std::span<const double> v, std::span<const double> x);
double LocalDualNorm(std::span<const double> v, std::span<const double> x);

// argmin_{x in Delta_d^gamma} eta <g, x> + D_R(x, y), solved by bisection on
// the KKT multiplier: x(a; lambda) = clamp(1 / (eta g(a) + 1/y(a) + lambda),
// gamma, 1 - (d-1) gamma), with sum_a x(a; lambda) nonincreasing in lambda.
struct ProxResult {
  TruncatedPoint x;
  double lambda = 0.0;
  // |sum x - 1|; the clamp form holds exactly by construction, so this is
  // the whole KKT residual.
  double kkt_residual = 0.0;
  int iterations = 0;
};

ProxResult BregmanProx(std::span<const double> y, std::span<const double> g,
                       double eta, double gamma);

// Uniform point, the log-barrier minimizer over Delta_d^gamma by symmetry.
TruncatedPoint UniformPoint(int d);

// If numerical noise pushed entries below gamma (by ~1 ulp after a solve),
// raise them to exactly gamma and take the mass from the largest entry.
void SnapToTruncated(TruncatedPoint& x, double gamma);

// FTRL argmins over the full simplex for the scripted-environment baseline.
// Entropy: softmax(-eta * cumulative). Log-barrier: scalar search on the
// multiplier, interior solution.
std::vector<double> FtrlArgminEntropy(std::span<const double> cumulative, double eta);
std::vector<double> FtrlArgminLogBarrier(std::span<const double> cumulative, double eta);

}  // namespace posr

#endif  // POSR_SIMPLEX_H_
