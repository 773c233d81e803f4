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

#include "posr/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace posr {

void OomdStep(OomdBase& base, std::span<const double> loss, double eta,
              double gamma) {
  ProxResult tilde = BregmanProx(base.intermediate, loss, eta, gamma);
  ProxResult next = BregmanProx(tilde.x, loss, eta, gamma);
  base.intermediate = std::move(tilde.x);
  base.primary = std::move(next.x);
  base.prev_loss.assign(loss.begin(), loss.end());
}

namespace {

constexpr double kStationaryResidualTol = 1e-10;
constexpr double kPowerIterationTol = 1e-12;
constexpr int kPowerIterationCap = 100000;

double StationaryResidual(const std::vector<TruncatedPoint>& rows,
                          const TruncatedPoint& pi) {
  const int d = static_cast<int>(rows.size());
  double worst = 0.0;
  for (int a2 = 0; a2 < d; ++a2) {
    double v = 0.0;
    for (int a = 0; a < d; ++a) v += pi[a] * rows[a][a2];
    worst = std::max(worst, std::abs(v - pi[a2]));
  }
  return worst;
}

// Gaussian elimination with partial pivoting; d is tiny (<= action count).
bool SolveDense(std::vector<std::vector<double>> m, std::vector<double> b,
                std::vector<double>& out) {
  const int d = static_cast<int>(b.size());
  for (int col = 0; col < d; ++col) {
    int pivot = col;
    for (int r = col + 1; r < d; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    if (std::abs(m[pivot][col]) < 1e-300) return false;
    std::swap(m[pivot], m[col]);
    std::swap(b[pivot], b[col]);
    for (int r = col + 1; r < d; ++r) {
      const double f = m[r][col] / m[col][col];
      if (f == 0.0) continue;
      for (int c2 = col; c2 < d; ++c2) m[r][c2] -= f * m[col][c2];
      b[r] -= f * b[col];
    }
  }
  out.assign(d, 0.0);
  for (int r = d - 1; r >= 0; --r) {
    double v = b[r];
    for (int c2 = r + 1; c2 < d; ++c2) v -= m[r][c2] * out[c2];
    out[r] = v / m[r][r];
  }
  return true;
}

TruncatedPoint PowerIteration(const std::vector<TruncatedPoint>& rows,
                              int* iterations) {
  const int d = static_cast<int>(rows.size());
  TruncatedPoint pi = UniformPoint(d);
  TruncatedPoint next(d);
  for (int it = 0; it < kPowerIterationCap; ++it) {
    double sum = 0.0;
    for (int a2 = 0; a2 < d; ++a2) {
      double v = 0.0;
      for (int a = 0; a < d; ++a) v += pi[a] * rows[a][a2];
      next[a2] = v;
      sum += v;
    }
    double change = 0.0;
    for (int a2 = 0; a2 < d; ++a2) {
      next[a2] /= sum;
      change = std::max(change, std::abs(next[a2] - pi[a2]));
    }
    pi.swap(next);
    if (change <= kPowerIterationTol) {
      if (iterations) *iterations = it + 1;
      return pi;
    }
  }
  if (iterations) *iterations = kPowerIterationCap;
  return pi;
}

}  // namespace

StationaryResult StationaryDistribution(const std::vector<TruncatedPoint>& rows) {
  const int d = static_cast<int>(rows.size());
  POSR_CHECK(d >= 1, "no rows");
  double floor = 1.0;
  for (const auto& row : rows) {
    POSR_CHECK(static_cast<int>(row.size()) == d, "rows must form a square matrix");
    for (double v : row) floor = std::min(floor, v);
  }
  POSR_CHECK(floor > 0.0, "rows must be strictly positive (truncated simplex)");

  StationaryResult result;
  if (d == 1) {
    result.pi = {1.0};
    return result;
  }

  // Normal equations of the stacked system A = [B^T - I; 1^T], b = e_{d+1}.
  std::vector<std::vector<double>> a(d + 1, std::vector<double>(d, 0.0));
  for (int r = 0; r < d; ++r) {
    for (int c2 = 0; c2 < d; ++c2) a[r][c2] = rows[c2][r] - (r == c2 ? 1.0 : 0.0);
  }
  for (int c2 = 0; c2 < d; ++c2) a[d][c2] = 1.0;
  std::vector<std::vector<double>> n(d, std::vector<double>(d, 0.0));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double v = 0.0;
      for (int r = 0; r <= d; ++r) v += a[r][i] * a[r][j];
      n[i][j] = v;
    }
  }
  std::vector<double> rhs(d, 1.0);  // A^T e_{d+1}

  bool solved = SolveDense(n, rhs, result.pi);
  if (solved) {
    double sum = 0.0;
    for (double v : result.pi) sum += v;
    if (sum > 0.0) {
      for (double& v : result.pi) v /= sum;
    } else {
      solved = false;
    }
  }
  if (solved) result.residual = StationaryResidual(rows, result.pi);

  if (!solved || result.residual > kPowerIterationTol * 10) {
    int iters = 0;
    TruncatedPoint pi = PowerIteration(rows, &iters);
    const double res = StationaryResidual(rows, pi);
    if (!solved || res < result.residual) {
      result.pi = std::move(pi);
      result.residual = res;
      result.used_power_iteration = true;
    }
  }
  POSR_CHECK(result.residual <= kStationaryResidualTol,
             "stationary solve residual above tolerance after fallback");

  // Entries inherit the rows' floor exactly; repair sub-ulp undershoot.
  SnapToTruncated(result.pi, floor);
  return result;
}

AgentSpace AgentSpaceFor(const MarkovGame& game, int player) {
  AgentSpace space;
  space.num_states = game.num_states();
  space.horizon = game.horizon;
  space.action_count = game.action_counts[player];
  for (int h = 0; h < game.horizon; ++h)
    for (int s : game.layers[h]) space.decision_states.push_back(s);
  std::sort(space.decision_states.begin(), space.decision_states.end());
  return space;
}

PosrAgent::PosrAgent(AgentSpace space, int player, double gamma, double eta)
    : space_(std::move(space)), player_(player), gamma_(gamma), eta_(eta) {
  const int d = space_.action_count;
  POSR_CHECK(gamma_ > 0.0 && gamma_ <= 1.0 / (2.0 * d) + 1e-15,
             "gamma must satisfy gamma <= 1/(2 A_i)");
  POSR_CHECK(eta_ > 0.0, "step size must be positive");
  bases_.assign(space_.num_states, {});
  policy_.assign(space_.num_states, {});
  for (int s : space_.decision_states) {
    bases_[s].assign(d, OomdBase::Init(d));
    policy_[s] = UniformPoint(d);
  }
}

void PosrAgent::Update(const std::vector<std::vector<double>>& q_hat) {
  const int d = space_.action_count;
  std::vector<double> g(d);
  std::vector<TruncatedPoint> rows(d);
  last_combine_residual_ = 0.0;
  for (int s : space_.decision_states) {
    POSR_CHECK(static_cast<int>(q_hat[s].size()) == d,
               "q_hat row has wrong action count");
    for (double v : q_hat[s])
      POSR_CHECK(std::isfinite(v) && v >= 0.0, "q_hat entries must be finite and >= 0");
    for (int a = 0; a < d; ++a) {
      const double scale = policy_[s][a];
      for (int a2 = 0; a2 < d; ++a2) g[a2] = scale * q_hat[s][a2];
      OomdStep(bases_[s][a], g, eta_, gamma_);
      rows[a] = bases_[s][a].primary;
    }
    StationaryResult combined = StationaryDistribution(rows);
    last_combine_residual_ = std::max(last_combine_residual_, combined.residual);
    policy_[s] = std::move(combined.pi);
  }
}

FtrlAgent::FtrlAgent(AgentSpace space, double eta, FtrlRegularizer reg)
    : space_(std::move(space)), eta_(eta), reg_(reg) {
  const int d = space_.action_count;
  cumulative_.assign(space_.num_states, {});
  policy_.assign(space_.num_states, {});
  for (int s : space_.decision_states) {
    cumulative_[s].assign(d, 0.0);
    policy_[s] = UniformPoint(d);
  }
}

void FtrlAgent::Update(const std::vector<std::vector<double>>& q_hat) {
  const int d = space_.action_count;
  for (int s : space_.decision_states) {
    for (int a = 0; a < d; ++a) cumulative_[s][a] += q_hat[s][a];
    policy_[s] = reg_ == FtrlRegularizer::kEntropy
                     ? FtrlArgminEntropy(cumulative_[s], eta_)
                     : FtrlArgminLogBarrier(cumulative_[s], eta_);
  }
}

}  // namespace posr
