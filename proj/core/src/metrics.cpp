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

#include "posr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace posr {

namespace {

std::vector<int> DecisionStates(const InducedMdp& mdp) {
  std::vector<int> states;
  for (int h = 0; h < mdp.horizon; ++h)
    for (int s : mdp.layers[h]) states.push_back(s);
  std::sort(states.begin(), states.end());
  return states;
}

// V(s1) under the policy with swap rows applied on the fly:
// V(s) = sum_a pi(a|s) Q(s, phi(s, a)). A null swap means identity.
double ValueOfSwapped(const InducedMdp& mdp, const PolicyTable& policy,
                      const SwapFunction* phi, std::vector<double>& v_scratch,
                      std::vector<double>& q_scratch) {
  v_scratch.assign(mdp.num_states(), 0.0);
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    const auto& next_layer = mdp.layers[h + 1];
    for (int s : mdp.layers[h]) {
      for (int a = 0; a < mdp.action_count; ++a) {
        double q = mdp.loss[s][a];
        const auto& row = mdp.kernel[s][a];
        for (size_t k = 0; k < next_layer.size(); ++k)
          q += row[k] * v_scratch[next_layer[k]];
        q_scratch[a] = q;
      }
      double v = 0.0;
      if (phi == nullptr) {
        for (int a = 0; a < mdp.action_count; ++a)
          v += policy[s][a] * q_scratch[a];
      } else {
        for (int a = 0; a < mdp.action_count; ++a)
          v += policy[s][a] * q_scratch[phi->map[s][a]];
      }
      v_scratch[s] = v;
    }
  }
  return v_scratch[mdp.initial_state()];
}

double ValueOfDeterministic(const InducedMdp& mdp, const std::vector<int>& action,
                            std::vector<double>& v_scratch) {
  v_scratch.assign(mdp.num_states(), 0.0);
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    const auto& next_layer = mdp.layers[h + 1];
    for (int s : mdp.layers[h]) {
      const int a = action[s];
      double q = mdp.loss[s][a];
      const auto& row = mdp.kernel[s][a];
      for (size_t k = 0; k < next_layer.size(); ++k)
        q += row[k] * v_scratch[next_layer[k]];
      v_scratch[s] = q;
    }
  }
  return v_scratch[mdp.initial_state()];
}

// Advances a base-`radix` odometer over `digits`; most significant first,
// the last digit moves fastest (lexicographic enumeration order).
bool NextAssignment(std::vector<int>& digits, int radix) {
  for (int i = static_cast<int>(digits.size()) - 1; i >= 0; --i) {
    if (++digits[i] < radix) return true;
    digits[i] = 0;
  }
  return false;
}

std::vector<double> BaseValues(std::span<const InducedMdp> mdps,
                               std::span<const PolicyTable> policies) {
  std::vector<double> base(mdps.size());
  std::vector<double> v_scratch, q_scratch(mdps.empty() ? 0 : mdps[0].action_count);
  for (size_t t = 0; t < mdps.size(); ++t)
    base[t] = ValueOfSwapped(mdps[t], policies[t], nullptr, v_scratch, q_scratch);
  return base;
}

SwapFunction SwapFromDigits(const InducedMdp& mdp, const std::vector<int>& states,
                            const std::vector<int>& digits) {
  SwapFunction phi;
  phi.map.assign(mdp.num_states(), {});
  int cell = 0;
  for (int s : states) {
    phi.map[s].resize(mdp.action_count);
    for (int a = 0; a < mdp.action_count; ++a) phi.map[s][a] = digits[cell++];
  }
  return phi;
}

}  // namespace

uint64_t SwapFunctionCount(const InducedMdp& mdp) {
  const uint64_t cells =
      static_cast<uint64_t>(mdp.num_states() - 1) * mdp.action_count;
  uint64_t count = 1;
  for (uint64_t c = 0; c < cells; ++c) {
    if (count > (uint64_t{1} << 62) / mdp.action_count) return UINT64_MAX;
    count *= mdp.action_count;
  }
  return count;
}

uint64_t DeterministicPolicyCount(const InducedMdp& mdp) {
  uint64_t count = 1;
  for (int s = 0; s < mdp.num_states() - 1; ++s) {
    if (count > (uint64_t{1} << 62) / mdp.action_count) return UINT64_MAX;
    count *= mdp.action_count;
  }
  return count;
}

SwapRegretResult SwapRegretExact(std::span<const InducedMdp> mdps,
                                 std::span<const PolicyTable> policies,
                                 uint64_t cap) {
  POSR_CHECK(!mdps.empty(), "empty episode sequence");
  POSR_CHECK(mdps.size() == policies.size(), "one policy per episode required");
  const InducedMdp& shape = mdps[0];
  POSR_CHECK(SwapFunctionCount(shape) <= cap,
             "swap enumeration exceeds the cap; use SwapRegretLowerBound");

  const std::vector<int> states = DecisionStates(shape);
  const int d = shape.action_count;
  const std::vector<double> base = BaseValues(mdps, policies);

  std::vector<int> digits(states.size() * d, 0);
  std::vector<double> v_scratch, q_scratch(d);
  SwapFunction phi;
  phi.map.assign(shape.num_states(), {});
  for (int s : states) phi.map[s].assign(d, 0);

  SwapRegretResult best;
  bool first = true;
  do {
    int cell = 0;
    for (int s : states)
      for (int a = 0; a < d; ++a) phi.map[s][a] = digits[cell++];
    double total = 0.0;
    for (size_t t = 0; t < mdps.size(); ++t)
      total += base[t] - ValueOfSwapped(mdps[t], policies[t], &phi, v_scratch, q_scratch);
    if (first || total > best.value) {
      best.value = total;
      best.phi = phi;
      first = false;
    }
  } while (NextAssignment(digits, d));
  return best;
}

SwapRegretResult SwapRegretLowerBound(std::span<const InducedMdp> mdps,
                                      std::span<const PolicyTable> policies) {
  POSR_CHECK(!mdps.empty(), "empty episode sequence");
  const InducedMdp& shape = mdps[0];
  const std::vector<int> states = DecisionStates(shape);
  const int d = shape.action_count;
  const std::vector<double> base = BaseValues(mdps, policies);
  std::vector<double> v_scratch, q_scratch(d);

  auto total_of = [&](const SwapFunction& phi) {
    double total = 0.0;
    for (size_t t = 0; t < mdps.size(); ++t)
      total += base[t] - ValueOfSwapped(mdps[t], policies[t], &phi, v_scratch, q_scratch);
    return total;
  };

  SwapFunction phi;
  phi.map.assign(shape.num_states(), {});
  for (int s : states) {
    phi.map[s].resize(d);
    for (int a = 0; a < d; ++a) phi.map[s][a] = a;
  }
  SwapRegretResult best;
  best.lower_bound = true;
  best.phi = phi;
  best.value = total_of(phi);  // identity: 0 up to rounding

  for (int c = 0; c < d; ++c) {
    SwapFunction constant = phi;
    for (int s : states) std::fill(constant.map[s].begin(), constant.map[s].end(), c);
    const double v = total_of(constant);
    if (v > best.value) {
      best.value = v;
      best.phi = constant;
    }
  }

  // Greedy single-cell improvements from the incumbent.
  bool improved = true;
  int passes = 0;
  while (improved && passes++ < 64) {
    improved = false;
    for (int s : states) {
      for (int a = 0; a < d; ++a) {
        const int old = best.phi.map[s][a];
        for (int b = 0; b < d; ++b) {
          if (b == old) continue;
          best.phi.map[s][a] = b;
          const double v = total_of(best.phi);
          if (v > best.value + 1e-15) {
            best.value = v;
            improved = true;
          } else {
            best.phi.map[s][a] = old;
          }
        }
      }
    }
  }
  return best;
}

ExternalRegretResult ExternalRegretExact(std::span<const InducedMdp> mdps,
                                         std::span<const PolicyTable> policies,
                                         uint64_t cap) {
  POSR_CHECK(!mdps.empty(), "empty episode sequence");
  const InducedMdp& shape = mdps[0];
  POSR_CHECK(DeterministicPolicyCount(shape) <= cap,
             "policy enumeration exceeds the cap");
  const std::vector<int> states = DecisionStates(shape);
  const int d = shape.action_count;
  const std::vector<double> base = BaseValues(mdps, policies);
  double base_total = 0.0;
  for (double b : base) base_total += b;

  std::vector<int> digits(states.size(), 0);
  std::vector<int> action(shape.num_states(), -1);
  std::vector<double> v_scratch;
  double best_total = 0.0;
  std::vector<int> best_action;
  bool first = true;
  do {
    for (size_t k = 0; k < states.size(); ++k) action[states[k]] = digits[k];
    double total = 0.0;
    for (size_t t = 0; t < mdps.size(); ++t)
      total += ValueOfDeterministic(mdps[t], action, v_scratch);
    if (first || total < best_total) {
      best_total = total;
      best_action = action;
      first = false;
    }
  } while (NextAssignment(digits, d));

  ExternalRegretResult result;
  result.value = base_total - best_total;
  result.argmax_policy = best_action;
  return result;
}

std::vector<InducedMdp> EpisodeMdps(const MarkovGame& game,
                                    std::span<const std::vector<PolicyTable>> profiles,
                                    int player) {
  std::vector<InducedMdp> mdps;
  mdps.reserve(profiles.size());
  for (const auto& profile : profiles)
    mdps.push_back(InduceMdp(game, profile, player));
  return mdps;
}

double MixtureCeGain(std::span<const InducedMdp> mdps,
                     std::span<const PolicyTable> policies, uint64_t cap) {
  POSR_CHECK(!mdps.empty(), "empty mixture");
  const InducedMdp& shape = mdps[0];
  POSR_CHECK(SwapFunctionCount(shape) <= cap, "swap enumeration exceeds the cap");
  const std::vector<int> states = DecisionStates(shape);
  const int d = shape.action_count;
  const std::vector<double> base = BaseValues(mdps, policies);

  std::vector<int> digits(states.size() * d, 0);
  std::vector<double> v_scratch, q_scratch(d);
  double best = 0.0;
  bool first = true;
  do {
    SwapFunction phi = SwapFromDigits(shape, states, digits);
    double total = 0.0;
    for (size_t t = 0; t < mdps.size(); ++t)
      total += base[t] - ValueOfSwapped(mdps[t], policies[t], &phi, v_scratch, q_scratch);
    const double gain = total / static_cast<double>(mdps.size());
    if (first || gain > best) {
      best = gain;
      first = false;
    }
  } while (NextAssignment(digits, d));
  return best;
}

double DecompositionResidual(std::span<const InducedMdp> mdps,
                             std::span<const PolicyTable> policies,
                             const SwapFunction& phi) {
  double direct = 0.0;
  double decomposed = 0.0;
  for (size_t t = 0; t < mdps.size(); ++t) {
    const InducedMdp& mdp = mdps[t];
    const ValueTables vt = Evaluate(mdp, policies[t]);
    const PolicyTable swapped = ApplySwap(policies[t], phi);
    std::vector<double> v_scratch, q_scratch(mdp.action_count);
    direct += vt.v[mdp.initial_state()] -
              ValueOfSwapped(mdp, policies[t], &phi, v_scratch, q_scratch);
    const OccupancyMeasure occ = Occupancy(mdp, swapped);
    for (int h = 0; h < mdp.horizon; ++h) {
      for (int s : mdp.layers[h]) {
        double inner = 0.0;
        for (int a = 0; a < mdp.action_count; ++a)
          inner += vt.q[s][a] * (policies[t][s][a] - swapped[s][a]);
        decomposed += occ.q[s] * inner;
      }
    }
  }
  return std::abs(direct - decomposed);
}

double BanditSwapRegret(std::span<const std::vector<double>> losses,
                        std::span<const std::vector<double>> strategies) {
  POSR_CHECK(losses.size() == strategies.size(), "sequence length mismatch");
  POSR_CHECK(!losses.empty(), "empty sequence");
  const int d = static_cast<int>(losses[0].size());
  // C[a][b] = sum_t x_t(a) * l_t(b); the best swap sends a to argmin_b C[a][b].
  std::vector<std::vector<double>> c(d, std::vector<double>(d, 0.0));
  for (size_t t = 0; t < losses.size(); ++t)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) c[a][b] += strategies[t][a] * losses[t][b];
  double regret = 0.0;
  for (int a = 0; a < d; ++a)
    regret += c[a][a] - *std::min_element(c[a].begin(), c[a].end());
  return regret;
}

double WeightedRegret(std::span<const std::vector<double>> iterates,
                      std::span<const std::vector<double>> losses,
                      std::span<const double> weights,
                      std::span<const double> comparator) {
  POSR_CHECK(iterates.size() == losses.size() && iterates.size() == weights.size(),
             "sequence length mismatch");
  double total = 0.0;
  for (size_t t = 0; t < iterates.size(); ++t) {
    double inner = 0.0;
    for (size_t a = 0; a < comparator.size(); ++a)
      inner += (iterates[t][a] - comparator[a]) * losses[t][a];
    total += weights[t] * inner;
  }
  return total;
}

// ---- Theorem right-hand sides ------------------------------------------

double Thm31Rhs(int H, int S, int A, int m, double gamma, double epsilon, int T) {
  const double lg = std::log(1.0 / gamma);
  return 1e4 * std::pow(H, 4) * S * std::pow(A, 3) * m * m * std::sqrt(lg) /
             gamma * std::sqrt(static_cast<double>(T)) +
         600.0 * m * H * std::sqrt(static_cast<double>(S)) * std::pow(A, 1.5) /
             gamma * epsilon * T +
         2.0 * gamma * A * H * H * T +
         150.0 * m * H * H * std::pow(S, 1.5) * std::pow(A, 3.5) * lg;
}

double Thm34Rhs(int H, int S, int Ai, int Amax, int m, double gamma, double eta,
                double epsilon, int T, double path1_all, double path2_all) {
  const double lg = std::log(1.0 / gamma);
  const double err = 4.0 * eta * epsilon * epsilon * S * T + epsilon * H * T +
                     2.0 * gamma * Amax * H * (H + epsilon) * T;
  return S * Ai * Ai * lg / eta + 3.0 * Ai * H * H / (eta * gamma) * path1_all +
         4.0 * eta * m * S * Ai * std::pow(H, 4) * path2_all + err;
}

double Thm35Rhs(int H, int S, int A, int m, double gamma, double epsilon, int T) {
  return 768.0 * S * std::pow(A, 3) * m * std::log(1.0 / gamma) +
         4.0 * epsilon * epsilon * T / (m * std::pow(H, 4));
}

double Thm37Rhs(int H, int Ai, int m, double gamma, double eta, double epsilon,
                int T, double path2_all, double state_l1_path2) {
  return Ai * Ai * std::log(1.0 / gamma) / eta +
         36.0 * eta * epsilon * epsilon * T +
         4.0 * std::pow(H, 4) * m * eta * path2_all -
         state_l1_path2 / (576.0 * eta * Ai);
}

double ThmF1Rhs(int H, int A, int m, double gamma, double eta, double epsilon,
                int T, double path2_all) {
  return A * A * std::log(1.0 / gamma) / eta +
         24.0 * eta * std::pow(H, 4) * A * m * path2_all + epsilon * H * T +
         8.0 * eta * epsilon * epsilon * T;
}

double CorF3Rhs(int H, int S, int A, int m, int T) {
  return 288.0 * H * H * std::pow(S, 1.5) * std::pow(A, 3.5) * m *
         std::log(static_cast<double>(T));
}

double DefaultEta(int H, int m, int S, int A) {
  return 1.0 / (96.0 * H * H * m * std::sqrt(static_cast<double>(S) * A));
}

std::vector<ResidualRow> BoundResiduals(const BoundCheckInput& in) {
  std::vector<ResidualRow> rows;
  const double eta_default = DefaultEta(in.H, in.m, in.S, in.A);
  const bool eta_is_default =
      std::abs(in.eta - eta_default) <= 1e-12 * eta_default;
  const bool gamma_ok = in.gamma <= 1.0 / (2.0 * in.A) + 1e-15;

  double path1_all = 0.0, path2_all = 0.0;
  for (double v : in.path1) path1_all += v;
  for (double v : in.path2) path2_all += v;

  if (!in.independent_transitions) {
    for (int i = 0; i < in.m; ++i) {
      ResidualRow row;
      row.name = "swap_regret_sqrtT_bound";
      row.player = i;
      row.lhs = in.swap_regrets[i];
      row.rhs = Thm31Rhs(in.H, in.S, in.A, in.m, in.gamma, in.epsilon, in.T);
      if (in.H < 2) {
        row.applicable = false;
        row.note = "requires H >= 2";
      } else if (!gamma_ok) {
        row.applicable = false;
        row.note = "requires gamma <= 1/(2A)";
      } else if (!eta_is_default) {
        row.applicable = false;
        row.note = "requires eta = 1/(96 H^2 m sqrt(SA))";
      }
      rows.push_back(row);
    }
    for (int i = 0; i < in.m; ++i) {
      ResidualRow row;
      row.name = "swap_regret_path_length_bound";
      row.player = i;
      row.lhs = in.swap_regrets[i];
      row.rhs = Thm34Rhs(in.H, in.S, in.action_counts[i], in.A, in.m, in.gamma,
                         in.eta, in.epsilon, in.T, path1_all, path2_all);
      if (in.H < 2) {
        row.applicable = false;
        row.note = "requires H >= 2";
      } else if (in.gamma > 1.0 / (2.0 * in.action_counts[i]) + 1e-15) {
        row.applicable = false;
        row.note = "requires gamma <= 1/(2 A_i)";
      }
      rows.push_back(row);
    }
  } else {
    for (int i = 0; i < in.m; ++i) {
      ResidualRow row;
      row.name = "independent_swap_regret_bound";
      row.player = i;
      row.lhs = in.swap_regrets[i];
      row.rhs = ThmF1Rhs(in.H, in.A, in.m, in.gamma, in.eta, in.epsilon, in.T,
                         path2_all);
      if (in.H < 2) {
        row.applicable = false;
        row.note = "requires H >= 2";
      } else if (!gamma_ok) {
        row.applicable = false;
        row.note = "requires gamma <= 1/(2A)";
      }
      rows.push_back(row);
    }
    for (int i = 0; i < in.m; ++i) {
      ResidualRow row;
      row.name = "independent_logT_bound";
      row.player = i;
      row.lhs = in.swap_regrets[i];
      row.rhs = CorF3Rhs(in.H, in.S, in.A, in.m, in.T);
      const bool gamma_is_one_over_T =
          std::abs(in.gamma - 1.0 / in.T) <= 1e-15 / in.T + 1e-18;
      if (in.H < 2) {
        row.applicable = false;
        row.note = "requires H >= 2";
      } else if (!gamma_is_one_over_T) {
        row.applicable = false;
        row.note = "requires gamma = 1/T";
      } else if (!eta_is_default) {
        row.applicable = false;
        row.note = "requires eta = 1/(96 H^2 m sqrt(SA))";
      } else if (in.T < 2 * in.A) {
        row.applicable = false;
        row.note = "requires T >= 2A";
      } else if (in.epsilon != 0.0) {
        row.applicable = false;
        row.note = "requires full information (epsilon = 0)";
      }
      rows.push_back(row);
    }
  }

  {
    ResidualRow row;
    row.name = "path_length_bound";
    row.lhs = path2_all;
    row.rhs = Thm35Rhs(in.H, in.S, in.A, in.m, in.gamma, in.epsilon, in.T);
    if (!eta_is_default) {
      row.applicable = false;
      row.note = "requires eta = 1/(96 H^2 m sqrt(SA))";
    }
    rows.push_back(row);
  }

  if (!in.state_swap_regret.empty()) {
    for (int i = 0; i < in.m; ++i) {
      for (size_t k = 0; k < in.state_swap_regret[i].size(); ++k) {
        ResidualRow row;
        row.name = "state_rvu_bound[s=" + std::to_string(k) + "]";
        row.player = i;
        row.lhs = in.state_swap_regret[i][k];
        row.rhs = Thm37Rhs(in.H, in.action_counts[i], in.m, in.gamma, in.eta,
                           in.epsilon, in.T, path2_all, in.state_l1_path2[i][k]);
        if (in.eta > 1.0 / (128.0 * in.H) + 1e-15) {
          row.applicable = false;
          row.note = "requires eta <= 1/(128 H)";
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

// ---- Report rows ---------------------------------------------------------

namespace {
std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string RegretReportCsv(std::span<const RegretCheckpointRow> rows,
                            std::span<const std::string> header_comments) {
  std::ostringstream os;
  for (const auto& c : header_comments) os << "# " << c << "\n";
  os << "checkpoint_episode,player,swap_regret,external_regret,ce_gap,path1,path2\n";
  for (const auto& r : rows) {
    os << r.episode << ',' << r.player << ',' << FormatDouble(r.swap_regret)
       << ',' << FormatDouble(r.external_regret) << ',' << FormatDouble(r.ce_gap)
       << ',' << FormatDouble(r.path1) << ',' << FormatDouble(r.path2) << "\n";
  }
  return os.str();
}

std::string ResidualTableText(std::span<const ResidualRow> rows) {
  std::ostringstream os;
  os << "bound residuals (residual = rhs - lhs; must be >= 0 when applicable)\n";
  for (const auto& r : rows) {
    os << "  " << r.name;
    if (r.player >= 0) os << " player=" << r.player;
    os << " lhs=" << FormatDouble(r.lhs) << " rhs=" << FormatDouble(r.rhs)
       << " residual=" << FormatDouble(r.residual());
    if (!r.applicable) os << " [not applicable: " << r.note << "]";
    os << "\n";
  }
  return os.str();
}

}  // namespace posr
