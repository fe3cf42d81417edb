#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "netbf/types.hpp"

namespace netbf {

/// phi = |f| sqrt(1 + |f|^2 P0) / (|g| sqrt(Pj)). Relays with the largest phi
/// are the ones pushed to full power. Empty when the relay is degenerate
/// (|g| = 0 or Pj = 0); the caller excludes such relays.
inline std::optional<double> phi_statistic(double f_mag, double g_mag, double P0, double Pj) {
  if (!(g_mag > 0.0) || !(Pj > 0.0)) return std::nullopt;
  return f_mag * std::sqrt(1.0 + f_mag * f_mag * P0) / (g_mag * std::sqrt(Pj));
}

/// Receive SNR of the second step with match-filtered phases:
///   P0 (beta0 |f0| + alpha0 sum alpha_i |f_i g_i| sqrt(P_i / (1 + alpha0^2 |f_i|^2 P0)))^2
///   / (1 + sum alpha_i^2 |g_i|^2 P_i / (1 + alpha0^2 |f_i|^2 P0))
inline double second_step_snr(const ChannelRealization& ch, const PowerBudget& budget, double alpha0,
                              double beta0, const std::vector<double>& alpha, double f0_mag) {
  double signal = beta0 * f0_mag;
  double noise = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] == 0.0) continue;
    const double fm = std::abs(ch.f[i]);
    const double gm = std::abs(ch.g[i]);
    const double amp2 = budget.P[i] / (1.0 + alpha0 * alpha0 * fm * fm * budget.P0);
    signal += alpha0 * alpha[i] * fm * gm * std::sqrt(amp2);
    noise += alpha[i] * alpha[i] * gm * gm * amp2;
  }
  return budget.P0 * signal * signal / noise;
}

inline double second_step_snr(const ChannelRealization& ch, const PowerBudget& budget, double alpha0,
                              double beta0, const std::vector<double>& alpha) {
  return second_step_snr(ch, budget, alpha0, beta0, alpha, ch.f0_mag());
}

/// Receive SNR of the network without a direct link at full transmitter power.
inline double receive_snr_no_dl(const ChannelRealization& ch, const PowerBudget& budget,
                                const std::vector<double>& alpha) {
  check_channel(ch);
  check_box(alpha, ch.relay_count());
  return second_step_snr(ch, budget, 1.0, 0.0, alpha);
}

/// Per-relay quantities of the no-DL problem plus the threshold scan.
/// a_j = |g_j| sqrt(P_j) / sqrt(1 + |f_j|^2 P0), c_j = |f_j|, b_j = a_j c_j,
/// phi_j = c_j / a_j. tau lists the active relays by descending phi (ties by
/// ascending index); lambda[i] is the scan value after taking the first i of
/// them (lambda[0] is +inf without a direct-link offset).
struct SolverWorkspace {
  std::vector<double> a, b, c, phi;
  std::vector<bool> active;
  std::vector<std::size_t> tau;
  std::vector<double> lambda;
  /// Direct-link offset in the signal term (sqrt(1 - alpha0^2) |f0|); zero
  /// for the network without a direct link.
  double offset = 0.0;
  std::size_t i0 = 0;

  std::size_t relay_count() const { return a.size(); }

  /// phi of the k-th ordered relay (0-based); the sentinel k == tau.size() is 0.
  double ordered_phi(std::size_t k) const { return k < tau.size() ? phi[tau[k]] : 0.0; }
};

namespace detail {

/// Fills tau and lambda and picks i0: the smallest i with
/// lambda_i < 1 / phi_{tau_{i+1}}, tested as sa * phi < sb to avoid dividing.
inline void threshold_scan(SolverWorkspace& ws) {
  const std::size_t R = ws.relay_count();
  ws.tau.clear();
  for (std::size_t j = 0; j < R; ++j)
    if (ws.active[j]) ws.tau.push_back(j);
  std::stable_sort(ws.tau.begin(), ws.tau.end(),
                   [&](std::size_t l, std::size_t r) { return ws.phi[l] > ws.phi[r]; });

  const std::size_t n = ws.tau.size();
  ws.lambda.assign(n + 1, std::numeric_limits<double>::infinity());
  double sa = 1.0;
  double sb = ws.offset;
  bool found = false;
  ws.i0 = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    if (sb > 0.0) ws.lambda[i] = sa / sb;
    if (!found && sb > 0.0 && sa * ws.ordered_phi(i) < sb) {
      ws.i0 = i;
      found = true;
    }
    if (i < n) {
      sa += ws.a[ws.tau[i]] * ws.a[ws.tau[i]];
      sb += ws.b[ws.tau[i]];
    }
  }
  // Only reachable with no active relay and no offset.
  if (!found) ws.i0 = 0;
}

/// Candidate vector x^(i): ones on the first i ordered relays, lambda_i phi_j
/// on the rest, zero on inactive relays.
inline std::vector<double> candidate_vector(const SolverWorkspace& ws, std::size_t i) {
  std::vector<double> x(ws.relay_count(), 0.0);
  const double lam = ws.lambda[i];
  for (std::size_t k = 0; k < ws.tau.size(); ++k) {
    const std::size_t j = ws.tau[k];
    x[j] = k < i ? 1.0 : std::min(1.0, lam * ws.phi[j]);
  }
  return x;
}

}  // namespace detail

/// Workspace for a fixed transmitter split: a_j = |g_j| sqrt(P_j) /
/// sqrt(1 + alpha0^2 |f_j|^2 P0), c_j = alpha0 |f_j|, offset = beta0 |f0|.
/// With alpha0 = 1 and offset 0 this is exactly the no-DL problem.
inline SolverWorkspace analyze_split(const ChannelRealization& ch, const PowerBudget& budget, double alpha0,
                                     double offset) {
  check_channel(ch);
  const std::size_t R = ch.relay_count();
  budget.validate(R);
  SolverWorkspace ws;
  ws.offset = offset;
  ws.a.resize(R);
  ws.b.resize(R);
  ws.c.resize(R);
  ws.phi.assign(R, 0.0);
  ws.active.assign(R, false);
  for (std::size_t j = 0; j < R; ++j) {
    const double fm = std::abs(ch.f[j]);
    const double gm = std::abs(ch.g[j]);
    ws.a[j] = gm * std::sqrt(budget.P[j]) / std::sqrt(1.0 + alpha0 * alpha0 * fm * fm * budget.P0);
    ws.c[j] = alpha0 * fm;
    ws.b[j] = ws.a[j] * ws.c[j];
    ws.active[j] = ws.c[j] > 0.0 && ws.a[j] > 0.0;
    if (ws.active[j]) ws.phi[j] = ws.c[j] / ws.a[j];
  }
  detail::threshold_scan(ws);
  return ws;
}

/// Workspace for the network without a direct link (transmitter at full power).
inline SolverWorkspace analyze_no_dl(const ChannelRealization& ch, const PowerBudget& budget) {
  return analyze_split(ch, budget, 1.0, 0.0);
}

/// Closed-form SNR of candidate i:
///   P0 (sum_{m>i} c_{tau_m}^2 + (offset + sum_{m<=i} b_{tau_m})^2 / (1 + sum_{m<=i} a_{tau_m}^2)).
/// Valid when lambda_i phi_{tau_{i+1}} <= 1 (the tail stays inside the box).
inline double candidate_snr(const SolverWorkspace& ws, double P0, std::size_t i) {
  double sa = 1.0, sb = ws.offset, tail = 0.0;
  for (std::size_t k = 0; k < ws.tau.size(); ++k) {
    const std::size_t j = ws.tau[k];
    if (k < i) {
      sa += ws.a[j] * ws.a[j];
      sb += ws.b[j];
    } else {
      tail += ws.c[j] * ws.c[j];
    }
  }
  return P0 * (tail + sb * sb / sa);
}

/// Exact SNR-maximizing relay powers without a direct link. The transmitter
/// always uses full power; relays with the i0 largest phi run at full power
/// and the rest at lambda_{i0} * phi_j.
inline PowerAllocation solve_no_dl(const ChannelRealization& ch, const PowerBudget& budget) {
  const SolverWorkspace ws = analyze_no_dl(ch, budget);
  PowerAllocation out;
  out.alpha0 = 1.0;
  out.beta0 = 0.0;
  if (ws.tau.empty()) {
    out.alpha.assign(ch.relay_count(), 0.0);
    return out;
  }
  out.i0 = ws.i0;
  out.alpha = detail::candidate_vector(ws, ws.i0);
  out.snr = second_step_snr(ch, budget, 1.0, 0.0, out.alpha);
  return out;
}

/// Exhaustive search over {0, step, 2 step, ..., 1}^R. Independent check on
/// solve_no_dl; only practical for a handful of relays.
inline PowerAllocation oracle_grid(const ChannelRealization& ch, const PowerBudget& budget, double step) {
  check_channel(ch);
  const std::size_t R = ch.relay_count();
  budget.validate(R);
  if (!(step > 0.0 && step <= 0.5)) throw std::invalid_argument("grid step must lie in (0, 0.5]");
  if (R > 4) throw ResourceLimitError("oracle_grid supports at most 4 relays");

  std::vector<double> levels;
  const auto k_max = static_cast<std::size_t>(std::floor(1.0 / step + 1e-9));
  for (std::size_t k = 0; k <= k_max; ++k) levels.push_back(std::min(1.0, static_cast<double>(k) * step));
  if (levels.back() < 1.0 - 1e-12) levels.push_back(1.0);
  if (std::pow(static_cast<double>(levels.size()), static_cast<double>(R)) > 2e9)
    throw ResourceLimitError("grid too fine for the evaluation budget");

  std::vector<double> a(R), b(R);
  for (std::size_t j = 0; j < R; ++j) {
    const double fm = std::abs(ch.f[j]);
    a[j] = std::abs(ch.g[j]) * std::sqrt(budget.P[j]) / std::sqrt(1.0 + fm * fm * budget.P0);
    b[j] = a[j] * fm;
  }

  std::vector<std::size_t> idx(R, 0), best_idx(R, 0);
  double best = -1.0;
  // Prefix sums of signal and noise let the innermost loop cost O(1).
  auto recurse = [&](auto&& self, std::size_t depth, double sig, double noise) -> void {
    if (depth == R) {
      const double v = sig * sig / noise;
      if (v > best) {
        best = v;
        best_idx = idx;
      }
      return;
    }
    for (std::size_t k = 0; k < levels.size(); ++k) {
      idx[depth] = k;
      const double x = levels[k];
      self(self, depth + 1, sig + x * b[depth], noise + x * x * a[depth] * a[depth]);
    }
  };
  recurse(recurse, 0, 0.0, 1.0);

  PowerAllocation out;
  out.alpha.resize(R);
  for (std::size_t j = 0; j < R; ++j) {
    out.alpha[j] = levels[best_idx[j]];
    if (out.alpha[j] == 1.0) ++out.i0;
  }
  out.snr = budget.P0 * best;
  return out;
}

/// Number of points oracle_grid evaluates for the given step and relay count.
inline std::size_t oracle_grid_points(double step, std::size_t relays) {
  const auto k_max = static_cast<std::size_t>(std::floor(1.0 / step + 1e-9));
  std::size_t levels = k_max + 1;
  if (static_cast<double>(k_max) * step < 1.0 - 1e-12) ++levels;
  std::size_t n = 1;
  for (std::size_t r = 0; r < relays; ++r) n *= levels;
  return n;
}

/// Relay selection function h_j = P_j |f_j g_j|^2 / (1 + |f_j|^2 P0 + |g_j|^2 P_j).
inline double relay_selection_metric(double f_mag, double g_mag, double P0, double Pj) {
  return Pj * f_mag * f_mag * g_mag * g_mag / (1.0 + f_mag * f_mag * P0 + g_mag * g_mag * Pj);
}

/// Best single relay by h at full power, everyone else silent. Ties go to the
/// lowest index. Returns the 0-based relay index.
inline std::pair<std::size_t, PowerAllocation> select_best_relay(const ChannelRealization& ch,
                                                                 const PowerBudget& budget) {
  check_channel(ch);
  const std::size_t R = ch.relay_count();
  if (R == 0) throw std::invalid_argument("need at least one relay");
  budget.validate(R);
  std::size_t best = 0;
  double best_h = -1.0;
  for (std::size_t j = 0; j < R; ++j) {
    const double h = relay_selection_metric(std::abs(ch.f[j]), std::abs(ch.g[j]), budget.P0, budget.P[j]);
    if (h > best_h) {
      best_h = h;
      best = j;
    }
  }
  PowerAllocation out;
  out.alpha.assign(R, 0.0);
  out.alpha[best] = 1.0;
  out.i0 = 1;
  out.snr = second_step_snr(ch, budget, 1.0, 0.0, out.alpha);
  return {best, out};
}

/// Allocation under an aggregate relay constraint sum alpha_j^2 <= 1 with
/// every relay at nominal power P_total:
///   alpha_j ~ |f_j g_j| sqrt(1 + |f_j|^2 P0) / (|f_j|^2 P0 + |g_j|^2 P_total + 1).
/// The reported snr assumes relay powers P_total.
inline PowerAllocation larsson_alloc(const ChannelRealization& ch, double P0, double P_total) {
  check_channel(ch);
  const std::size_t R = ch.relay_count();
  if (R == 0) throw std::invalid_argument("need at least one relay");
  if (!(P0 > 0.0) || !(P_total > 0.0)) throw std::invalid_argument("powers must be positive");
  PowerAllocation out;
  out.alpha.assign(R, 0.0);
  double norm2 = 0.0;
  for (std::size_t j = 0; j < R; ++j) {
    const double fm = std::abs(ch.f[j]);
    const double gm = std::abs(ch.g[j]);
    out.alpha[j] = fm * gm * std::sqrt(1.0 + fm * fm * P0) / (fm * fm * P0 + gm * gm * P_total + 1.0);
    norm2 += out.alpha[j] * out.alpha[j];
  }
  if (norm2 == 0.0) return out;
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : out.alpha) x *= inv;
  PowerBudget b = PowerBudget::uniform(P_total, R);
  b.P0 = P0;
  out.snr = second_step_snr(ch, b, 1.0, 0.0, out.alpha);
  return out;
}

}  // namespace netbf
