#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "netbf/beamsolver.hpp"
#include "netbf/quartic.hpp"
#include "netbf/scalar_search.hpp"
#include "netbf/types.hpp"

namespace netbf {

/// Stopping rule for the alternating direct-link solvers. With relative set,
/// the SNR change is compared against thre * SNR.
struct IterationControl {
  int iter = 20;
  double thre = 1e-6;
  bool relative = true;

  void validate() const {
    if (iter < 1) throw std::invalid_argument("iter must be >= 1");
    if (!(thre > 0.0)) throw std::invalid_argument("thre must be positive");
  }
};

/// Coefficients of the high-power approximation of psi:
/// d1 = sum alpha_i |g_i| sqrt(P_i) / sqrt(P0), d2 = sum alpha_i^2 |g_i / f_i|^2 P_i / P0.
struct HighSnrCoeffs {
  double d1 = 0.0;
  double d2 = 0.0;
};

struct HighSnrAlpha0 {
  double alpha0 = 1.0;
  /// Set when no admissible quartic root existed and d(alpha0) was maximized
  /// numerically instead.
  bool numeric_fallback = false;
};

struct IterationRecord {
  double alpha0 = 0.0;
  double objective = 0.0;
};

/// Output of the alternating solvers. alloc.snr is the objective of the
/// chosen candidate (psi for the second-step case, the two-branch total for
/// the both-steps case).
struct DlSolution {
  enum class Candidate { Interior, FullFirstStep, DirectOnly };

  PowerAllocation alloc;
  Candidate winner = Candidate::Interior;
  bool converged = false;
  std::vector<IterationRecord> trace;
};

/// Lower/upper edge of the open interval searched for alpha0.
inline constexpr double kAlpha0Margin = 1e-6;

inline double split_beta(double alpha0) { return std::sqrt(std::max(0.0, 1.0 - alpha0 * alpha0)); }

/// Second-step receive SNR with the transmitter spending the remainder of its
/// power on the direct link: beta0 = sqrt(1 - alpha0^2).
inline double psi(const ChannelRealization& ch, const PowerBudget& budget, double f0_mag, double alpha0,
                  const std::vector<double>& alpha) {
  check_channel(ch);
  check_box(alpha, ch.relay_count());
  if (!(alpha0 >= 0.0 && alpha0 <= 1.0)) throw std::invalid_argument("alpha0 outside [0,1]");
  return second_step_snr(ch, budget, alpha0, split_beta(alpha0), alpha, f0_mag);
}

/// Direct link heard in the first step only: relay powers are those of the
/// network without the direct link and the transmitter stays at full power.
inline PowerAllocation solve_dl_first(const ChannelRealization& ch, const PowerBudget& budget) {
  return solve_no_dl(ch, budget);
}

/// Two-branch MRC SNR for the first-step direct link: alpha0^2 P0 |f0|^2 plus
/// the relay branch.
inline double total_snr_dl_first(const PowerAllocation& alloc, double f0_mag, double P0) {
  return alloc.alpha0 * alloc.alpha0 * P0 * f0_mag * f0_mag + alloc.snr;
}

/// Workspace of the fixed-alpha0 relay problem (hatted quantities).
inline SolverWorkspace analyze_dl(const ChannelRealization& ch, const PowerBudget& budget, double f0_mag,
                                  double alpha0) {
  return analyze_split(ch, budget, alpha0, split_beta(alpha0) * f0_mag);
}

/// Best relay vector for a fixed alpha0 in (0, 1]. Same threshold structure as
/// the no-DL solver, except the scan may stop at i0 = 0 when the direct link
/// is strong enough that no relay needs full power.
inline PowerAllocation theorem2_inner(const ChannelRealization& ch, const PowerBudget& budget, double f0_mag,
                                      double alpha0) {
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw std::invalid_argument("alpha0 must lie in (0,1]");
  const SolverWorkspace ws = analyze_dl(ch, budget, f0_mag, alpha0);
  PowerAllocation out;
  out.alpha0 = alpha0;
  out.beta0 = split_beta(alpha0);
  if (ws.tau.empty()) {
    out.alpha.assign(ch.relay_count(), 0.0);
  } else {
    out.i0 = ws.i0;
    out.alpha = detail::candidate_vector(ws, ws.i0);
  }
  out.snr = second_step_snr(ch, budget, out.alpha0, out.beta0, out.alpha, f0_mag);
  return out;
}

/// High-power coefficients for a fixed relay vector. d2 is infinite when a
/// transmitting relay has |f_i| = 0.
inline HighSnrCoeffs high_snr_coeffs(const ChannelRealization& ch, const PowerBudget& budget,
                                     const std::vector<double>& alpha) {
  HighSnrCoeffs k;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] == 0.0) continue;
    const double gm = std::abs(ch.g[i]);
    const double fm = std::abs(ch.f[i]);
    k.d1 += alpha[i] * gm * std::sqrt(budget.P[i]);
    k.d2 += fm > 0.0 ? alpha[i] * alpha[i] * gm * gm * budget.P[i] / (fm * fm)
                     : std::numeric_limits<double>::infinity();
  }
  k.d1 /= std::sqrt(budget.P0);
  k.d2 /= budget.P0;
  return k;
}

/// High-power approximation of psi up to the factor P0:
/// (sqrt(1 - alpha0^2) |f0| + d1)^2 / (1 + d2 / alpha0^2).
inline double high_snr_objective(double f0_mag, const HighSnrCoeffs& k, double alpha0) {
  const double s = split_beta(alpha0) * f0_mag + k.d1;
  return s * s / (1.0 + k.d2 / (alpha0 * alpha0));
}

/// Stationarity polynomial of the high-power objective in u = alpha0^2,
/// ascending coefficients. Obtained by squaring
///   |f0| (u^2 + 2 d2 u - d2) = d1 d2 sqrt(1 - u).
inline std::array<double, 5> high_snr_quartic(double f0_mag, const HighSnrCoeffs& k) {
  const double F2 = f0_mag * f0_mag;
  const double d1s = k.d1 * k.d1;
  const double d2 = k.d2;
  return {d2 * d2 * (F2 - d1s), d1s * d2 * d2 - 4.0 * d2 * d2 * F2, (4.0 * d2 * d2 - 2.0 * d2) * F2,
          4.0 * d2 * F2, F2};
}

/// Closed-form alpha0 for the high-power approximation: the admissible root of
/// the stationarity quartic that maximizes the approximate objective.
inline HighSnrAlpha0 alpha0_high_snr(double f0_mag, const HighSnrCoeffs& k) {
  if (!(f0_mag > 0.0)) throw std::invalid_argument("alpha0_high_snr needs |f0| > 0");
  if (!(k.d2 > 0.0) || !std::isfinite(k.d2)) throw std::invalid_argument("alpha0_high_snr needs finite d2 > 0");

  HighSnrAlpha0 best{0.0, false};
  double best_val = -1.0;
  for (double u : real_quartic_roots(high_snr_quartic(f0_mag, k))) {
    if (!(u > 0.0 && u < 1.0)) continue;
    // Squaring admits roots of the mirrored equation; keep the sign-consistent ones.
    const double lhs = f0_mag * (u * u + 2.0 * k.d2 * u - k.d2);
    if (lhs < -1e-9 * std::max(1.0, k.d1 * k.d2)) continue;
    const double a0 = std::sqrt(u);
    const double v = high_snr_objective(f0_mag, k, a0);
    if (v > best_val) {
      best_val = v;
      best.alpha0 = a0;
    }
  }
  if (best_val >= 0.0) return best;

  const auto m = maximize_scalar([&](double a) { return high_snr_objective(f0_mag, k, a); }, kAlpha0Margin,
                                 1.0 - kAlpha0Margin);
  return {m.x, true};
}

namespace detail {

/// Seeds for the alpha0 search: fixed quartiles, the high-power estimate and
/// the incumbent (so an alternating step can never lose ground).
inline std::vector<double> alpha0_seeds(const ChannelRealization& ch, const PowerBudget& budget, double f0_mag,
                                        const std::vector<double>& alpha, double incumbent) {
  std::vector<double> seeds{0.25, 0.5, 0.75};
  const HighSnrCoeffs k = high_snr_coeffs(ch, budget, alpha);
  if (f0_mag > 0.0 && k.d2 > 0.0 && std::isfinite(k.d2)) seeds.push_back(alpha0_high_snr(f0_mag, k).alpha0);
  if (incumbent > 0.0) seeds.push_back(incumbent);
  return seeds;
}

}  // namespace detail

/// alpha0 maximizing psi(., alpha) for a fixed relay vector. Without a direct
/// link psi increases all the way to alpha0 = 1, which is returned exactly.
inline double optimize_alpha0_second(const ChannelRealization& ch, const PowerBudget& budget, double f0_mag,
                                     const std::vector<double>& alpha, double incumbent = 0.0) {
  check_channel(ch);
  check_box(alpha, ch.relay_count());
  if (!(f0_mag > 0.0)) return 1.0;
  const auto seeds = detail::alpha0_seeds(ch, budget, f0_mag, alpha, incumbent);
  auto f = [&](double a0) { return second_step_snr(ch, budget, a0, split_beta(a0), alpha, f0_mag); };
  return maximize_scalar(f, kAlpha0Margin, 1.0 - kAlpha0Margin, seeds).x;
}

/// alpha0 maximizing alpha0^2 P0 |f0|^2 + psi(., alpha).
inline double optimize_alpha0_both(const ChannelRealization& ch, const PowerBudget& budget, double f0_mag,
                                   const std::vector<double>& alpha, double incumbent = 0.0) {
  check_channel(ch);
  check_box(alpha, ch.relay_count());
  if (!(f0_mag > 0.0)) return 1.0;
  const double direct = budget.P0 * f0_mag * f0_mag;
  const auto seeds = detail::alpha0_seeds(ch, budget, f0_mag, alpha, incumbent);
  auto f = [&](double a0) {
    return a0 * a0 * direct + second_step_snr(ch, budget, a0, split_beta(a0), alpha, f0_mag);
  };
  return maximize_scalar(f, kAlpha0Margin, 1.0 - kAlpha0Margin, seeds).x;
}

namespace detail {

/// Shared alternation: alpha0 step, then the exact relay step, until the
/// objective settles. first_step_weight is 0 for the second-step-only link and
/// 1 when the first-step direct branch also counts.
inline DlSolution alternate(const ChannelRealization& ch, const PowerBudget& budget, double f0_mag,
                            const IterationControl& ctrl, double first_step_weight) {
  check_channel(ch);
  budget.validate(ch.relay_count());
  ctrl.validate();
  const std::size_t R = ch.relay_count();
  const double direct = budget.P0 * f0_mag * f0_mag;
  auto objective = [&](const PowerAllocation& a) { return first_step_weight * a.alpha0 * a.alpha0 * direct + a.snr; };

  DlSolution sol;
  std::vector<double> x_prev(R, 1.0);
  double snr_prev = 0.0;
  double a0_prev = 0.0;
  PowerAllocation interior;
  for (int count = 1;; ++count) {
    const double a0 = first_step_weight > 0.0 ? optimize_alpha0_both(ch, budget, f0_mag, x_prev, a0_prev)
                                              : optimize_alpha0_second(ch, budget, f0_mag, x_prev, a0_prev);
    interior = theorem2_inner(ch, budget, f0_mag, a0);
    const double snr = objective(interior);
    sol.trace.push_back({a0, snr});
    const double tol = ctrl.relative ? ctrl.thre * std::max(snr, std::numeric_limits<double>::min()) : ctrl.thre;
    const bool settled = std::abs(snr - snr_prev) <= tol;
    if (settled || count >= ctrl.iter) {
      sol.converged = settled;
      break;
    }
    x_prev = interior.alpha;
    snr_prev = snr;
    a0_prev = a0;
  }

  PowerAllocation full = theorem2_inner(ch, budget, f0_mag, 1.0);
  double best = objective(interior);
  sol.alloc = interior;
  sol.winner = DlSolution::Candidate::Interior;
  if (objective(full) > best) {
    best = objective(full);
    sol.alloc = full;
    sol.winner = DlSolution::Candidate::FullFirstStep;
  }
  if (first_step_weight == 0.0 && direct > best) {
    best = direct;
    sol.alloc = PowerAllocation{0.0, 1.0, std::vector<double>(R, 0.0), direct, 0};
    sol.winner = DlSolution::Candidate::DirectOnly;
  }
  sol.alloc.snr = best;
  return sol;
}

}  // namespace detail

/// Direct link during the second step only. Alternates the alpha0 search and
/// the exact relay step starting from all relays at full power, then keeps
/// the best of that point, alpha0 = 1 with its optimal relays, and the
/// direct-link-only point alpha0 = 0.
inline DlSolution solve_dl_second(const ChannelRealization& ch, const PowerBudget& budget, double f0_mag,
                                  const IterationControl& ctrl = {}) {
  return detail::alternate(ch, budget, f0_mag, ctrl, 0.0);
}

/// Direct link during both steps; the objective adds the first-step branch
/// alpha0^2 P0 |f0|^2. alpha0 = 0 is never better than alpha0 = 1 here, so
/// only the interior point and alpha0 = 1 compete. alloc.snr is the total.
inline DlSolution solve_dl_both(const ChannelRealization& ch, const PowerBudget& budget, double f0_mag,
                                const IterationControl& ctrl = {}) {
  return detail::alternate(ch, budget, f0_mag, ctrl, 1.0);
}

}  // namespace netbf
