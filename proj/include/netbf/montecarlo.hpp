#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "netbf/beamsolver.hpp"
#include "netbf/channel.hpp"
#include "netbf/dlsolver.hpp"
#include "netbf/rng.hpp"
#include "netbf/types.hpp"

namespace netbf {

enum class Scheme {
  BeamformNoDl,
  BeamformDlFirst,
  BeamformDlSecond,
  BeamformDlBoth,
  BestRelay,
  LarssonAggregate,
  AfNoPowerControl,
  DlSecondFixedSplit,
  DlBothFixedSplit,
  DirectOnly,
};

inline constexpr Scheme kAllSchemes[] = {
    Scheme::BeamformNoDl,     Scheme::BeamformDlFirst,  Scheme::BeamformDlSecond,   Scheme::BeamformDlBoth,
    Scheme::BestRelay,        Scheme::LarssonAggregate, Scheme::AfNoPowerControl,   Scheme::DlSecondFixedSplit,
    Scheme::DlBothFixedSplit, Scheme::DirectOnly,
};

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::BeamformNoDl: return "BeamformNoDl";
    case Scheme::BeamformDlFirst: return "BeamformDlFirst";
    case Scheme::BeamformDlSecond: return "BeamformDlSecond";
    case Scheme::BeamformDlBoth: return "BeamformDlBoth";
    case Scheme::BestRelay: return "BestRelay";
    case Scheme::LarssonAggregate: return "LarssonAggregate";
    case Scheme::AfNoPowerControl: return "AfNoPowerControl";
    case Scheme::DlSecondFixedSplit: return "DlSecondFixedSplit";
    case Scheme::DlBothFixedSplit: return "DlBothFixedSplit";
    case Scheme::DirectOnly: return "DirectOnly";
  }
  return "?";
}

inline Scheme scheme_from_string(std::string_view s) {
  for (Scheme k : kAllSchemes)
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown scheme: " + std::string(s));
}

/// Whether the receiver listens to the direct link during the first step.
inline bool listens_first_step(Scheme s) {
  return s == Scheme::BeamformDlFirst || s == Scheme::BeamformDlBoth || s == Scheme::DlBothFixedSplit ||
         s == Scheme::DirectOnly;
}

struct TrialOptions {
  /// Test hook: drop every noise term.
  bool noiseless = false;
  IterationControl ctrl{};
};

/// BPSK symbols are +1 / -1.
struct TrialOutcome {
  int transmitted = 1;
  int decided = 1;
  double snr_achieved = 0.0;

  bool error() const { return transmitted != decided; }
};

/// Powers chosen by a scheme for one channel draw, plus the relay budgets
/// actually in force (the aggregate-constraint scheme runs every relay at the
/// same nominal power).
struct SchemeAllocation {
  PowerAllocation alloc;
  PowerBudget budget;
  bool first_step_branch = false;
  bool second_step = true;
};

/// Power control of the given scheme for one realization.
inline SchemeAllocation allocate(Scheme scheme, const ChannelRealization& ch, const PowerBudget& budget,
                                 const IterationControl& ctrl = {}) {
  const std::size_t R = ch.relay_count();
  SchemeAllocation out{{}, budget, listens_first_step(scheme), true};
  const double f0 = ch.f0_mag();
  const double half = std::sqrt(0.5);
  switch (scheme) {
    case Scheme::BeamformNoDl:
      out.alloc = solve_no_dl(ch, budget);
      break;
    case Scheme::BeamformDlFirst:
      out.alloc = solve_dl_first(ch, budget);
      break;
    case Scheme::BeamformDlSecond:
      out.alloc = solve_dl_second(ch, budget, f0, ctrl).alloc;
      break;
    case Scheme::BeamformDlBoth:
      out.alloc = solve_dl_both(ch, budget, f0, ctrl).alloc;
      break;
    case Scheme::BestRelay:
      out.alloc = select_best_relay(ch, budget).second;
      break;
    case Scheme::LarssonAggregate: {
      const double p_total = std::accumulate(budget.P.begin(), budget.P.end(), 0.0) / static_cast<double>(R);
      out.budget = PowerBudget::uniform(p_total, R);
      out.budget.P0 = budget.P0;
      out.alloc = larsson_alloc(ch, budget.P0, p_total);
      break;
    }
    case Scheme::AfNoPowerControl:
      out.alloc = PowerAllocation{1.0, 0.0, std::vector<double>(R, 1.0), 0.0, R};
      break;
    case Scheme::DlSecondFixedSplit:
    case Scheme::DlBothFixedSplit:
      out.alloc = PowerAllocation{half, half, std::vector<double>(R, 1.0), 0.0, R};
      break;
    case Scheme::DirectOnly:
      out.alloc = PowerAllocation{1.0, 0.0, std::vector<double>(R, 0.0), 0.0, 0};
      out.second_step = false;
      break;
  }
  return out;
}

/// ML decision for BPSK over the two MRC branches: minimizes
/// |x1 - A1 s|^2 + |x2 - A2 s|^2 / noise_var2, i.e. the sign of
/// Re{conj(A1) x1} + Re{conj(A2) x2} / noise_var2. Ties decide +1.
inline int mrc_decode(std::optional<cplx> x1, cplx x2, std::pair<cplx, cplx> branch_gains, double noise_var2) {
  double stat = (std::conj(branch_gains.second) * x2).real() / noise_var2;
  if (x1) stat += (std::conj(branch_gains.first) * *x1).real();
  return stat >= 0.0 ? 1 : -1;
}

/// One two-step transmission: draw the channel and noises from the trial's
/// sub-stream, pick the scheme's powers, synthesize the received samples with
/// match-filtered phases and decode.
inline TrialOutcome run_trial(Scheme scheme, const Topology& topo, const PowerBudget& budget, RngSeed rng,
                              const TrialOptions& opts = {}) {
  if (budget.P.size() != topo.relay_count) throw std::invalid_argument("budget does not match topology");
  StreamEngine eng(rng);
  const ChannelRealization ch = realize(topo, eng);
  const std::size_t R = ch.relay_count();

  TrialOutcome out;
  out.transmitted = (eng() >> 63) ? -1 : 1;
  const double s = out.transmitted;

  // Fixed draw order keeps every scheme on the same noise samples.
  ComplexGaussian cn;
  cplx w1 = cn(eng);
  cplx w2 = cn(eng);
  std::vector<cplx> v(R);
  for (auto& z : v) z = cn(eng);
  if (opts.noiseless) {
    w1 = w2 = 0.0;
    std::fill(v.begin(), v.end(), cplx{0.0});
  }

  const SchemeAllocation sa = allocate(scheme, ch, budget, opts.ctrl);
  const PowerAllocation& al = sa.alloc;
  const double P0 = budget.P0;
  const double sq0 = std::sqrt(P0);
  const cplx f0 = *ch.f0;

  std::optional<cplx> x1;
  const cplx A1 = al.alpha0 * sq0 * f0;
  if (sa.first_step_branch) x1 = A1 * s + w1;

  cplx x2 = w2;
  double A2 = 0.0;
  double noise_var2 = 1.0;
  if (sa.second_step) {
    const double f0m = std::abs(f0);
    if (al.beta0 > 0.0 && f0m > 0.0) x2 += al.beta0 * sq0 * f0 * std::conj(f0) / f0m * s;
    A2 = al.beta0 * f0m;
    for (std::size_t i = 0; i < R; ++i) {
      if (al.alpha[i] == 0.0) continue;
      const double fm = std::abs(ch.f[i]);
      const double gm = std::abs(ch.g[i]);
      const double amp2 = sa.budget.P[i] / (1.0 + al.alpha0 * al.alpha0 * fm * fm * P0);
      const cplx r = al.alpha0 * sq0 * ch.f[i] * s + v[i];
      // Phase -(arg f_i + arg g_i) lines the relay up with the others.
      const cplx rot = (fm > 0.0 && gm > 0.0) ? std::conj(ch.f[i] * ch.g[i]) / (fm * gm) : cplx{1.0};
      x2 += ch.g[i] * al.alpha[i] * std::sqrt(amp2) * rot * r;
      A2 += al.alpha0 * al.alpha[i] * fm * gm * std::sqrt(amp2);
      noise_var2 += al.alpha[i] * al.alpha[i] * gm * gm * amp2;
    }
    A2 *= sq0;
  }

  out.decided = mrc_decode(x1, x2, {A1, cplx{A2}}, noise_var2);
  out.snr_achieved = (x1 ? std::norm(A1) : 0.0) + A2 * A2 / noise_var2;
  return out;
}

/// Wilson score interval for k successes in n trials.
inline std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  const double lo = k == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = k == n ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

/// One point of a power sweep; p_db labels the curve (10 log10 P).
struct SweepPoint {
  double p_db = 0.0;
  PowerBudget budget;
};

/// P0 = P and P_i = relay_scale[i] * P for each P on start..stop (inclusive).
inline std::vector<SweepPoint> power_sweep(double start_db, double stop_db, double step_db, std::size_t relays,
                                           const std::vector<double>& relay_scale = {}, double source_scale = 1.0) {
  if (!(step_db > 0.0)) throw std::invalid_argument("step_db must be positive");
  if (stop_db < start_db) throw std::invalid_argument("empty power sweep");
  if (!relay_scale.empty() && relay_scale.size() != relays)
    throw std::invalid_argument("relay power scale count mismatch");
  std::vector<SweepPoint> out;
  const auto n = static_cast<std::size_t>(std::floor((stop_db - start_db) / step_db + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) {
    const double db = start_db + static_cast<double>(k) * step_db;
    const double p = from_db(db);
    SweepPoint pt{db, PowerBudget::uniform(p, relays)};
    pt.budget.P0 = source_scale * p;
    for (std::size_t i = 0; i < relay_scale.size(); ++i) pt.budget.P[i] = relay_scale[i] * p;
    out.push_back(std::move(pt));
  }
  return out;
}

struct McOptions {
  /// Floor on trials per point.
  std::uint64_t trials_per_point = 100000;
  /// Keep going past the floor, a batch at a time, until this many errors.
  std::uint64_t min_errors = 0;
  /// Hard cap when min_errors is set (0 = 100x the floor).
  std::uint64_t max_trials = 0;
  unsigned workers = 1;
  std::uint64_t batch = 1U << 15;
  TrialOptions trial{};
};

/// Block error rate versus transmit power for one scheme. A block is one
/// BPSK symbol.
struct BlerCurve {
  Scheme scheme = Scheme::BeamformNoDl;
  RngSeed seed{};
  std::vector<double> power_db;
  std::vector<double> bler;
  std::vector<std::uint64_t> trials;
  std::vector<std::uint64_t> errors;
  std::vector<std::pair<double, double>> ci95;

  std::size_t size() const { return power_db.size(); }
  /// No errors seen: the zero estimate is only bounded by its interval.
  bool low_confidence(std::size_t k) const { return errors[k] == 0; }
};

namespace detail {

inline std::uint64_t count_errors(Scheme scheme, const Topology& topo, const PowerBudget& budget, RngSeed seed,
                                  std::uint64_t first, std::uint64_t count, const McOptions& opt) {
  const unsigned workers = std::max(1U, opt.workers);
  auto work = [&](std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t e = 0;
    for (std::uint64_t t = lo; t < hi; ++t)
      e += run_trial(scheme, topo, budget, {seed.seed, seed.stream + t}, opt.trial).error() ? 1 : 0;
    return e;
  };
  if (workers == 1 || count < 2 * workers) return work(first, first + count);

  std::vector<std::uint64_t> partial(workers, 0);
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t lo = first + std::min<std::uint64_t>(count, w * chunk);
    const std::uint64_t hi = first + std::min<std::uint64_t>(count, (w + 1) * chunk);
    pool.emplace_back([&, w, lo, hi] { partial[w] = work(lo, hi); });
  }
  for (auto& th : pool) th.join();
  return std::accumulate(partial.begin(), partial.end(), std::uint64_t{0});
}

}  // namespace detail

/// Monte Carlo BLER over a power sweep. Trial t of every point uses
/// sub-stream seed.stream + t, so the curve is identical for any worker count
/// and different schemes see the same channels and noise.
inline BlerCurve estimate_bler(Scheme scheme, const Topology& topo, const std::vector<SweepPoint>& sweep,
                               const McOptions& opt, RngSeed seed) {
  topo.validate();
  if (opt.trials_per_point == 0) throw std::invalid_argument("trials_per_point must be positive");
  BlerCurve curve;
  curve.scheme = scheme;
  curve.seed = seed;
  const std::uint64_t cap =
      opt.min_errors == 0 ? opt.trials_per_point : std::max(opt.trials_per_point, opt.max_trials ? opt.max_trials : 100 * opt.trials_per_point);
  const std::uint64_t batch = std::max<std::uint64_t>(1, opt.batch);
  for (const auto& pt : sweep) {
    std::uint64_t n = 0, e = 0;
    while (n < cap) {
      std::uint64_t take = std::min(batch, cap - n);
      if (n < opt.trials_per_point) take = std::min(take, opt.trials_per_point - n);
      e += detail::count_errors(scheme, topo, pt.budget, seed, n, take, opt);
      n += take;
      if (n >= opt.trials_per_point && e >= opt.min_errors) break;
    }
    curve.power_db.push_back(pt.p_db);
    curve.trials.push_back(n);
    curve.errors.push_back(e);
    curve.bler.push_back(static_cast<double>(e) / static_cast<double>(n));
    curve.ci95.push_back(wilson_interval(e, n));
  }
  return curve;
}

/// Diversity estimate: minus the least-squares slope of log10(bler) against
/// P_dB / 10 over the points inside [low_db, high_db].
inline double diversity_slope(const BlerCurve& curve, double low_db, double high_db) {
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const double db = curve.power_db[k];
    if (db < low_db - 1e-9 || db > high_db + 1e-9) continue;
    if (curve.bler[k] <= 0.0) throw EstimationError("zero error count inside the slope window");
    xs.push_back(db / 10.0);
    ys.push_back(std::log10(curve.bler[k]));
  }
  if (xs.size() < 3) throw EstimationError("need at least 3 points inside the slope window");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  return -sxy / sxx;
}

}  // namespace netbf
