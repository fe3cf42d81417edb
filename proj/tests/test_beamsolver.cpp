#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "netbf/beamsolver.hpp"
#include "netbf/channel.hpp"

using namespace netbf;

namespace {

ChannelRealization two_relay_example() {
  ChannelRealization ch;
  ch.f = {1.0, 0.5};
  ch.g = {1.0, 2.0};
  return ch;
}

// Plain evaluation of the no-DL SNR, written out independently of the library.
double snr_by_hand(const ChannelRealization& ch, const PowerBudget& b, const std::vector<double>& x) {
  double num = 0.0, den = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = std::abs(ch.f[i]), g = std::abs(ch.g[i]);
    const double s = 1.0 + f * f * b.P0;
    num += x[i] * f * g * std::sqrt(b.P[i]) / std::sqrt(s);
    den += x[i] * x[i] * g * g * b.P[i] / s;
  }
  return b.P0 * num * num / den;
}

double grid_max_2(const ChannelRealization& ch, const PowerBudget& b, double step) {
  double best = 0.0;
  const int n = static_cast<int>(std::lround(1.0 / step));
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) best = std::max(best, snr_by_hand(ch, b, {i * step, j * step}));
  return best;
}

}  // namespace

TEST(Phi, DirectSubstitution) {
  EXPECT_NEAR(*phi_statistic(1, 1, 10, 10), std::sqrt(11.0) / std::sqrt(10.0), 1e-15);
  EXPECT_NEAR(*phi_statistic(1, 1, 10, 10), 1.04881, 1e-5);
  EXPECT_EQ(*phi_statistic(0, 1.3, 10, 10), 0.0);
  EXPECT_NEAR(*phi_statistic(0.5, 2, 10, 10), 0.14790, 1e-5);
}

TEST(Phi, DegenerateRelay) {
  EXPECT_FALSE(phi_statistic(1, 0, 10, 10).has_value());
  EXPECT_FALSE(phi_statistic(1, 1, 10, 0).has_value());
}

TEST(Phi, Monotonicity) {
  EXPECT_LT(*phi_statistic(0.5, 1, 10, 10), *phi_statistic(0.6, 1, 10, 10));
  EXPECT_GT(*phi_statistic(0.5, 1, 10, 10), *phi_statistic(0.5, 1.1, 10, 10));
  EXPECT_GT(*phi_statistic(0.5, 1, 10, 10), *phi_statistic(0.5, 1, 10, 11));
}

TEST(ReceiveSnr, ZeroVector) {
  EXPECT_EQ(receive_snr_no_dl(two_relay_example(), PowerBudget::uniform(10, 2), {0.0, 0.0}), 0.0);
}

TEST(ReceiveSnr, SingleRelayValue) {
  ChannelRealization ch;
  ch.f = {1.0};
  ch.g = {1.0};
  EXPECT_NEAR(receive_snr_no_dl(ch, PowerBudget::uniform(10, 1), {1.0}), 100.0 / 21.0, 1e-13);
}

TEST(ReceiveSnr, SymmetricSwap) {
  ChannelRealization ch;
  ch.f = {0.7, cplx(0.0, 0.7)};
  ch.g = {1.2, cplx(-1.2, 0.0)};
  const auto b = PowerBudget::uniform(10, 2);
  EXPECT_DOUBLE_EQ(receive_snr_no_dl(ch, b, {0.3, 0.8}), receive_snr_no_dl(ch, b, {0.8, 0.3}));
}

TEST(ReceiveSnr, RejectsOutOfBox) {
  const auto ch = two_relay_example();
  const auto b = PowerBudget::uniform(10, 2);
  EXPECT_THROW(receive_snr_no_dl(ch, b, {1.1, 0.0}), std::invalid_argument);
  EXPECT_THROW(receive_snr_no_dl(ch, b, {-0.1, 0.0}), std::invalid_argument);
  EXPECT_THROW(receive_snr_no_dl(ch, b, {0.5}), std::invalid_argument);
}

TEST(SolveNoDl, SingleRelayFullPower) {
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto ch = sample_rayleigh(1, 1, false, {3, k})[0];
    const auto a = solve_no_dl(ch, PowerBudget::uniform(5.0, 1));
    EXPECT_EQ(a.alpha[0], 1.0);
    EXPECT_EQ(a.i0, 1U);
  }
}

TEST(SolveNoDl, TwoRelayWorkedExample) {
  const auto ch = two_relay_example();
  const auto b = PowerBudget::uniform(10, 2);
  const auto a = solve_no_dl(ch, b);
  const auto ws = analyze_no_dl(ch, b);
  // lambda_1 = (1 + 10/11) / sqrt(10/11) = 21 / sqrt(110).
  const double lambda1 = 21.0 / std::sqrt(110.0);
  const double phi2 = 0.5 * std::sqrt(3.5) / (2.0 * std::sqrt(10.0));
  EXPECT_NEAR(ws.lambda[1], lambda1, 1e-12);
  EXPECT_NEAR(lambda1, 2.0022, 1e-4);
  EXPECT_EQ(a.i0, 1U);
  EXPECT_EQ(a.alpha[0], 1.0);
  EXPECT_NEAR(a.alpha[1], lambda1 * phi2, 1e-12);
  EXPECT_NEAR(a.alpha[1], 0.2961, 1e-4);
  EXPECT_NEAR(a.snr, snr_by_hand(ch, b, a.alpha), 1e-12);
  const double grid = grid_max_2(ch, b, 1e-3);
  EXPECT_GE(a.snr, grid - 1e-4 * grid);
}

TEST(SolveNoDl, DegenerateRelaysExcluded) {
  ChannelRealization ch;
  ch.f = {0.0, 0.8, 1.0};
  ch.g = {1.0, 0.0, 0.9};
  const auto a = solve_no_dl(ch, PowerBudget::uniform(10, 3));
  EXPECT_EQ(a.alpha[0], 0.0);
  EXPECT_EQ(a.alpha[1], 0.0);
  EXPECT_EQ(a.alpha[2], 1.0);
}

TEST(SolveNoDl, AllDegenerate) {
  ChannelRealization ch;
  ch.f = {0.0, 1.0};
  ch.g = {1.0, 0.0};
  const auto a = solve_no_dl(ch, PowerBudget::uniform(10, 2));
  EXPECT_EQ(a.alpha, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(a.snr, 0.0);
}

TEST(SolveNoDl, RejectsBadBudget) {
  EXPECT_THROW(solve_no_dl(two_relay_example(), PowerBudget::uniform(10, 3)), std::invalid_argument);
  PowerBudget b = PowerBudget::uniform(10, 2);
  b.P[1] = 0.0;
  EXPECT_THROW(solve_no_dl(two_relay_example(), b), std::invalid_argument);
}

TEST(SolveNoDl, SymmetricTiesGiveSameSnr) {
  ChannelRealization ch;
  ch.f = {0.8, 0.8, 0.3};
  ch.g = {0.5, 0.5, 1.7};
  const auto b = PowerBudget::uniform(10, 3);
  const auto a = solve_no_dl(ch, b);
  ChannelRealization swapped = ch;
  std::swap(swapped.f[0], swapped.f[1]);
  std::swap(swapped.g[0], swapped.g[1]);
  EXPECT_DOUBLE_EQ(a.snr, solve_no_dl(swapped, b).snr);
  EXPECT_EQ(a.alpha[0], a.alpha[1]);
}

class NoDlInvariants : public ::testing::TestWithParam<std::size_t> {};

TEST_P(NoDlInvariants, StructuralProperties) {
  const std::size_t R = GetParam();
  StreamEngine pe({77, R});
  const auto draws = sample_rayleigh(3000, R, false, {31, R * 1000});
  for (const auto& ch : draws) {
    PowerBudget b{std::pow(10.0, 3.0 * pe.uniform()), std::vector<double>(R)};
    for (double& p : b.P) p = std::pow(10.0, 3.0 * pe.uniform());
    const auto a = solve_no_dl(ch, b);
    const auto ws = analyze_no_dl(ch, b);
    ASSERT_EQ(a.alpha0, 1.0);
    ASSERT_GE(a.i0, 1U);
    for (double x : a.alpha) ASSERT_TRUE(x >= 0.0 && x <= 1.0);
    // The relay with the largest phi is at full power.
    ASSERT_EQ(a.alpha[ws.tau[0]], 1.0);
    // Order consistency.
    for (std::size_t k = 0; k < R; ++k)
      for (std::size_t l = 0; l < R; ++l)
        if (ws.phi[k] > ws.phi[l]) ASSERT_GE(a.alpha[k], a.alpha[l]);
    // Lambda chain along the scan.
    for (std::size_t i = 1; i + 1 < R; ++i)
      if (ws.lambda[i] < 1.0 / ws.ordered_phi(i)) ASSERT_LT(ws.lambda[i + 1], 1.0 / ws.ordered_phi(i + 1));
    // Closed form at the optimum and the recursion beyond it. The drop from
    // candidate i to i + 1 is S_a a^2 / (S_a + a^2) (phi - 1 / lambda_i)^2 with
    // S_a, lambda_i taken over the first i ordered relays.
    const double direct = snr_by_hand(ch, b, a.alpha);
    ASSERT_NEAR(candidate_snr(ws, b.P0, a.i0), direct, 1e-9 * direct);
    for (std::size_t i = a.i0; i < R; ++i) {
      double sa = 1.0;
      for (std::size_t m = 0; m < i; ++m) sa += ws.a[ws.tau[m]] * ws.a[ws.tau[m]];
      const double an = ws.a[ws.tau[i]];
      const double d = ws.ordered_phi(i) - 1.0 / ws.lambda[i];
      const double drop = b.P0 * sa * an * an / (sa + an * an) * d * d;
      const double lhs = candidate_snr(ws, b.P0, i) - candidate_snr(ws, b.P0, i + 1);
      ASSERT_GE(lhs, -1e-9 * direct);
      ASSERT_NEAR(lhs, drop, 1e-9 * direct);
      ASSERT_NEAR(candidate_snr(ws, b.P0, i + 1), snr_by_hand(ch, b, detail::candidate_vector(ws, i + 1)),
                  1e-9 * direct);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Relays, NoDlInvariants, ::testing::Values(2, 3, 4, 6));

TEST(SolveNoDl, DominatesCoarseOracle) {
  for (std::size_t R : {2, 3, 4}) {
    const auto draws = sample_rayleigh(R == 4 ? 30 : 200, R, false, {8, R});
    for (const auto& ch : draws) {
      const auto b = PowerBudget::uniform(10, R);
      const auto a = solve_no_dl(ch, b);
      const auto o = oracle_grid(ch, b, 0.05);
      ASSERT_GE(a.snr, o.snr * (1.0 - 1e-12));
      ASSERT_LE(a.snr, o.snr * 1.02);
    }
  }
}

TEST(SolveNoDl, TransmitterFullPowerIsBest) {
  // With the relay vector held fixed, SNR grows with the transmitter amplitude.
  const auto draws = sample_rayleigh(200, 3, false, {19, 0});
  for (const auto& ch : draws) {
    const auto b = PowerBudget::uniform(10, 3);
    const auto a = solve_no_dl(ch, b);
    double prev = 0.0;
    for (double a0 = 0.1; a0 <= 1.0 + 1e-12; a0 += 0.1) {
      const double s = second_step_snr(ch, b, a0, 0.0, a.alpha);
      ASSERT_GT(s, prev);
      prev = s;
    }
  }
}

TEST(OracleGrid, SingleRelay) {
  ChannelRealization ch;
  ch.f = {0.3};
  ch.g = {1.9};
  for (double step : {0.5, 0.1, 0.01}) EXPECT_EQ(oracle_grid(ch, PowerBudget::uniform(10, 1), step).alpha[0], 1.0);
}

TEST(OracleGrid, Cardinality) {
  EXPECT_EQ(oracle_grid_points(0.5, 2), 9U);
  EXPECT_EQ(oracle_grid_points(0.01, 1), 101U);
  EXPECT_EQ(oracle_grid_points(0.3, 1), 5U);
}

TEST(OracleGrid, Limits) {
  const auto ch5 = sample_rayleigh(1, 5, false, {1, 0})[0];
  EXPECT_THROW(oracle_grid(ch5, PowerBudget::uniform(10, 5), 0.5), ResourceLimitError);
  const auto ch4 = sample_rayleigh(1, 4, false, {1, 0})[0];
  EXPECT_THROW(oracle_grid(ch4, PowerBudget::uniform(10, 4), 1e-3), ResourceLimitError);
  EXPECT_THROW(oracle_grid(ch4, PowerBudget::uniform(10, 4), 0.6), std::invalid_argument);
  EXPECT_THROW(oracle_grid(ch4, PowerBudget::uniform(10, 4), 0.0), std::invalid_argument);
}

TEST(OracleGrid, MatchesHandGrid) {
  const auto ch = sample_rayleigh(1, 2, false, {44, 0})[0];
  const auto b = PowerBudget::uniform(10, 2);
  EXPECT_NEAR(oracle_grid(ch, b, 0.01).snr, grid_max_2(ch, b, 0.01), 1e-12);
}

TEST(BestRelay, SingleRelay) {
  const auto ch = sample_rayleigh(1, 1, false, {2, 0})[0];
  EXPECT_EQ(select_best_relay(ch, PowerBudget::uniform(10, 1)).first, 0U);
}

TEST(BestRelay, WorkedExample) {
  const auto ch = two_relay_example();
  const auto b = PowerBudget::uniform(10, 2);
  EXPECT_NEAR(relay_selection_metric(1, 1, 10, 10), 10.0 / 21.0, 1e-15);
  EXPECT_NEAR(relay_selection_metric(0.5, 2, 10, 10), 10.0 / 43.5, 1e-15);
  const auto [idx, alloc] = select_best_relay(ch, b);
  EXPECT_EQ(idx, 0U);
  EXPECT_EQ(alloc.alpha, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(alloc.alpha0, 1.0);
  // h is P0 times the single-relay SNR, so the pick is also the best one-relay SNR.
  EXPECT_GT(receive_snr_no_dl(ch, b, {1.0, 0.0}), receive_snr_no_dl(ch, b, {0.0, 1.0}));
  EXPECT_NEAR(alloc.snr, receive_snr_no_dl(ch, b, {1.0, 0.0}), 1e-13);
}

TEST(BestRelay, ScalingFlipsChoice) {
  auto ch = two_relay_example();
  ch.f[1] *= 3.0;
  ch.g[1] *= 3.0;
  EXPECT_EQ(select_best_relay(ch, PowerBudget::uniform(10, 2)).first, 1U);
}

TEST(BestRelay, TieGoesToLowestIndex) {
  ChannelRealization ch;
  ch.f = {0.5, 1.0, 1.0};
  ch.g = {0.5, 1.0, 1.0};
  EXPECT_EQ(select_best_relay(ch, PowerBudget::uniform(10, 3)).first, 1U);
}

TEST(Larsson, IdenticalRelays) {
  ChannelRealization ch;
  ch.f = {0.9, 0.9};
  ch.g = {1.1, 1.1};
  const auto a = larsson_alloc(ch, 10, 10);
  EXPECT_NEAR(a.alpha[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(a.alpha[1], 0.70711, 1e-5);
}

TEST(Larsson, SingleRelay) {
  const auto ch = sample_rayleigh(1, 1, false, {6, 0})[0];
  EXPECT_DOUBLE_EQ(larsson_alloc(ch, 10, 10).alpha[0], 1.0);
}

TEST(Larsson, AllZeroChannels) {
  ChannelRealization ch;
  ch.f = {0.0, 0.0};
  ch.g = {1.0, 1.0};
  EXPECT_EQ(larsson_alloc(ch, 10, 10).alpha, (std::vector<double>{0.0, 0.0}));
}

TEST(Larsson, UnitNormAndCircleOracle) {
  const auto draws = sample_rayleigh(50, 2, false, {9, 0});
  for (const auto& ch : draws) {
    const auto a = larsson_alloc(ch, 10, 10);
    ASSERT_NEAR(a.alpha[0] * a.alpha[0] + a.alpha[1] * a.alpha[1], 1.0, 1e-14);
    // alpha = (cos t, sin t), t on a 1e-3 grid of the nonnegative quarter circle.
    double best = 0.0;
    const auto b = PowerBudget::uniform(10, 2);
    for (double t = 0.0; t <= std::numbers::pi / 2; t += 1e-3)
      best = std::max(best, snr_by_hand(ch, b, {std::cos(t), std::sin(t)}));
    ASSERT_GE(a.snr, best * (1.0 - 1e-9));
    ASSERT_LE(a.snr, best * (1.0 + 1e-5));
  }
}
