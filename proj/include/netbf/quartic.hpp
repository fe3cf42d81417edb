#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <type_traits>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/Polynomials>

namespace netbf {

/// Real roots of sum_k coeffs[k] x^k (ascending order, degree 4), found as
/// companion-matrix eigenvalues and polished with a few Newton steps.
/// Roots whose imaginary part is not negligible are dropped.
inline std::vector<double> real_quartic_roots(const std::array<double, 5>& coeffs) {
  int degree = 4;
  while (degree > 0 && coeffs[static_cast<std::size_t>(degree)] == 0.0) --degree;
  if (degree == 0) return {};

  std::array<double, 5> poly{};
  for (int k = 0; k <= degree; ++k) poly[static_cast<std::size_t>(k)] = coeffs[static_cast<std::size_t>(k)];

  auto eval = [&](double x, double& deriv) {
    double p = 0.0;
    deriv = 0.0;
    for (int k = degree; k >= 0; --k) {
      deriv = deriv * x + p;
      p = p * x + poly[static_cast<std::size_t>(k)];
    }
    return p;
  };

  std::vector<double> out;
  if (degree == 1) {
    out.push_back(-poly[0] / poly[1]);
    return out;
  }
  std::vector<std::complex<double>> roots;
  auto solve = [&](auto deg) {
    constexpr int D = decltype(deg)::value;
    Eigen::Matrix<double, D + 1, 1> c;
    for (int k = 0; k <= D; ++k) c[k] = poly[static_cast<std::size_t>(k)];
    Eigen::PolynomialSolver<double, D> solver;
    solver.compute(c);
    for (int k = 0; k < D; ++k) roots.push_back(solver.roots()[k]);
  };
  if (degree == 2)
    solve(std::integral_constant<int, 2>{});
  else if (degree == 3)
    solve(std::integral_constant<int, 3>{});
  else
    solve(std::integral_constant<int, 4>{});
  for (const auto& z : roots) {
    if (std::abs(z.imag()) > 1e-7 * std::max(1.0, std::abs(z))) continue;
    double x = z.real();
    for (int it = 0; it < 4; ++it) {
      double d = 0.0;
      const double p = eval(x, d);
      if (d == 0.0) break;
      const double nx = x - p / d;
      if (!std::isfinite(nx)) break;
      x = nx;
    }
    out.push_back(x);
  }
  return out;
}

}  // namespace netbf
