#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace netbf {

using cplx = std::complex<double>;

/// Raised when a brute-force oracle would exceed its evaluation budget.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed feedback message.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Not enough usable data to form an estimate (e.g. slope fit).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Complex gains for one coherence block. f[i] is transmitter->relay i,
/// g[i] is relay i->receiver, f0 the direct link when present.
struct ChannelRealization {
  std::optional<cplx> f0;
  std::vector<cplx> f;
  std::vector<cplx> g;

  std::size_t relay_count() const { return f.size(); }
  double f0_mag() const { return f0 ? std::abs(*f0) : 0.0; }
};

/// Per-node maximum powers, linear scale.
struct PowerBudget {
  double P0 = 1.0;
  std::vector<double> P;

  static PowerBudget uniform(double p, std::size_t relays) {
    return PowerBudget{p, std::vector<double>(relays, p)};
  }

  void validate(std::size_t relays) const {
    if (!(P0 > 0.0)) throw std::invalid_argument("P0 must be positive");
    if (P.size() != relays) throw std::invalid_argument("relay power count mismatch");
    for (double p : P)
      if (!(p > 0.0)) throw std::invalid_argument("relay powers must be positive");
  }
};

/// Power control coefficients. Transmitter sends alpha0*sqrt(P0) in step one
/// and beta0*sqrt(P0) in step two; relay i scales to alpha[i]^2 * P_i.
struct PowerAllocation {
  double alpha0 = 1.0;
  double beta0 = 0.0;
  std::vector<double> alpha;
  double snr = 0.0;
  /// Number of relays at full power in the threshold structure.
  std::size_t i0 = 0;
};

inline void check_channel(const ChannelRealization& ch) {
  if (ch.f.size() != ch.g.size())
    throw std::invalid_argument("f and g must have equal length");
}

inline void check_box(const std::vector<double>& alpha, std::size_t relays) {
  if (alpha.size() != relays) throw std::invalid_argument("alpha length mismatch");
  for (double a : alpha)
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("alpha outside [0,1]");
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace netbf
