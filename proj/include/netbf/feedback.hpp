#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "netbf/beamsolver.hpp"
#include "netbf/types.hpp"

namespace netbf {

/// b-bit uniform quantizer on log10 over [1e-3, 1e3]. Values outside the
/// range saturate. Supports up to 64 bits (uses x87 long double on x86-64).
class LogQuantizer {
 public:
  static constexpr double kLogLo = -3.0;
  static constexpr double kLogHi = 3.0;

  explicit LogQuantizer(int bits) : bits_(bits) {
    if (bits < 1 || bits > 64) throw std::invalid_argument("quantizer width must be 1..64 bits");
  }

  int bits() const { return bits_; }

  long double levels() const {
    return bits_ == 64 ? 18446744073709551615.0L : static_cast<long double>((std::uint64_t{1} << bits_) - 1);
  }

  std::uint64_t encode(double value) const {
    if (!(value > 0.0)) return 0;
    const long double q = (static_cast<long double>(std::log10(value)) - kLogLo) / (kLogHi - kLogLo);
    const long double scaled = std::clamp(q, 0.0L, 1.0L) * levels();
    return static_cast<std::uint64_t>(std::nearbyint(scaled));
  }

  double decode(std::uint64_t code) const {
    const long double q = static_cast<long double>(code) / levels();
    return static_cast<double>(std::pow(10.0L, kLogLo + (kLogHi - kLogLo) * q));
  }

  std::uint64_t max_code() const {
    return bits_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits_) - 1;
  }

 private:
  int bits_;
};

enum class FeedbackVariant : std::uint8_t { IndexList = 0, Threshold = 1 };

/// Receiver broadcast that lets each relay set its own power from local
/// channel knowledge. Indices are 0-based.
struct FeedbackMessage {
  FeedbackVariant variant = FeedbackVariant::IndexList;
  std::vector<std::size_t> full_power_indices;
  std::uint64_t lambda_code = 0;
  std::uint64_t d_code = 0;
  int b1 = 16;
  /// A threshold message was requested but the phi values tied across the
  /// full-power boundary, so an index list was sent instead.
  bool threshold_fallback = false;

  double lambda() const { return LogQuantizer(b1).decode(lambda_code); }
  double d() const { return LogQuantizer(b1).decode(d_code); }

  /// Broadcast payload: i0 * ceil(log2 R) + b1 bits for the index list, 2 b1
  /// for the threshold form.
  std::size_t payload_bits(std::size_t relay_count) const;
};

/// ceil(log2 R); zero for a single relay.
inline std::size_t index_bits(std::size_t relay_count) {
  std::size_t w = 0;
  while ((std::size_t{1} << w) < relay_count) ++w;
  return w;
}

inline std::size_t FeedbackMessage::payload_bits(std::size_t relay_count) const {
  if (variant == FeedbackVariant::Threshold) return 2 * static_cast<std::size_t>(b1);
  return full_power_indices.size() * index_bits(relay_count) + static_cast<std::size_t>(b1);
}

/// Full-power relay indices plus lambda_{i0}.
inline FeedbackMessage encode_index_list(const PowerAllocation& alloc, const SolverWorkspace& ws, int b1) {
  const LogQuantizer q(b1);
  FeedbackMessage msg;
  msg.variant = FeedbackVariant::IndexList;
  msg.b1 = b1;
  const std::size_t i0 = std::min(alloc.i0, ws.tau.size());
  msg.full_power_indices.assign(ws.tau.begin(), ws.tau.begin() + static_cast<std::ptrdiff_t>(i0));
  msg.lambda_code = std::isfinite(ws.lambda[i0]) ? q.encode(ws.lambda[i0]) : q.max_code();
  return msg;
}

/// lambda_{i0} plus a cut d with phi_{tau_{i0}} > d > phi_{tau_{i0+1}}, taken
/// as the geometric mean of the two. With every active relay at full power d
/// is half the smallest phi; with none, twice the largest.
inline FeedbackMessage encode_threshold(const PowerAllocation& alloc, const SolverWorkspace& ws, int b1) {
  const LogQuantizer q(b1);
  const std::size_t n = ws.tau.size();
  const std::size_t i0 = std::min(alloc.i0, n);
  if (n == 0) {
    FeedbackMessage msg;
    msg.variant = FeedbackVariant::Threshold;
    msg.b1 = b1;
    msg.d_code = q.max_code();
    return msg;
  }

  double upper = 0.0, lower = 0.0, d = 0.0;
  if (i0 == 0) {
    lower = ws.ordered_phi(0);
    upper = std::numeric_limits<double>::infinity();
    d = 2.0 * lower;
  } else if (i0 == n) {
    upper = ws.ordered_phi(n - 1);
    lower = 0.0;
    d = upper / 2.0;
  } else {
    upper = ws.ordered_phi(i0 - 1);
    lower = ws.ordered_phi(i0);
    if (!(upper > lower)) {
      FeedbackMessage msg = encode_index_list(alloc, ws, b1);
      msg.threshold_fallback = true;
      return msg;
    }
    d = std::sqrt(upper * lower);
  }

  FeedbackMessage msg;
  msg.variant = FeedbackVariant::Threshold;
  msg.b1 = b1;
  msg.lambda_code = std::isfinite(ws.lambda[i0]) ? q.encode(ws.lambda[i0]) : q.max_code();
  // Prefer a neighbouring code if rounding pushed d out of its bracket.
  std::uint64_t code = q.encode(d);
  auto inside = [&](std::uint64_t c) {
    const double v = q.decode(c);
    return v > lower && v < upper;
  };
  if (!inside(code)) {
    if (code > 0 && inside(code - 1))
      --code;
    else if (code < q.max_code() && inside(code + 1))
      ++code;
  }
  msg.d_code = code;
  return msg;
}

/// Relay-side rule: full power when named in the list (or phi_j > d), else
/// alpha_j = min(1, lambda phi_j). Only the relay's own channels are used.
inline double relay_apply(const FeedbackMessage& msg, std::size_t own_index, double f_mag, double g_mag, double P0,
                          double Pj) {
  if (msg.b1 < 1 || msg.b1 > 64) throw ProtocolError("invalid quantizer width in feedback message");
  const auto phi = phi_statistic(f_mag, g_mag, P0, Pj);
  if (!phi || *phi == 0.0) return 0.0;
  switch (msg.variant) {
    case FeedbackVariant::IndexList:
      if (std::find(msg.full_power_indices.begin(), msg.full_power_indices.end(), own_index) !=
          msg.full_power_indices.end())
        return 1.0;
      break;
    case FeedbackVariant::Threshold:
      if (*phi > msg.d()) return 1.0;
      break;
    default:
      throw ProtocolError("unknown feedback variant");
  }
  return std::clamp(msg.lambda() * *phi, 0.0, 1.0);
}

/// Every relay applies the broadcast independently.
inline std::vector<double> reconstruct_allocation(const FeedbackMessage& msg, const ChannelRealization& ch,
                                                  const PowerBudget& budget) {
  std::vector<double> alpha(ch.relay_count());
  for (std::size_t j = 0; j < alpha.size(); ++j)
    alpha[j] = relay_apply(msg, j, std::abs(ch.f[j]), std::abs(ch.g[j]), budget.P0, budget.P[j]);
  return alpha;
}

namespace detail {

class BitWriter {
 public:
  void put(std::uint64_t value, std::size_t width) {
    for (std::size_t k = width; k-- > 0;) {
      if (bit_ % 8 == 0) bytes_.push_back(0);
      if ((value >> k) & 1U) bytes_.back() |= static_cast<std::uint8_t>(0x80U >> (bit_ % 8));
      ++bit_;
    }
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bit_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint64_t get(std::size_t width) {
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < width; ++k) {
      if (bit_ / 8 >= bytes_.size()) throw ProtocolError("feedback message truncated");
      v = (v << 1) | ((bytes_[bit_ / 8] >> (7 - bit_ % 8)) & 1U);
      ++bit_;
    }
    return v;
  }
  std::size_t bytes_consumed() const { return (bit_ + 7) / 8; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t bit_ = 0;
};

}  // namespace detail

/// Wire layout: variant tag (1 byte), index count (1 byte), then a big-endian
/// bit stream of ceil(log2 R)-bit indices, the b1-bit lambda code and, for
/// the threshold form, the b1-bit d code; zero padded to a whole byte.
inline std::vector<std::uint8_t> serialize(const FeedbackMessage& msg, std::size_t relay_count) {
  if (relay_count == 0 || relay_count > 256) throw std::invalid_argument("relay count must be 1..256");
  if (msg.full_power_indices.size() > relay_count) throw std::invalid_argument("too many indices");
  std::vector<std::uint8_t> out{static_cast<std::uint8_t>(msg.variant),
                                static_cast<std::uint8_t>(msg.full_power_indices.size())};
  detail::BitWriter w;
  const std::size_t iw = index_bits(relay_count);
  for (std::size_t idx : msg.full_power_indices) {
    if (idx >= relay_count) throw std::invalid_argument("relay index out of range");
    w.put(idx, iw);
  }
  w.put(msg.lambda_code, static_cast<std::size_t>(msg.b1));
  if (msg.variant == FeedbackVariant::Threshold) w.put(msg.d_code, static_cast<std::size_t>(msg.b1));
  const auto body = w.take();
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

/// Inverse of serialize; R and b1 are system parameters known to every node.
inline FeedbackMessage deserialize(std::span<const std::uint8_t> bytes, std::size_t relay_count, int b1) {
  if (bytes.size() < 2) throw ProtocolError("feedback message shorter than its header");
  if (b1 < 1 || b1 > 64) throw ProtocolError("invalid quantizer width");
  FeedbackMessage msg;
  msg.b1 = b1;
  if (bytes[0] > 1) throw ProtocolError("unknown feedback variant tag");
  msg.variant = static_cast<FeedbackVariant>(bytes[0]);
  const std::size_t count = bytes[1];
  if (count > relay_count) throw ProtocolError("index count exceeds relay count");
  if (msg.variant == FeedbackVariant::Threshold && count != 0)
    throw ProtocolError("threshold message carries indices");

  detail::BitReader r(bytes.subspan(2));
  const std::size_t iw = index_bits(relay_count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>(r.get(iw));
    if (idx >= relay_count) throw ProtocolError("relay index out of range");
    if (std::find(msg.full_power_indices.begin(), msg.full_power_indices.end(), idx) != msg.full_power_indices.end())
      throw ProtocolError("duplicate relay index");
    msg.full_power_indices.push_back(idx);
  }
  msg.lambda_code = r.get(static_cast<std::size_t>(b1));
  if (msg.variant == FeedbackVariant::Threshold) msg.d_code = r.get(static_cast<std::size_t>(b1));
  if (r.bytes_consumed() != bytes.size() - 2) throw ProtocolError("trailing bytes in feedback message");
  return msg;
}

}  // namespace netbf
