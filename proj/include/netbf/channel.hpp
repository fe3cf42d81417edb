#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "netbf/rng.hpp"
#include "netbf/types.hpp"

namespace netbf {

enum class TopologyKind { UnitVariance, Triangle, Line, RandomDisk };

inline std::string_view to_string(TopologyKind k) {
  switch (k) {
    case TopologyKind::UnitVariance: return "UnitVariance";
    case TopologyKind::Triangle: return "Triangle";
    case TopologyKind::Line: return "Line";
    case TopologyKind::RandomDisk: return "RandomDisk";
  }
  return "?";
}

inline TopologyKind topology_kind_from_string(std::string_view s) {
  for (auto k : {TopologyKind::UnitVariance, TopologyKind::Triangle, TopologyKind::Line,
                 TopologyKind::RandomDisk})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown topology kind: " + std::string(s));
}

/// Network geometry plus path-loss exponent. Distances are in the same units
/// as tx_rx_distance; for RandomDisk the disk radius is relative to half the
/// transmitter-receiver distance.
struct Topology {
  TopologyKind kind = TopologyKind::UnitVariance;
  std::size_t relay_count = 1;
  double tx_rx_distance = 1.0;
  double disk_radius = 0.5;
  double path_loss_exponent = 0.0;

  static Topology unit_variance(std::size_t relays) {
    return {TopologyKind::UnitVariance, relays, 1.0, 0.5, 0.0};
  }
  static Topology triangle(std::size_t relays = 1, double exponent = 2.0) {
    return {TopologyKind::Triangle, relays, 1.0, 0.5, exponent};
  }
  static Topology line(std::size_t relays = 1, double exponent = 2.0, double distance = 2.0) {
    return {TopologyKind::Line, relays, distance, 0.5, exponent};
  }
  static Topology random_disk(std::size_t relays = 1, double radius = 0.5, double exponent = 2.0,
                              double distance = 2.0) {
    return {TopologyKind::RandomDisk, relays, distance, radius, exponent};
  }

  void validate() const {
    if (relay_count == 0) throw std::invalid_argument("relay_count must be >= 1");
    if (!(tx_rx_distance > 0.0)) throw std::invalid_argument("tx_rx_distance must be positive");
    if (!(path_loss_exponent >= 0.0)) throw std::invalid_argument("path-loss exponent must be >= 0");
    if (kind == TopologyKind::RandomDisk && !(disk_radius > 0.0 && disk_radius < 1.0))
      throw std::invalid_argument("disk radius must lie in (0,1)");
  }
};

/// Relay position inside the disk around the transmitter-receiver midpoint.
/// Lengths are normalized to a half-distance of 1.
struct RelayPlacement {
  double rho = 0.0;
  double theta = 0.0;
  double d_tx = 1.0;
  double d_rx = 1.0;
};

/// Amplitude scale distance^(-exponent/2); channel power falls as d^-exponent.
inline double path_loss_amplitude(double distance, double exponent) {
  if (!(distance > 0.0)) throw std::invalid_argument("distance must be positive");
  return std::pow(distance, -exponent / 2.0);
}

/// Placement from explicit uniform draws: rho = r*sqrt(x), theta in [0, pi).
inline RelayPlacement placement_from_uniforms(double r, double x, double theta) {
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("disk radius must lie in (0,1)");
  RelayPlacement p;
  p.rho = r * std::sqrt(x);
  p.theta = theta;
  const double c = 2.0 * p.rho * std::cos(theta);
  const double base = 1.0 + p.rho * p.rho;
  p.d_tx = std::sqrt(base - c);
  p.d_rx = std::sqrt(base + c);
  return p;
}

inline RelayPlacement sample_disk_placement(double r, StreamEngine& eng) {
  const double x = eng.uniform();
  const double theta = std::numbers::pi * eng.uniform();
  return placement_from_uniforms(r, x, theta);
}

inline RelayPlacement sample_disk_placement(double r, RngSeed seed) {
  StreamEngine eng(seed);
  return sample_disk_placement(r, eng);
}

/// One unit-variance Rayleigh block drawn from an existing engine.
inline ChannelRealization sample_rayleigh_one(std::size_t relay_count, bool with_dl, StreamEngine& eng) {
  if (relay_count == 0) throw std::invalid_argument("relay_count must be >= 1");
  ComplexGaussian cn;
  ChannelRealization ch;
  if (with_dl) ch.f0 = cn(eng);
  ch.f.resize(relay_count);
  ch.g.resize(relay_count);
  for (std::size_t i = 0; i < relay_count; ++i) {
    ch.f[i] = cn(eng);
    ch.g[i] = cn(eng);
  }
  return ch;
}

/// Independent unit-variance Rayleigh blocks; realization k uses sub-stream
/// rng.stream + k.
inline std::vector<ChannelRealization> sample_rayleigh(std::size_t realization_count, std::size_t relay_count,
                                                       bool with_dl, RngSeed rng) {
  if (relay_count == 0) throw std::invalid_argument("relay_count must be >= 1");
  std::vector<ChannelRealization> out;
  out.reserve(realization_count);
  for (std::size_t k = 0; k < realization_count; ++k) {
    StreamEngine eng({rng.seed, rng.stream + k});
    out.push_back(sample_rayleigh_one(relay_count, with_dl, eng));
  }
  return out;
}

/// Fading times path loss for the given geometry. The direct link is always
/// drawn so that schemes with and without it see the same relay gains.
inline ChannelRealization realize(const Topology& topo, StreamEngine& eng) {
  topo.validate();
  const std::size_t R = topo.relay_count;
  std::vector<double> d_tx(R), d_rx(R);
  const double half = topo.tx_rx_distance / 2.0;
  switch (topo.kind) {
    case TopologyKind::UnitVariance:
    case TopologyKind::Triangle:
      std::fill(d_tx.begin(), d_tx.end(), topo.kind == TopologyKind::Triangle ? topo.tx_rx_distance : 1.0);
      d_rx = d_tx;
      break;
    case TopologyKind::Line:
      std::fill(d_tx.begin(), d_tx.end(), half);
      std::fill(d_rx.begin(), d_rx.end(), half);
      break;
    case TopologyKind::RandomDisk:
      for (std::size_t i = 0; i < R; ++i) {
        const auto p = sample_disk_placement(topo.disk_radius, eng);
        d_tx[i] = half * p.d_tx;
        d_rx[i] = half * p.d_rx;
      }
      break;
  }

  ChannelRealization ch = sample_rayleigh_one(R, true, eng);
  if (topo.kind == TopologyKind::UnitVariance) return ch;

  const double eps = topo.path_loss_exponent;
  *ch.f0 *= path_loss_amplitude(topo.tx_rx_distance, eps);
  for (std::size_t i = 0; i < R; ++i) {
    ch.f[i] *= path_loss_amplitude(d_tx[i], eps);
    ch.g[i] *= path_loss_amplitude(d_rx[i], eps);
  }
  return ch;
}

inline ChannelRealization realize(const Topology& topo, RngSeed seed) {
  StreamEngine eng(seed);
  return realize(topo, eng);
}

}  // namespace netbf
