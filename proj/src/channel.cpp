#include "dcda/channel.hpp"

#include "dcda/errors.hpp"
#include "dcda/rng.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace dcda {

double ZoomSchedule::at(long t) const { return s0 * std::pow(beta, static_cast<double>(t)); }

void ZoomSchedule::validate() const {
  if (!(s0 > 0.0) || !std::isfinite(s0)) throw ConfigError("zoom schedule: s0 must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("zoom schedule: beta must lie in (0, 1)");
}

std::string describe(const ChannelModel& channel) {
  std::ostringstream os;
  os.precision(17);
  if (std::holds_alternative<PerfectChannel>(channel)) {
    os << "perfect";
  } else if (const auto* noisy = std::get_if<NoisyChannel>(&channel)) {
    os << "noisy(gamma2=" << noisy->gamma2 << ")";
  } else {
    const auto& q = std::get<QuantizedChannel>(channel);
    os << "quantized(s0=" << q.zoom.s0 << ",beta=" << q.zoom.beta << ")";
  }
  return os.str();
}

Vector transmit_perfect(const Vector& z) { return z; }

double noise_at(const NoisyChannel& model, int receiver, int sender, long t, int k, int d) {
  if (model.gamma2 == 0.0) return 0.0;
  const double sd = std::sqrt(model.gamma2 / static_cast<double>(d));
  return sd * rng::keyed_normal({model.seed, static_cast<std::uint64_t>(receiver),
                                 static_cast<std::uint64_t>(sender), static_cast<std::uint64_t>(t),
                                 static_cast<std::uint64_t>(k)});
}

Vector transmit_noisy(const Vector& z, int receiver, int sender, long t, const NoisyChannel& model) {
  Vector u = z;
  const int d = static_cast<int>(z.size());
  for (int k = 0; k < d; ++k) u[k] += noise_at(model, receiver, sender, t, k, d);
  return u;
}

double dither_at(std::uint64_t seed, int sender, int k, long t) {
  return rng::keyed_uniform({seed, static_cast<std::uint64_t>(sender), static_cast<std::uint64_t>(k),
                             static_cast<std::uint64_t>(t)}) -
         0.5;
}

std::int64_t quantize_delta(double delta, double scale, double dither) {
  if (!(scale > 0.0)) throw DomainError("quantize_delta: scale must be positive");
  const double level = std::floor(delta / scale + dither + 0.5);
  if (!std::isfinite(level) || std::abs(level) >= 0x1.0p62)
    throw NumericalError("quantize_delta: symbol overflow (delta " + std::to_string(delta) + ", scale " +
                         std::to_string(scale) + ")");
  return static_cast<std::int64_t>(level);
}

void write_message_log(std::ostream& os, const std::vector<QuantizedMessage>& log) {
  os << "t,sender,receiver,coordinate,payload\n";
  for (const QuantizedMessage& msg : log)
    for (int r : msg.receivers)
      os << msg.t << ',' << msg.sender << ',' << r << ',' << msg.coordinate << ',' << msg.symbol << '\n';
}

}  // namespace dcda
