#pragma once

#include "dcda/prox.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace dcda {

// Geometric zooming sequence s(t) = s0 * beta^t, known to every node in advance.
struct ZoomSchedule {
  double s0 = 1.0;
  double beta = 0.995;

  double at(long t) const;
  void validate() const;
};

struct PerfectChannel {};

struct NoisyChannel {
  double gamma2 = 0.0;  // total noise power; each component has variance gamma2 / d
  std::uint64_t seed = 0;
};

struct QuantizedChannel {
  ZoomSchedule zoom;
  std::uint64_t seed = 0;
};

using ChannelModel = std::variant<PerfectChannel, NoisyChannel, QuantizedChannel>;

std::string describe(const ChannelModel& channel);

Vector transmit_perfect(const Vector& z);

// Additive Gaussian noise N(0, gamma2 / d) per component, keyed by (seed, i, j, t, k):
// the same link and time always sees the same realization.
double noise_at(const NoisyChannel& model, int receiver, int sender, long t, int k, int d);
Vector transmit_noisy(const Vector& z, int receiver, int sender, long t, const NoisyChannel& model);

// Dither in [-1/2, 1/2) keyed by (seed, sender, k, t). Non-subtractive: only the sender uses it.
double dither_at(std::uint64_t seed, int sender, int k, long t);

// Integer symbol for a dual increment: floor(delta / scale + dither + 1/2), i.e. dithered
// rounding. |scale * symbol - delta| < scale for every dither in [-1/2, 1/2).
std::int64_t quantize_delta(double delta, double scale, double dither);

// One broadcast symbol and what the sender actually meant to send. Receivers only
// ever see (t, sender, coordinate, symbol) plus the public scale.
struct QuantizedMessage {
  long t = 0;
  int sender = 0;
  int coordinate = 0;
  std::int64_t symbol = 0;
  double scale = 0.0;
  double delta = 0.0;
  std::vector<int> receivers;

  double reconstruction_error() const { return scale * static_cast<double>(symbol) - delta; }
};

// Per-sender quantizer bookkeeping: the last dual vector whose increment was encoded,
// and the running reconstruction sum of s(r) u(r) every receiver accumulates.
struct QuantizerState {
  Vector baseline;
  Vector reconstruction;
};

// CSV with columns t,sender,receiver,coordinate,payload (one row per receiver).
void write_message_log(std::ostream& os, const std::vector<QuantizedMessage>& log);

}  // namespace dcda
