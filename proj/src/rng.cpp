#include "gspgs/rng.hpp"

#include <array>
#include <cmath>

namespace gspgs {

namespace {

// splitmix64 finaliser, used only to spread (seed, stream) into seed_seq words.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  const std::uint64_t a = mix(seed);
  const std::uint64_t b = mix(stream_id ^ 0x6a09e667f3bcc909ULL);
  std::array<std::uint32_t, 4> words{
      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::uniform() {
  ++position_;
  // libstdc++ can round generate_canonical up to exactly 1.
  const double u = std::generate_canonical<double, 53>(engine_);
  return u < 1.0 ? u : std::nextafter(1.0, 0.0);
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal() {
  ++position_;
  return normal_(engine_);
}

bool RngStream::bernoulli(double p) { return uniform() < p; }

RngStream RngStream::split(std::uint64_t index) const {
  return RngStream(mix(seed_ ^ mix(stream_id_)), index);
}

}  // namespace gspgs
