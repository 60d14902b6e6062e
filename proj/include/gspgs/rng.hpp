#pragma once

#include <cstdint>
#include <random>

namespace gspgs {

/// Seeded random stream. Streams built from the same (seed, stream_id) produce
/// the same variates; distinct stream ids give decorrelated sequences.
///
/// Not thread-safe: use one stream per thread.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  /// Number of variates drawn so far.
  std::uint64_t position() const noexcept { return position_; }

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal.
  double normal();
  /// True with probability p.
  bool bernoulli(double p);

  /// Derive an independent child stream (replication r of this stream).
  RngStream split(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t position_ = 0;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace gspgs
