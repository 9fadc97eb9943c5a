#pragma once

#include <cstdint>

namespace cylk {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
//
// A stream is identified by (seed, stream id). Draws within a stream are a
// pure function of (seed, stream, position), so independent streams can be
// consumed in any order, on any number of threads, and the overall result
// stays reproducible. Distribution samplers below consume the stream
// sequentially.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Derives a statistically unrelated stream from this one.
  RngStream substream(std::uint64_t id) const;

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  double uniform();                        // [0, 1), 53-bit resolution
  double uniform(double lo, double hi);    // [lo, hi)
  double normal();                         // standard normal (Box-Muller)
  double normal(double mean, double sd);
  double exponential(double rate);
  long long poisson(double mean);
  double gamma(double shape, double rate); // shape/rate parameterization
  std::size_t uniform_index(std::size_t n); // {0, ..., n-1}

 private:
  void refill();
  long long poisson_small(double mean);    // Knuth inversion, mean <= ~30

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::uint32_t buf_[4] = {0, 0, 0, 0};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 mixing step, used for stream derivation and config digests.
std::uint64_t mix64(std::uint64_t x);

}  // namespace cylk
