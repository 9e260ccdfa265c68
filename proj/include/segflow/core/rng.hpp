#pragma once

#include <array>
#include <cstdint>

namespace segflow {

// Philox4x32-10 block function (Salmon et al., SC'11). Pure function of
// (counter, key); this is what makes every stream reproducible regardless of
// how work is scheduled.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Standard normal quantile (Wichura, AS 241, PPND16). Relative accuracy ~1e-16
// on (0,1); only arithmetic in the central region, log/sqrt in the tails.
double normal_quantile(double u);

std::uint64_t splitmix64(std::uint64_t x);

// A reproducible random stream identified by (master_seed, stream_index).
// Draws are addressed, not consumed: normal(step, component) always returns
// the same value for the same stream, so a path can be replayed from any step.
class RngStream {
public:
  RngStream() = default;
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : master_seed_(master_seed), stream_index_(stream_index) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  // Independent sub-stream; child(k) of distinct k never collide in practice
  // (64-bit hash of the parent index and k).
  RngStream child(std::uint64_t k) const;

  // Uniform on the open interval (0,1) with 53 random bits.
  double uniform(std::uint64_t index) const;
  double normal(std::uint64_t step, std::uint32_t component, std::uint32_t dim) const;
  // Normals 2*b and 2*b+1 of the stream's normal sequence.
  std::array<double, 2> normal_pair(std::uint64_t b) const;

  bool operator==(const RngStream&) const = default;

private:
  std::array<std::uint32_t, 4> block(std::uint64_t block_index, std::uint32_t domain) const;

  std::uint64_t master_seed_ = 0;
  std::uint64_t stream_index_ = 0;
};

// Sequential gaussian source over one stream. Caches the current Philox block
// so consecutive draws cost half a block each.
class NormalSource {
public:
  explicit NormalSource(RngStream stream) : stream_(stream) {}

  // Normal number q in the stream's normal sequence (q = step * dim + component).
  double at(std::uint64_t q);

private:
  RngStream stream_;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  double cached_[2] = {0.0, 0.0};
};

} // namespace segflow
