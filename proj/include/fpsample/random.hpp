#pragma once

#include <cassert>
#include <concepts>
#include <cstdint>
#include <random>

namespace fpsample {

/// Anything that hands out uniform integers on [0, m).
///
/// All samplers in this library consume randomness exclusively through
/// `below(m)`. A scripted source can therefore walk every choice path of a
/// sampler and recover its exact output distribution.
template <class G>
concept UniformSource = requires(G& g, std::uint64_t m) {
  { g.below(m) } -> std::convertible_to<std::uint64_t>;
};

/// Seeded 64-bit Mersenne Twister stream.
///
/// A stream is identified by (seed, stream id); distinct stream ids give
/// independent streams for parallel blocks of work.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream)};
    engine_.seed(seq);
  }

  std::uint64_t below(std::uint64_t m) {
    assert(m > 0);
    std::uniform_int_distribution<std::uint64_t> dist(0, m - 1);
    return dist(engine_);
  }

 private:
  static std::uint32_t lo(std::uint64_t x) { return static_cast<std::uint32_t>(x); }
  static std::uint32_t hi(std::uint64_t x) { return static_cast<std::uint32_t>(x >> 32); }

  std::mt19937_64 engine_;
};

static_assert(UniformSource<RandomStream>);

}  // namespace fpsample
