#pragma once

// Counter-based RNG (Philox4x32-10). Streams are addressed by
// (master seed, lane, stream index), so per-replication child streams are
// independent of scheduling and worker count.

#include <array>
#include <cstdint>

namespace pvmerge::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// One Philox4x32 block, 10 rounds.
Counter philox4x32(Counter ctr, Key key);

// Lane ids keep independent uses of the generator on disjoint streams.
// (One lane per subsystem; stream index = replication index within the lane.)
enum : std::uint32_t {
  kLaneSimulation = 1,
  kLaneMonteCarloThreshold = 2,
  kLaneIcIndependent = 3,
  kLaneIcComonotone = 4,
  kLaneStableCms = 5,
  kLaneGeneric = 6,
};

class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint32_t lane,
               std::uint32_t stream_index);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform draw strictly inside (0,1): ((x >> 11) + 0.5) * 2^-53.
  double uniform();

  /// Standard normal by inverse-CDF transform of uniform().
  double normal();

 private:
  void refill();

  Key key_;
  std::uint32_t stream_index_;
  std::uint32_t lane_;
  std::uint64_t block_ = 0;
  Counter buffer_{};
  int pos_ = 4;
};

}  // namespace pvmerge::rng
