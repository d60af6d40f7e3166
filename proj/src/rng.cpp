#include "pvmerge/rng.hpp"

#include "pvmerge/special_functions.hpp"

namespace pvmerge::rng {

namespace {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Counter philox4x32(Counter x, Key k) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(M0, x[0], hi0, lo0);
    mulhilo(M1, x[2], hi1, lo1);
    x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
    k[0] += W0;
    k[1] += W1;
  }
  return x;
}

RandomStream::RandomStream(std::uint64_t master_seed, std::uint32_t lane,
                           std::uint32_t stream_index)
    : key_{static_cast<std::uint32_t>(master_seed),
           static_cast<std::uint32_t>(master_seed >> 32)},
      stream_index_(stream_index),
      lane_(lane) {}

void RandomStream::refill() {
  buffer_ = philox4x32({static_cast<std::uint32_t>(block_),
                        static_cast<std::uint32_t>(block_ >> 32),
                        stream_index_, lane_},
                       key_);
  ++block_;
  pos_ = 0;
}

std::uint32_t RandomStream::next_u32() {
  if (pos_ == 4) refill();
  return buffer_[pos_++];
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t hi = next_u32();
  const std::uint64_t lo = next_u32();
  return (hi << 32) | lo;
}

double RandomStream::uniform() {
  // 53-bit mantissa offset by half a step: strictly inside (0,1)
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() { return special::normal_quantile(uniform()); }

}  // namespace pvmerge::rng
