// Counter-based RNG for reproducible trajectory ensembles: Philox4x32-10.
// Each trajectory owns stream (seed, trajectory index); the k-th 128-bit
// block of a stream yields two doubles in (0,1), so results are independent
// of thread scheduling.
#pragma once

#include <array>
#include <cstdint>

namespace oqw {

// One Philox4x32-10 block: 10 rounds of the multiply-xor network with the
// Weyl key schedule applied between rounds.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    if (round < 9) {
      key[0] += W0;
      key[1] += W1;
    }
  }
  return ctr;
}

// Stream of uniforms in the open interval (0,1) for one trajectory.
// Counter layout: (block_lo, block_hi, traj_lo, traj_hi); key = seed.
// Each block gives two doubles: ((x0<<32 | x1) >> 11 + 1/2) * 2^-53 and the
// same from (x2, x3), so every value lies strictly inside (0,1).
class TrajectoryRng {
 public:
  TrajectoryRng(std::uint64_t seed, std::uint64_t trajectory)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        traj_lo_(static_cast<std::uint32_t>(trajectory)),
        traj_hi_(static_cast<std::uint32_t>(trajectory >> 32)) {}

  double uniform() {
    if (have_ == 0) {
      const auto x = philox4x32({static_cast<std::uint32_t>(block_),
                                 static_cast<std::uint32_t>(block_ >> 32), traj_lo_, traj_hi_},
                                key_);
      buf_[0] = to_unit(x[0], x[1]);
      buf_[1] = to_unit(x[2], x[3]);
      have_ = 2;
      ++block_;
    }
    return buf_[2 - have_--];
  }

 private:
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t v = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t traj_lo_, traj_hi_;
  std::uint64_t block_ = 0;
  double buf_[2] = {0.0, 0.0};
  int have_ = 0;
};

}  // namespace oqw
