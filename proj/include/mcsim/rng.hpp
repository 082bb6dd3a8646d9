#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace mcsim {

// Counter-based random numbers. Every sample is a pure function of a 256-bit
// key and a 256-bit counter, so streams never carry mutable state: a draw is
// addressed, not advanced. Keys identify a noise source (seed, owner id,
// stream index), counters identify the draw (step index, lane).
struct RngKey {
  std::array<std::uint64_t, 4> w{0, 0, 0, 0};
};

struct RngCounter {
  std::array<std::uint64_t, 4> w{0, 0, 0, 0};
};

inline RngKey make_key(std::uint64_t seed, std::uint64_t owner,
                       std::uint64_t unit, std::uint64_t stream) {
  return RngKey{{seed, owner, unit, stream}};
}

inline RngKey with_stream(RngKey k, std::uint64_t stream) {
  k.w[3] = stream;
  return k;
}

// Threefry-4x64 block function (12 rounds by default, per the Threefish-256
// rotation schedule). Returns four 64-bit words.
std::array<std::uint64_t, 4> threefry4x64(const RngKey& key,
                                          const RngCounter& ctr,
                                          unsigned rounds = 12);

// Four uniforms in [0,1) from one block invocation.
std::array<double, 4> cbprng_uniform4(const RngKey& key, const RngCounter& ctr);

// Box-Muller transform. u1 must lie in (0,1]; u1 == 0 raises std::domain_error
// (callers that map raw bits use the open-interval mapping below and never
// produce 0). u1 == 1 yields exactly (0,0).
std::pair<double, double> normal_pair(double u1, double u2);

// n-th standard-normal draw of the stream identified by `key`. Consecutive n
// consume the four uniforms of one block as two Box-Muller pairs, so blocks
// deplete uniformly: n -> block n/4, pair (n/2)%2, element n%2.
double normal_for(const RngKey& key, std::uint64_t n);

// n-th uniform draw in [0,1) of the stream (block n/4, lane n%4).
double uniform_for(const RngKey& key, std::uint64_t n);

}  // namespace mcsim
