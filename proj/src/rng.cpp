#include "mcsim/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mcsim {

namespace {

constexpr std::uint64_t kParity = 0x1BD11BDAA9FC1A22ull;  // Threefish C240

// Threefish-256 rotation constants, cycled over 8 rounds.
constexpr unsigned kRot[8][2] = {{14, 16}, {52, 57}, {23, 40}, {5, 37},
                                 {25, 33}, {46, 12}, {58, 22}, {32, 32}};

inline std::uint64_t rotl(std::uint64_t x, unsigned r) {
  return (x << r) | (x >> (64 - r));
}

}  // namespace

std::array<std::uint64_t, 4> threefry4x64(const RngKey& key,
                                          const RngCounter& ctr,
                                          unsigned rounds) {
  std::uint64_t ks[5];
  ks[4] = kParity;
  for (int i = 0; i < 4; ++i) {
    ks[i] = key.w[i];
    ks[4] ^= key.w[i];
  }

  std::array<std::uint64_t, 4> x = ctr.w;
  for (int i = 0; i < 4; ++i) x[i] += ks[i];

  for (unsigned d = 0; d < rounds; ++d) {
    x[0] += x[1];
    x[1] = rotl(x[1], kRot[d % 8][0]) ^ x[0];
    x[2] += x[3];
    x[3] = rotl(x[3], kRot[d % 8][1]) ^ x[2];
    std::swap(x[1], x[3]);
    if ((d & 3u) == 3u) {
      const unsigned inj = d / 4 + 1;
      for (int i = 0; i < 4; ++i) x[i] += ks[(inj + i) % 5];
      x[3] += inj;
    }
  }
  return x;
}

std::array<double, 4> cbprng_uniform4(const RngKey& key,
                                      const RngCounter& ctr) {
  const auto x = threefry4x64(key, ctr);
  // 53-bit mantissa mapped to [0,1)
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  return {double(x[0] >> 11) * scale, double(x[1] >> 11) * scale,
          double(x[2] >> 11) * scale, double(x[3] >> 11) * scale};
}

std::pair<double, double> normal_pair(double u1, double u2) {
  if (u1 <= 0.0) throw std::domain_error("normal_pair: u1 must be in (0,1]");
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

double normal_for(const RngKey& key, std::uint64_t n) {
  RngCounter ctr;
  ctr.w[0] = n >> 2;
  const auto x = threefry4x64(key, ctr);
  const unsigned pair = (n >> 1) & 1u;
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  // u1 in (0,1] so that log() never sees zero
  const double u1 = (double(x[2 * pair] >> 11) + 1.0) * scale;
  const double u2 = double(x[2 * pair + 1] >> 11) * scale;
  const auto [z0, z1] = normal_pair(u1, u2);
  return (n & 1u) ? z1 : z0;
}

double uniform_for(const RngKey& key, std::uint64_t n) {
  RngCounter ctr;
  ctr.w[0] = n >> 2;
  return cbprng_uniform4(key, ctr)[n & 3u];
}

}  // namespace mcsim
