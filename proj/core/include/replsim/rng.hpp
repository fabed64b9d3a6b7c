#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace replsim {

// Counter-based random streams. Every draw is a pure function of
// (seed, stream label, trial, request, tag, salt), so two runs that agree on
// those keys see identical randomness regardless of how many draws happen in
// between. Run results are therefore bit-identical for a fixed seed, and a
// simulation on a transformed instance can share coins with the original run
// by keying draws on the originating resource id.

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_id(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Labeled streams. One label per source of randomness in a run.
enum class Stream : std::uint64_t {
  TypeDraw = 0x7479,       // request type realization
  Consumption = 0x636f,    // consumption coin and release durations
  Reward = 0x7265,         // reserved for reward-only noise
  Replenishment = 0x7270,  // two-point replenishment coins
  Policy = 0x706f,         // algorithm-internal randomization
};

class DrawKit {
 public:
  DrawKit(std::uint64_t seed, std::uint64_t trial)
      : base_(mix64(mix64(seed ^ 0x52u) ^ mix64(trial ^ 0x9e1du))) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform(Stream s, std::uint64_t request, std::uint64_t tag = 0,
                 std::uint64_t salt = 0) const {
    std::uint64_t h = mix64(base_ ^ static_cast<std::uint64_t>(s));
    h = mix64(h ^ request);
    h = mix64(h ^ tag);
    h = mix64(h ^ salt);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  }

  // One shared coin per committed decision; consumption and coupled rewards
  // for that decision all read it.
  double decision_coin(int request) const {
    return uniform(Stream::Consumption, static_cast<std::uint64_t>(request));
  }

  // Release duration draw for one held unit, keyed by the root resource id so
  // that a batched copy and its parent be given the same duration.
  double release_uniform(int request, std::string_view root_id) const {
    return uniform(Stream::Consumption, static_cast<std::uint64_t>(request),
                   hash_id(root_id), 1);
  }

  double type_uniform(int request) const {
    return uniform(Stream::TypeDraw, static_cast<std::uint64_t>(request));
  }

  double replenishment_uniform(int request, std::string_view resource_id) const {
    return uniform(Stream::Replenishment, static_cast<std::uint64_t>(request),
                   hash_id(resource_id));
  }

  double policy_uniform(int request, std::uint64_t salt = 0) const {
    return uniform(Stream::Policy, static_cast<std::uint64_t>(request), salt);
  }

 private:
  std::uint64_t base_;
};

// Geometric duration on {1, 2, ...} with success probability p, by inversion.
inline int geometric_steps(double u, double p) {
  if (p >= 1.0) return 1;
  double t = std::log1p(-u) / std::log1p(-p);
  int steps = 1 + static_cast<int>(t);
  if (steps < 1 || t > 1e9) return 1000000000;  // beyond any horizon
  return steps;
}

}  // namespace replsim
