#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "stad/types.hpp"

namespace stad {

/// splitmix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic random stream. Substreams are derived from a master seed,
/// a purpose label, and up to two integer indices, so trial-level streams
/// are independent of execution order and thread count.
///
/// All variate generation is hand-rolled on top of the raw 64-bit engine
/// output, so identical seeds produce identical streams on any platform.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string_view label,
            std::uint64_t index0 = 0, std::uint64_t index1 = 0);

  /// Uniform double in [0, 1).
  double uniform();

  /// Standard real normal, Box-Muller.
  double normal();

  /// Unit-mean exponential.
  double exponential();

  /// Circularly-symmetric standard complex normal: E|z|^2 = 1.
  Complex cnormal();

  /// Vector of iid cnormal entries.
  CVector cnormal_vector(Index p);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace stad
