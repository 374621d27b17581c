#pragma once

// Counter-based pseudorandom function (Philox4x32-10). Every random draw in
// the library is addressed by a key and a counter, so results do not depend on
// call order, thread count or platform.

#include <array>
#include <cstdint>
#include <string_view>

namespace rewardkit::prf {

using Block = std::array<std::uint32_t, 4>;

Block philox4x32(Block counter, std::uint64_t key);

/// Stable 64-bit FNV-1a hash for string identifiers.
std::uint64_t hash_id(std::string_view id);

/// Two-word counter in, uniform double in [0, 1) out (53-bit resolution).
double uniform(std::uint64_t key, std::uint64_t a, std::uint64_t b);

/// Cheap stateful view over the PRF for code that consumes many draws under
/// one key, e.g. one simulator episode.
class Stream {
 public:
  Stream(std::uint64_t key, std::uint64_t stream_id) : key_(key), stream_(stream_id) {}
  double next_uniform() { return uniform(key_, stream_, counter_++); }

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace rewardkit::prf
