#pragma once

#include <cstdint>

namespace fsrl {

/// Exact work counters for the Q-evaluation path. Monotone within a run.
struct OpCounters {
  std::uint64_t kernelEvals = 0;
  std::uint64_t multiplyAdds = 0;
  std::uint64_t activeEntries = 0;
  std::uint64_t decisions = 0;

  void reset() noexcept { *this = OpCounters{}; }
};

}  // namespace fsrl
