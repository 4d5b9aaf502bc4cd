#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace spinoct {

/// splitmix64-style mixing for deriving independent per-row seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

/// FNV-1a over a byte string (config hashing).
std::uint64_t fnv1a_hash(const std::string& text);

/// Deterministic double formatting shared by all tabular outputs.
std::string format_double(double value);

/// Runs fn(0..n-1) on up to `jobs` worker threads. Results must be written
/// to pre-sized slots by index; the first exception thrown by any worker is
/// rethrown after all workers finish. jobs <= 1 runs inline.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace spinoct
