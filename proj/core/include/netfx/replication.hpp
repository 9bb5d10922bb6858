#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace netfx {

/// Seed of replication `rep` derived from the run seed (splitmix64 finalizer),
/// so every replication owns an independent stream whatever worker runs it.
std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t rep);

inline std::mt19937_64 replication_rng(std::uint64_t seed, std::uint64_t rep) {
  return std::mt19937_64(replication_seed(seed, rep));
}

/// Number of workers used when 0 is requested: hardware concurrency, or the
/// NETFX_THREADS environment variable when set.
unsigned default_workers();

/// Calls body(rep) for rep = 0..reps-1 across `workers` threads (0 = default).
/// The body must write its result into a slot indexed by `rep`; callers then
/// reduce in rep order, which keeps results independent of the worker count.
/// The first exception thrown by any body is rethrown after all workers stop.
void for_each_replication(std::size_t reps, unsigned workers, const std::function<void(std::size_t)>& body);

}  // namespace netfx
