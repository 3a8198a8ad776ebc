#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>

namespace reserving {

using Rng = std::mt19937_64;

/// Independent generator for one job, derived from a master seed and a list
/// of tags (stage, replicate index, attempt...). Identical inputs give an
/// identical stream regardless of which thread runs the job.
Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

/// Number of worker threads to use when `requested` is 0.
std::size_t default_threads();

/// Runs body(0..count-1) on up to `threads` workers. The first exception
/// thrown by any job is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace reserving
