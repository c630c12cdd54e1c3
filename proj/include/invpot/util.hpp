// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace invpot::util {

// Derives independent sub-seeds from a master seed and a purpose tag.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag);

// splitmix64 step, used as a small deterministic mixing function.
std::uint64_t splitmix64(std::uint64_t& state);

// Runs fn(begin, end) over [0, n) in fixed chunks. Chunk boundaries do not
// depend on the worker count, so any reduction done per chunk and combined
// in chunk order is deterministic.
void parallel_for_chunks(std::size_t n, std::size_t chunk,
                         const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

// Global worker count (default: hardware concurrency, capped at 8).
int worker_count();
void set_worker_count(int n);

// Shortest exact decimal representation of a double (round-trips bit-exactly).
std::string format_double(double v);

}  // namespace invpot::util
