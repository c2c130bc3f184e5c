#pragma once

// Set-associative cache simulator at element granularity. Addresses are
// element indices offset by a per-array base, so layouts (contiguous,
// deliberately conflicting, randomized) are part of the configuration.
// Misses are attributed three ways: compulsory (first touch of a line),
// capacity (the same access also misses in a fully-associative LRU cache
// of equal capacity replayed on the same trace), conflict (the remainder:
// real miss, fully-associative hit).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mergepath/core.hpp"

namespace mergepath {

enum class array_id : std::uint8_t { a, b, s };
enum class access_kind : std::uint8_t { read, write };

struct mem_access {
  array_id array = array_id::a;
  std::uint64_t index = 0; // element index within the array
  access_kind kind = access_kind::read;

  friend bool operator==(const mem_access &l, const mem_access &r) {
    return l.array == r.array && l.index == r.index && l.kind == r.kind;
  }
};

enum class replacement : std::uint8_t { lru, fifo };

struct cache_config {
  std::size_t capacity = 0;      // elements
  std::size_t line_size = 1;     // elements per line
  std::size_t associativity = 1; // ways per set
  replacement policy = replacement::lru;
  std::uint64_t base_a = 0; // element base address per array
  std::uint64_t base_b = 0;
  std::uint64_t base_s = 0;

  std::uint64_t base(array_id id) const {
    return id == array_id::a ? base_a : id == array_id::b ? base_b : base_s;
  }
};

struct cache_stats {
  std::uint64_t accesses = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t compulsory = 0;
  std::uint64_t capacity_misses = 0;
  std::uint64_t conflict_misses = 0;
};

// Replay a trace through the configured cache. Throws std::invalid_argument
// on bad geometry (capacity not a multiple of line size, lines not a
// multiple of associativity) or when the arrays' address ranges, taken from
// the trace's extents, overlap.
cache_stats simulate(const std::vector<mem_access> &trace,
                     const cache_config &config);

std::string stats_to_json(const cache_stats &stats);

// Text trace format, one access per line: "<A|B|S> <index> <r|w>".
void dump_trace(const std::vector<mem_access> &trace, std::ostream &out);
std::vector<mem_access> load_trace(std::istream &in); // throws on bad lines

// Number of output cache lines written by two or more workers of the given
// partitioning (the false-sharing surface of the regular parallel merge).
std::size_t shared_output_lines(const partition_set &points,
                                std::uint64_t base_s, std::size_t line_size);

} // namespace mergepath
