#pragma once

// Key-file formats and input generators for the benchmark tool.
//
// Binary format: 8-byte magic "MPKB0001", u64 element count, then that many
// i64 keys, everything little-endian. Text format: one integer per line.
// Readers auto-detect the format from the magic.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mergepath {

inline constexpr char keyfile_magic[8] = {'M', 'P', 'K', 'B',
                                          '0', '0', '0', '1'};

// All throw std::runtime_error on I/O failure; read_keys additionally
// throws std::invalid_argument on unparsable text content.
void write_keys_binary(const std::string &path,
                       const std::vector<std::int64_t> &keys);
void write_keys_text(const std::string &path,
                     const std::vector<std::int64_t> &keys);
std::vector<std::int64_t> read_keys(const std::string &path);

enum class distribution : std::uint8_t {
  uniform,        // duplicate-heavy uniform draws, sorted
  all_equal,      // every key identical in both arrays
  disjoint_ranges, // every key of A greater than every key of B
  interleaved     // A gets the evens, B the odds
};

distribution parse_distribution(const std::string &name); // invalid_argument
const char *distribution_name(distribution dist);

// Deterministic: the same (dist, na, nb, seed) always yields the same pair
// of sorted arrays.
std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>
generate_pair(distribution dist, std::size_t na, std::size_t nb,
              std::uint64_t seed);

} // namespace mergepath
