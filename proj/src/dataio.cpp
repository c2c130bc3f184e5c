#include "mergepath/dataio.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mergepath {

namespace {

void put_u64_le(std::ostream &out, std::uint64_t v) {
  std::array<unsigned char, 8> b;
  for (int i = 0; i < 8; ++i)
    b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char *>(b.data()), 8);
}

std::uint64_t get_u64_le(std::istream &in) {
  std::array<unsigned char, 8> b;
  in.read(reinterpret_cast<char *>(b.data()), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

} // namespace

void write_keys_binary(const std::string &path,
                       const std::vector<std::int64_t> &keys) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path);
  out.write(keyfile_magic, sizeof keyfile_magic);
  put_u64_le(out, keys.size());
  for (std::int64_t k : keys)
    put_u64_le(out, static_cast<std::uint64_t>(k));
  if (!out)
    throw std::runtime_error("write failed: " + path);
}

void write_keys_text(const std::string &path,
                     const std::vector<std::int64_t> &keys) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path);
  for (std::int64_t k : keys)
    out << k << '\n';
  if (!out)
    throw std::runtime_error("write failed: " + path);
}

std::vector<std::int64_t> read_keys(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open: " + path);
  char head[sizeof keyfile_magic] = {};
  in.read(head, sizeof head);
  const std::size_t got = static_cast<std::size_t>(in.gcount());
  if (got == sizeof head &&
      std::memcmp(head, keyfile_magic, sizeof head) == 0) {
    const std::uint64_t count = get_u64_le(in);
    if (!in)
      throw std::runtime_error("truncated key file: " + path);
    std::vector<std::int64_t> keys;
    keys.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      const std::uint64_t v = get_u64_le(in);
      if (!in)
        throw std::runtime_error("truncated key file: " + path);
      keys.push_back(static_cast<std::int64_t>(v));
    }
    return keys;
  }
  // fall back to text: reparse from the start
  in.clear();
  in.seekg(0);
  std::vector<std::int64_t> keys;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    std::istringstream ls(line);
    std::int64_t v = 0;
    char extra = 0;
    if (!(ls >> v) || (ls >> extra))
      throw std::invalid_argument(path + ": bad integer on line " +
                                  std::to_string(lineno));
    keys.push_back(v);
  }
  return keys;
}

distribution parse_distribution(const std::string &name) {
  if (name == "uniform")
    return distribution::uniform;
  if (name == "all_equal")
    return distribution::all_equal;
  if (name == "disjoint_ranges")
    return distribution::disjoint_ranges;
  if (name == "interleaved")
    return distribution::interleaved;
  throw std::invalid_argument("unknown distribution: " + name);
}

const char *distribution_name(distribution dist) {
  switch (dist) {
  case distribution::uniform:
    return "uniform";
  case distribution::all_equal:
    return "all_equal";
  case distribution::disjoint_ranges:
    return "disjoint_ranges";
  case distribution::interleaved:
    return "interleaved";
  }
  return "?";
}

std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>
generate_pair(distribution dist, std::size_t na, std::size_t nb,
              std::uint64_t seed) {
  std::vector<std::int64_t> a(na), b(nb);
  switch (dist) {
  case distribution::uniform: {
    // small key range relative to n keeps duplicates common
    std::mt19937_64 rng(seed);
    const std::int64_t hi =
        static_cast<std::int64_t>(std::max<std::size_t>(4, (na + nb) / 2));
    std::uniform_int_distribution<std::int64_t> pick(0, hi - 1);
    for (auto &v : a)
      v = pick(rng);
    for (auto &v : b)
      v = pick(rng);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    break;
  }
  case distribution::all_equal:
    std::fill(a.begin(), a.end(), 7);
    std::fill(b.begin(), b.end(), 7);
    break;
  case distribution::disjoint_ranges: {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> low(0, (1 << 20) - 1);
    const std::int64_t shift = std::int64_t{1} << 40;
    for (auto &v : b)
      v = low(rng);
    for (auto &v : a)
      v = shift + low(rng);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    break;
  }
  case distribution::interleaved:
    for (std::size_t i = 0; i < na; ++i)
      a[i] = static_cast<std::int64_t>(2 * i);
    for (std::size_t j = 0; j < nb; ++j)
      b[j] = static_cast<std::int64_t>(2 * j + 1);
    break;
  }
  return {std::move(a), std::move(b)};
}

} // namespace mergepath
