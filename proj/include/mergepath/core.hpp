#pragma once

// Merge Path core: the staircase path through the |A| x |B| grid that a
// stable two-way merge follows, cross-diagonal binary search for the point
// where the path crosses a given diagonal, and the sequential merge kernel
// that consumes a path segment.
//
// Conventions used throughout:
//   - 0-based offsets everywhere; a partition point (a_off, b_off) means
//     "a_off elements of A and b_off elements of B are already consumed".
//   - Cross diagonal d holds all points with a_off + b_off == d.
//   - Ties are broken toward A: equal elements of A precede those of B,
//     which makes every merge here stable when A is the left input.

#include <cassert>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace mergepath {

// Contract check that survives NDEBUG; these guard programmer errors
// (out-of-range indices and the like), not recoverable conditions.
#define MERGEPATH_REQUIRE(cond, what)                                       \
  do {                                                                      \
    if (!(cond)) {                                                          \
      std::fprintf(stderr, "contract violation: %s (%s:%d)\n", what,        \
                   __FILE__, __LINE__);                                     \
      std::abort();                                                         \
    }                                                                       \
  } while (0)

// Element carried through tests and the benchmark: ordering looks at key
// only, so tag survives as a stability witness.
struct element {
  std::int64_t key = 0;
  std::uint32_t tag = 0;

  // ordered by key alone; equality is bitwise so tests can tell apart
  // equal-key elements from different origins
  friend bool operator<(const element &l, const element &r) {
    return l.key < r.key;
  }
  friend bool operator==(const element &l, const element &r) {
    return l.key == r.key && l.tag == r.tag;
  }
};

using key_less = std::less<element>;

// Non-owning view of the two sorted inputs.
template <typename T> struct merge_input {
  std::span<const T> a;
  std::span<const T> b;

  std::size_t path_length() const { return a.size() + b.size(); }
};

// A point on the merge path. Invariant: it lies on diagonal a_off + b_off.
struct partition_point {
  std::size_t a_off = 0;
  std::size_t b_off = 0;

  std::size_t d() const { return a_off + b_off; }

  friend bool operator==(const partition_point &l, const partition_point &r) {
    return l.a_off == r.a_off && l.b_off == r.b_off;
  }
};

using partition_set = std::vector<partition_point>;

enum class path_step : std::uint8_t { down, right }; // down = consume A

// Merge matrix entry M[i, j] = 1 iff A[i] > B[j]. The matrix is never
// materialized; this predicate is the whole of it.
template <typename T, typename Comp = std::less<T>>
bool merge_matrix_entry(const merge_input<T> &in, std::size_t i,
                        std::size_t j, Comp comp = {}) {
  MERGEPATH_REQUIRE(i < in.a.size() && j < in.b.size(),
                    "merge_matrix_entry index out of range");
  return comp(in.b[j], in.a[i]);
}

// i-th equispaced diagonal for a p-way split of a path of length n.
inline std::size_t diagonal_of(std::size_t n, std::size_t p, std::size_t i) {
  return i * n / p;
}

namespace detail {

// Binary search on cross diagonal d for the smallest a_off whose matrix
// entry on the diagonal is 1; that a_off is where the path crosses.
// `probe(i, j)` sees every element comparison A[i] vs B[j], in order.
template <typename T, typename Comp, typename Probe>
partition_point diagonal_search_observed(const merge_input<T> &in,
                                         std::size_t d, Comp comp,
                                         Probe &&probe) {
  const std::size_t na = in.a.size(), nb = in.b.size();
  MERGEPATH_REQUIRE(d <= na + nb, "diagonal out of range");
  std::size_t lo = d > nb ? d - nb : 0;
  std::size_t hi = d < na ? d : na;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    probe(mid, d - 1 - mid);
    if (comp(in.b[d - 1 - mid], in.a[mid]))
      hi = mid; // A[mid] > B[d-1-mid]: crossing is at or left of mid
    else
      lo = mid + 1;
  }
  return {lo, d - lo};
}

} // namespace detail

// Where the merge path crosses diagonal d. One element comparison per
// probe, at most floor(log2(min(|A|, |B|) + 1)) + 1 of them; `comparisons`
// accumulates the count when non-null.
template <typename T, typename Comp = std::less<T>>
partition_point diagonal_search(const merge_input<T> &in, std::size_t d,
                                Comp comp = {},
                                std::uint64_t *comparisons = nullptr) {
  return detail::diagonal_search_observed(
      in, d, comp, [&](std::size_t, std::size_t) {
        if (comparisons)
          ++*comparisons;
      });
}

// p+1 partition points on the equispaced diagonals i * N / p. Segment
// lengths differ by at most one.
template <typename T, typename Comp = std::less<T>>
partition_set partition(const merge_input<T> &in, std::size_t p,
                        Comp comp = {}, std::uint64_t *comparisons = nullptr) {
  if (p == 0)
    throw std::invalid_argument("partition: p must be positive");
  const std::size_t n = in.path_length();
  partition_set points(p + 1);
  for (std::size_t i = 0; i <= p; ++i)
    points[i] = diagonal_search(in, diagonal_of(n, p, i), comp, comparisons);
  return points;
}

// Stable merge of `length` outputs starting at `start`; returns the path
// point reached. `steps` (when non-null) accumulates one count per output
// produced, the uniform per-step work of the merge loop.
template <typename T, typename OutIt, typename Comp = std::less<T>>
partition_point sequential_merge(const merge_input<T> &in,
                                 partition_point start, std::size_t length,
                                 OutIt out, Comp comp = {},
                                 std::uint64_t *steps = nullptr) {
  const T *a = in.a.data();
  const T *b = in.b.data();
  const std::size_t na = in.a.size(), nb = in.b.size();
  MERGEPATH_REQUIRE(start.a_off <= na && start.b_off <= nb,
                    "merge start off the grid");
  if (length > in.path_length() - start.d())
    throw std::invalid_argument("sequential_merge: length overruns the path");

  std::size_t i = start.a_off, j = start.b_off;
  std::size_t remaining = length;
  while (remaining > 0 && i < na && j < nb) {
    if (comp(b[j], a[i]))
      *out++ = b[j++];
    else
      *out++ = a[i++]; // ties go to A
    --remaining;
  }
  for (; remaining > 0 && i < na; --remaining)
    *out++ = a[i++];
  for (; remaining > 0 && j < nb; --remaining)
    *out++ = b[j++];
  if (steps)
    *steps += length;
  return {i, j};
}

// Full path as an explicit move sequence; diagnostic tool, O(N) compares.
template <typename T, typename Comp = std::less<T>>
std::vector<path_step> path_trace(const merge_input<T> &in, Comp comp = {}) {
  const std::size_t na = in.a.size(), nb = in.b.size();
  std::vector<path_step> steps;
  steps.reserve(na + nb);
  std::size_t i = 0, j = 0;
  while (i < na || j < nb) {
    // move right only when A is exhausted or A[i] > B[j]
    const bool right = i == na || (j < nb && comp(in.b[j], in.a[i]));
    steps.push_back(right ? path_step::right : path_step::down);
    right ? ++j : ++i;
  }
  return steps;
}

// Order-sensitive checksum used by the register (no output array) merge
// mode: fold of position-weighted key hashes, so any reordering shows.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t checksum_key(std::uint64_t key) { return mix64(key); }

template <typename T> std::uint64_t key_of(const T &v) {
  return static_cast<std::uint64_t>(v);
}
inline std::uint64_t key_of(const element &v) {
  return static_cast<std::uint64_t>(v.key);
}

// Output iterator that folds instead of storing.
struct checksum_sink {
  std::uint64_t *sum;
  std::uint64_t pos;

  struct proxy {
    checksum_sink *s;
    template <typename T> void operator=(const T &v) const {
      *s->sum += (s->pos + 1) * checksum_key(key_of(v));
    }
  };

  proxy operator*() { return {this}; }
  checksum_sink &operator++() {
    ++pos;
    return *this;
  }
  checksum_sink operator++(int) {
    checksum_sink old = *this;
    ++pos;
    return old;
  }
};

template <typename T> std::uint64_t checksum_of(std::span<const T> out) {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < out.size(); ++i)
    sum += (i + 1) * checksum_key(key_of(out[i]));
  return sum;
}

} // namespace mergepath
