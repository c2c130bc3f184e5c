#pragma once

// Parallel merge on top of the core path primitives.
//
// Regular variant: p workers, worker w binary-searches its start diagonal
// floor(w * N / p) and merges its segment; nothing is shared, no locks, no
// messages. Total partitioning cost is at most
// (p - 1) * (floor(log2(min(|A|, |B|) + 1)) + 2) element comparisons.
//
// Segmented variant: the output is produced in windows of L = floor(C / 3)
// elements so that the window's working set (its A-range, B-range and
// S-range) fits a cache of C elements. Within a window the active workers
// search window-local diagonals of the two L-capped sub-arrays; the local
// crossing equals the global one because the window's stretch of the merge
// path never leaves the L x L sub-grid. The next window's starting point is
// the last active worker's end position, handed over at the window barrier
// for zero extra comparisons.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mergepath/core.hpp"
#include "mergepath/thread_team.hpp"

namespace mergepath {

struct window_stats {
  std::size_t a_consumed = 0;
  std::size_t b_consumed = 0;
};

struct merge_stats {
  std::uint64_t partition_comparisons = 0;
  std::uint64_t merge_steps = 0; // one per output element
  std::vector<window_stats> windows; // segmented runs: one entry per window
};

struct segment_plan {
  std::size_t cache_elems = 0; // C
  std::size_t window_len = 0;  // L = C / 3
  std::size_t p_eff = 0;       // min(p, L)
  std::size_t iterations = 0;  // ceil(N / L)
  partition_set starting_points; // one per window; [0] = {0, 0}
};

namespace detail {

struct alignas(64) padded_u64 { // one counter per cache line
  std::uint64_t v = 0;
};

inline void check_merge_args(std::size_t p) {
  if (p == 0)
    throw std::invalid_argument("merge: worker count must be positive");
}

inline std::size_t window_of(std::size_t cache_elems) {
  if (cache_elems < 3)
    throw std::invalid_argument("merge: cache capacity must be at least 3");
  return cache_elems / 3;
}

// make_out(w, pos) yields worker w's output iterator at absolute output
// offset pos; array and checksum sinks share everything else.
template <typename T, typename Comp, typename MakeOut>
void parallel_merge_run(const merge_input<T> &in, thread_team &team,
                        Comp comp, merge_stats *stats, MakeOut make_out) {
  const std::size_t p = team.size();
  const std::size_t n = in.path_length();
  std::vector<padded_u64> cmp(p), steps(p);
  team.run([&](std::size_t w) {
    const std::size_t d_lo = diagonal_of(n, p, w);
    const std::size_t d_hi = diagonal_of(n, p, w + 1);
    if (d_lo == d_hi)
      return;
    const partition_point start = diagonal_search(in, d_lo, comp, &cmp[w].v);
    sequential_merge(in, start, d_hi - d_lo, make_out(w, d_lo), comp,
                     &steps[w].v);
  });
  if (stats) {
    for (std::size_t w = 0; w < p; ++w) {
      stats->partition_comparisons += cmp[w].v;
      stats->merge_steps += steps[w].v;
    }
  }
}

template <typename T, typename Comp, typename MakeOut>
void segmented_merge_run(const merge_input<T> &in, std::size_t cache_elems,
                         thread_team &team, Comp comp, merge_stats *stats,
                         MakeOut make_out) {
  const std::size_t L = window_of(cache_elems);
  const std::size_t p = team.size();
  const std::size_t n = in.path_length();
  const std::size_t na = in.a.size(), nb = in.b.size();
  const std::size_t iterations = (n + L - 1) / L;
  const std::size_t p_eff = p < L ? p : L;

  std::vector<padded_u64> cmp(p), steps(p);
  partition_point cur{0, 0}; // start of the current window
  partition_point next{0, 0}; // written by the window's last active worker
  if (stats)
    stats->windows.reserve(stats->windows.size() + iterations);

  team.run_phased(
      iterations,
      [&](std::size_t w, std::size_t) {
        const std::size_t d0 = cur.d();
        const std::size_t rest = n - d0;
        const std::size_t L_w = L < rest ? L : rest;
        const std::size_t p_w = p_eff < L_w ? p_eff : L_w;
        if (w >= p_w)
          return;
        const std::size_t a_rest = na - cur.a_off, b_rest = nb - cur.b_off;
        const merge_input<T> sub{
            in.a.subspan(cur.a_off, L_w < a_rest ? L_w : a_rest),
            in.b.subspan(cur.b_off, L_w < b_rest ? L_w : b_rest)};
        const std::size_t d_lo = diagonal_of(L_w, p_w, w);
        const std::size_t d_hi = diagonal_of(L_w, p_w, w + 1);
        const partition_point local =
            diagonal_search(sub, d_lo, comp, &cmp[w].v);
        const partition_point start{cur.a_off + local.a_off,
                                    cur.b_off + local.b_off};
        const partition_point end =
            sequential_merge(in, start, d_hi - d_lo, make_out(w, d0 + d_lo),
                             comp, &steps[w].v);
        if (w + 1 == p_w)
          next = end;
      },
      [&](std::size_t) {
        if (stats)
          stats->windows.push_back(
              {next.a_off - cur.a_off, next.b_off - cur.b_off});
        cur = next;
      });

  if (stats) {
    for (std::size_t w = 0; w < p; ++w) {
      stats->partition_comparisons += cmp[w].v;
      stats->merge_steps += steps[w].v;
    }
  }
}

} // namespace detail

// --- regular parallel merge ---

template <typename T, typename Comp = std::less<T>>
void parallel_merge_into(const merge_input<T> &in, std::span<T> out,
                         thread_team &team, Comp comp = {},
                         merge_stats *stats = nullptr) {
  MERGEPATH_REQUIRE(out.size() == in.path_length(),
                    "output size must equal |A| + |B|");
  T *base = out.data();
  detail::parallel_merge_run(in, team, comp, stats,
                             [base](std::size_t, std::size_t pos) {
                               return base + pos;
                             });
}

template <typename T, typename Comp = std::less<T>>
void parallel_merge_into(const merge_input<T> &in, std::span<T> out,
                         std::size_t p, Comp comp = {},
                         merge_stats *stats = nullptr) {
  detail::check_merge_args(p);
  thread_team team(p);
  parallel_merge_into(in, out, team, comp, stats);
}

template <typename T, typename Comp = std::less<T>>
std::vector<T> parallel_merge(const merge_input<T> &in, std::size_t p,
                              Comp comp = {}, merge_stats *stats = nullptr) {
  std::vector<T> out(in.path_length());
  parallel_merge_into(in, std::span<T>(out), p, comp, stats);
  return out;
}

// Register-sink variant: no output array, per-worker position-weighted
// checksums folded instead (combinable because output ranges are disjoint).
template <typename T, typename Comp = std::less<T>>
std::uint64_t parallel_merge_checksum(const merge_input<T> &in, std::size_t p,
                                      Comp comp = {},
                                      merge_stats *stats = nullptr) {
  detail::check_merge_args(p);
  thread_team team(p);
  std::vector<detail::padded_u64> sums(p);
  detail::parallel_merge_run(in, team, comp, stats,
                             [&sums](std::size_t w, std::size_t pos) {
                               return checksum_sink{&sums[w].v, pos};
                             });
  std::uint64_t total = 0;
  for (const auto &s : sums)
    total += s.v;
  return total;
}

// --- segmented parallel merge ---

template <typename T, typename Comp = std::less<T>>
void segmented_parallel_merge_into(const merge_input<T> &in, std::span<T> out,
                                   std::size_t cache_elems, thread_team &team,
                                   Comp comp = {},
                                   merge_stats *stats = nullptr) {
  MERGEPATH_REQUIRE(out.size() == in.path_length(),
                    "output size must equal |A| + |B|");
  T *base = out.data();
  detail::segmented_merge_run(in, cache_elems, team, comp, stats,
                              [base](std::size_t, std::size_t pos) {
                                return base + pos;
                              });
}

template <typename T, typename Comp = std::less<T>>
void segmented_parallel_merge_into(const merge_input<T> &in, std::span<T> out,
                                   std::size_t p, std::size_t cache_elems,
                                   Comp comp = {},
                                   merge_stats *stats = nullptr) {
  detail::check_merge_args(p);
  detail::window_of(cache_elems); // validate before spinning up the team
  thread_team team(p);
  segmented_parallel_merge_into(in, out, cache_elems, team, comp, stats);
}

template <typename T, typename Comp = std::less<T>>
std::vector<T> segmented_parallel_merge(const merge_input<T> &in,
                                        std::size_t p, std::size_t cache_elems,
                                        Comp comp = {},
                                        merge_stats *stats = nullptr) {
  std::vector<T> out(in.path_length());
  segmented_parallel_merge_into(in, std::span<T>(out), p, cache_elems, comp,
                                stats);
  return out;
}

template <typename T, typename Comp = std::less<T>>
std::uint64_t segmented_parallel_merge_checksum(const merge_input<T> &in,
                                                std::size_t p,
                                                std::size_t cache_elems,
                                                Comp comp = {},
                                                merge_stats *stats = nullptr) {
  detail::check_merge_args(p);
  detail::window_of(cache_elems);
  thread_team team(p);
  std::vector<detail::padded_u64> sums(p);
  detail::segmented_merge_run(in, cache_elems, team, comp, stats,
                              [&sums](std::size_t w, std::size_t pos) {
                                return checksum_sink{&sums[w].v, pos};
                              });
  std::uint64_t total = 0;
  for (const auto &s : sums)
    total += s.v;
  return total;
}

// Planning view of the segmented run: window geometry plus each window's
// starting point, found by searching the end-of-window diagonal of the
// L-capped sub-arrays (range <= L + 1 per search, so the whole plan stays
// within the segmented comparison envelope).
template <typename T, typename Comp = std::less<T>>
segment_plan plan_segments(const merge_input<T> &in, std::size_t p,
                           std::size_t cache_elems, Comp comp = {},
                           std::uint64_t *comparisons = nullptr) {
  detail::check_merge_args(p);
  const std::size_t L = detail::window_of(cache_elems);
  const std::size_t n = in.path_length();
  const std::size_t na = in.a.size(), nb = in.b.size();
  segment_plan plan;
  plan.cache_elems = cache_elems;
  plan.window_len = L;
  plan.p_eff = p < L ? p : L;
  plan.iterations = (n + L - 1) / L;
  plan.starting_points.reserve(plan.iterations);
  partition_point cur{0, 0};
  for (std::size_t k = 0; k < plan.iterations; ++k) {
    plan.starting_points.push_back(cur);
    if (k + 1 == plan.iterations)
      break;
    const std::size_t rest = n - cur.d();
    const std::size_t L_w = L < rest ? L : rest;
    const std::size_t a_rest = na - cur.a_off, b_rest = nb - cur.b_off;
    const merge_input<T> sub{
        in.a.subspan(cur.a_off, L_w < a_rest ? L_w : a_rest),
        in.b.subspan(cur.b_off, L_w < b_rest ? L_w : b_rest)};
    const partition_point local = diagonal_search(sub, L_w, comp, comparisons);
    cur.a_off += local.a_off;
    cur.b_off += local.b_off;
  }
  return plan;
}

} // namespace mergepath
