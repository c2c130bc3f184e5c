#pragma once

// Two stable merge sorts built on the parallel merges.
//
// parallel_merge_sort: bottom-up. Base runs of up to 32 elements are sorted
// by binary insertion sort (workers take disjoint runs), then runs are
// merged round by round, ping-ponging between two N-sized buffers. While a
// round has at least p pairs each worker merges whole pairs sequentially;
// once pairs get scarce the pairs are processed one at a time with every
// worker cooperating on the one merge.
//
// cache_efficient_parallel_sort: sorts blocks of L = floor(C / 3) elements
// one at a time (phase 1, whole team per block), then merges adjacent
// blocks level by level with the segmented parallel merge, one pair at a
// time (phase 2). An unpaired block is carried up unchanged.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "mergepath/core.hpp"
#include "mergepath/parallel.hpp"
#include "mergepath/thread_team.hpp"

namespace mergepath {

inline constexpr std::size_t sort_base_run = 32;

enum class sort_variant { plain, cache_efficient };

struct sort_plan {
  sort_variant variant = sort_variant::plain;
  std::size_t block_size = 0; // base run (plain) or floor(C / 3)
  std::size_t blocks = 0;     // ceil(N / block_size)
  std::size_t tree_levels = 0; // merge rounds over the blocks
};

struct sort_stats {
  std::size_t merge_rounds = 0; // plain: run rounds; cache-eff: phase-2 levels
};

inline sort_plan make_sort_plan(sort_variant variant, std::size_t n,
                                std::size_t cache_elems) {
  sort_plan plan;
  plan.variant = variant;
  plan.block_size = variant == sort_variant::plain
                        ? sort_base_run
                        : detail::window_of(cache_elems);
  plan.blocks = n == 0 ? 0 : (n + plan.block_size - 1) / plan.block_size;
  plan.tree_levels =
      plan.blocks <= 1 ? 0 : std::bit_width(plan.blocks - 1);
  return plan;
}

namespace detail {

template <typename T, typename Comp>
void insertion_sort(std::span<T> r, Comp comp) {
  for (std::size_t k = 1; k < r.size(); ++k) {
    T v = std::move(r[k]);
    auto pos = std::upper_bound(r.begin(), r.begin() + k, v, comp);
    std::move_backward(pos, r.begin() + k, r.begin() + k + 1);
    *pos = std::move(v);
  }
}

// One merge round src -> dst with runs of `width`; returns pair count.
// A trailing run with no partner is copied through unchanged.
template <typename T, typename Comp>
void merge_round(std::span<T> src, std::span<T> dst, std::size_t width,
                 thread_team &team, Comp comp) {
  const std::size_t len = src.size();
  const std::size_t stride = 2 * width;
  const std::size_t pairs = len > width ? (len + width - 1) / stride : 0;
  auto pair_input = [&](std::size_t pr) {
    const std::size_t i = pr * stride;
    const std::size_t bl = std::min(width, len - i - width);
    return merge_input<T>{std::span<const T>(src.data() + i, width),
                          std::span<const T>(src.data() + i + width, bl)};
  };
  if (pairs >= team.size()) {
    team.run([&](std::size_t w) {
      for (std::size_t pr = w; pr < pairs; pr += team.size()) {
        const merge_input<T> in = pair_input(pr);
        sequential_merge(in, {0, 0}, in.path_length(),
                         dst.data() + pr * stride, comp);
      }
    });
  } else {
    for (std::size_t pr = 0; pr < pairs; ++pr) {
      const merge_input<T> in = pair_input(pr);
      parallel_merge_into(in, dst.subspan(pr * stride, in.path_length()),
                          team, comp);
    }
  }
  const std::size_t tail = pairs * stride;
  if (tail < len)
    std::copy(src.begin() + tail, src.end(), dst.begin() + tail);
}

// Full bottom-up sort of `data`, using `aux` as scratch; the result always
// lands back in `data` (one extra copy when the round count is odd).
template <typename T, typename Comp>
std::size_t merge_sort_rounds(std::span<T> data, std::span<T> aux,
                              thread_team &team, Comp comp) {
  const std::size_t len = data.size();
  if (len <= 1)
    return 0;
  const std::size_t runs = (len + sort_base_run - 1) / sort_base_run;
  team.run([&](std::size_t w) {
    for (std::size_t r = w; r < runs; r += team.size()) {
      const std::size_t i = r * sort_base_run;
      insertion_sort(data.subspan(i, std::min(sort_base_run, len - i)), comp);
    }
  });
  std::span<T> src = data, dst = aux;
  std::size_t rounds = 0;
  for (std::size_t width = sort_base_run; width < len; width *= 2) {
    merge_round(src, dst, width, team, comp);
    std::swap(src, dst);
    ++rounds;
  }
  if (src.data() != data.data())
    std::copy(src.begin(), src.end(), data.begin());
  return rounds;
}

} // namespace detail

template <typename T, typename Comp = std::less<T>>
std::vector<T> parallel_merge_sort(std::span<const T> data, std::size_t p,
                                   Comp comp = {},
                                   sort_stats *stats = nullptr) {
  detail::check_merge_args(p);
  std::vector<T> out(data.begin(), data.end());
  if (out.size() <= 1)
    return out;
  std::vector<T> aux(out.size());
  thread_team team(p);
  const std::size_t rounds =
      detail::merge_sort_rounds(std::span<T>(out), std::span<T>(aux), team,
                                comp);
  if (stats)
    stats->merge_rounds += rounds;
  return out;
}

template <typename T, typename Comp = std::less<T>>
std::vector<T> cache_efficient_parallel_sort(std::span<const T> data,
                                             std::size_t p,
                                             std::size_t cache_elems,
                                             Comp comp = {},
                                             sort_stats *stats = nullptr) {
  detail::check_merge_args(p);
  const std::size_t block = detail::window_of(cache_elems);
  std::vector<T> out(data.begin(), data.end());
  if (out.size() <= 1)
    return out;
  const std::size_t len = out.size();
  std::vector<T> aux(len);
  thread_team team(p);

  // phase 1: independent block sorts, one block at a time
  for (std::size_t i = 0; i < len; i += block) {
    const std::size_t bl = std::min(block, len - i);
    detail::merge_sort_rounds(std::span<T>(out).subspan(i, bl),
                              std::span<T>(aux).subspan(i, bl), team, comp);
  }

  // phase 2: merge block pairs level by level, one pair at a time
  std::span<T> src(out), dst(aux);
  std::size_t levels = 0;
  for (std::size_t width = block; width < len; width *= 2) {
    const std::size_t stride = 2 * width;
    std::size_t i = 0;
    for (; i + width < len; i += stride) {
      const std::size_t bl = std::min(width, len - i - width);
      const merge_input<T> in{std::span<const T>(src.data() + i, width),
                              std::span<const T>(src.data() + i + width, bl)};
      segmented_parallel_merge_into(in, dst.subspan(i, in.path_length()),
                                    cache_elems, team, comp);
    }
    if (i < len)
      std::copy(src.begin() + i, src.end(), dst.begin() + i);
    std::swap(src, dst);
    ++levels;
  }
  if (stats)
    stats->merge_rounds += levels;
  if (src.data() != out.data())
    return std::vector<T>(src.begin(), src.end());
  return out;
}

} // namespace mergepath
