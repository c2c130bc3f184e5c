#pragma once

// Memory traces of the merge variants, serialized into one canonical order
// so the cache simulator sees a deterministic access stream.
//
// Model (element granularity): every consumed element is fetched exactly
// once per segment. A worker's segment opens with a prologue that reads the
// standing head of each side still in play, then each output step writes
// S[pos] and, when another comparison or copy will follow, reads the
// consumed side's next element (the lookahead fetch). Diagonal-search
// probes read the two elements they compare, A side first.
//
// Canonical interleaving: the regular parallel variant emits every
// partition-search probe (round-robin across workers, probe by probe)
// before any merge access. The segmented variant emits, window by window,
// worker 0's op groups first and then round-robins across the remaining
// active workers, each in its own program order (probes, prologue, steps).
//
// Touch mode (segmented) models the LRU workaround. Plain LRU mis-ranks a
// standing input element that keeps losing comparisons: its line ages while
// the winning side and the output stay fresh, so it gets evicted right
// before the next window re-reads it. Touch mode adds two kinds of reads:
// at every window boundary it re-touches the lines still holding unconsumed
// input elements (head through the highest index read so far, per side)
// before the window fetches anything new, and before a lookahead fetch that
// opens a new cache line it re-reads the other side's most recently read
// line. At single-element lines the per-step cost grows from two accesses
// to about three.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mergepath/cachesim.hpp"
#include "mergepath/core.hpp"
#include "mergepath/parallel.hpp"

namespace mergepath {

struct trace_spec {
  enum class kind : std::uint8_t { sequential, parallel, segmented };
  kind variant = kind::sequential;
  std::size_t p = 1;           // parallel and segmented
  std::size_t cache_elems = 0; // segmented: C
  bool touch = false;          // segmented merge steps refresh loser lines
  std::size_t line_size = 1;   // line geometry for touch detection
  std::uint64_t base_a = 0;    // addresses only matter to touch detection
  std::uint64_t base_b = 0;
};

namespace detail {

using opgroup = std::vector<mem_access>;

// Emits a segment's prologue and step groups; returns the end point.
template <typename T, typename Comp>
partition_point trace_segment(const merge_input<T> &in, partition_point start,
                              std::size_t len, std::size_t out_pos,
                              const trace_spec &spec, Comp comp,
                              std::vector<opgroup> &groups) {
  const std::size_t na = in.a.size(), nb = in.b.size();
  std::size_t i = start.a_off, j = start.b_off;
  if (len == 0)
    return start;

  struct side_state {
    bool have = false;
    std::uint64_t idx = 0;
  };
  side_state last_a, last_b;

  opgroup pro;
  if (i < na) {
    pro.push_back({array_id::a, i, access_kind::read});
    last_a = {true, i};
  }
  if (j < nb) {
    pro.push_back({array_id::b, j, access_kind::read});
    last_b = {true, j};
  }
  groups.push_back(std::move(pro));

  for (std::size_t t = 0; t < len; ++t) {
    opgroup g;
    bool take_b;
    if (i < na && j < nb)
      take_b = comp(in.b[j], in.a[i]);
    else
      take_b = i == na;
    g.push_back({array_id::s, out_pos + t, access_kind::write});
    std::size_t next;
    bool have_next;
    if (take_b) {
      ++j;
      next = j;
      have_next = j < nb;
    } else {
      ++i;
      next = i;
      have_next = i < na;
    }
    if (t + 1 < len && have_next) {
      const std::uint64_t addr =
          (take_b ? spec.base_b : spec.base_a) + next;
      if (spec.touch && addr % spec.line_size == 0) {
        const side_state &other = take_b ? last_a : last_b;
        if (other.have)
          g.push_back({take_b ? array_id::a : array_id::b, other.idx,
                       access_kind::read});
      }
      g.push_back(
          {take_b ? array_id::b : array_id::a, next, access_kind::read});
      (take_b ? last_b : last_a) = side_state{true, next};
    }
    groups.push_back(std::move(g));
  }
  return {i, j};
}

inline void round_robin(std::vector<std::vector<opgroup>> &workers,
                        std::vector<mem_access> &out) {
  std::size_t remaining = 0;
  for (const auto &w : workers)
    remaining += w.size();
  std::vector<std::size_t> pos(workers.size(), 0);
  while (remaining > 0) {
    for (std::size_t w = 0; w < workers.size(); ++w) {
      if (pos[w] == workers[w].size())
        continue;
      for (const auto &acc : workers[w][pos[w]])
        out.push_back(acc);
      ++pos[w];
      --remaining;
    }
  }
}

} // namespace detail

template <typename T, typename Comp = std::less<T>>
std::vector<mem_access> trace_merge(const merge_input<T> &in,
                                    const trace_spec &spec, Comp comp = {}) {
  if (spec.line_size == 0)
    throw std::invalid_argument("trace: line size must be positive");
  const std::size_t n = in.path_length();
  std::vector<mem_access> out;

  switch (spec.variant) {
  case trace_spec::kind::sequential: {
    std::vector<detail::opgroup> groups;
    detail::trace_segment(in, {0, 0}, n, 0, spec, comp, groups);
    for (const auto &g : groups)
      out.insert(out.end(), g.begin(), g.end());
    return out;
  }

  case trace_spec::kind::parallel: {
    detail::check_merge_args(spec.p);
    const std::size_t p = spec.p;
    std::vector<std::vector<detail::opgroup>> probes(p), merges(p);
    for (std::size_t w = 0; w < p; ++w) {
      const std::size_t d_lo = diagonal_of(n, p, w);
      const std::size_t d_hi = diagonal_of(n, p, w + 1);
      if (d_lo == d_hi)
        continue;
      const partition_point start = detail::diagonal_search_observed(
          in, d_lo, comp, [&](std::size_t ai, std::size_t bi) {
            probes[w].push_back({{array_id::a, ai, access_kind::read},
                                 {array_id::b, bi, access_kind::read}});
          });
      detail::trace_segment(in, start, d_hi - d_lo, d_lo, spec, comp,
                            merges[w]);
    }
    detail::round_robin(probes, out);
    detail::round_robin(merges, out);
    return out;
  }

  case trace_spec::kind::segmented: {
    detail::check_merge_args(spec.p);
    const std::size_t L = detail::window_of(spec.cache_elems);
    const std::size_t p_eff = spec.p < L ? spec.p : L;
    const std::size_t na = in.a.size(), nb = in.b.size();
    struct high_mark {
      bool have = false;
      std::size_t idx = 0;
    };
    high_mark read_hi_a, read_hi_b; // highest input index read so far
    partition_point cur{0, 0};
    while (cur.d() < n) {
      const std::size_t rest = n - cur.d();
      const std::size_t L_w = L < rest ? L : rest;
      const std::size_t p_w = p_eff < L_w ? p_eff : L_w;
      const std::size_t a_rest = na - cur.a_off, b_rest = nb - cur.b_off;
      const merge_input<T> sub{
          in.a.subspan(cur.a_off, L_w < a_rest ? L_w : a_rest),
          in.b.subspan(cur.b_off, L_w < b_rest ? L_w : b_rest)};
      if (spec.touch) {
        // refresh the lines holding unconsumed input before the window
        // fetches anything new
        const auto touch_side = [&](array_id id, std::size_t head,
                                    const high_mark &hi, std::uint64_t base) {
          if (!hi.have || hi.idx < head)
            return;
          std::size_t idx = head;
          const std::uint64_t last = (base + hi.idx) / spec.line_size;
          for (std::uint64_t line = (base + head) / spec.line_size;
               line <= last; ++line) {
            out.push_back({id, idx, access_kind::read});
            idx = static_cast<std::size_t>((line + 1) * spec.line_size - base);
          }
        };
        touch_side(array_id::a, cur.a_off, read_hi_a, spec.base_a);
        touch_side(array_id::b, cur.b_off, read_hi_b, spec.base_b);
      }

      std::vector<std::vector<detail::opgroup>> workers(p_w);
      partition_point next = cur;
      for (std::size_t w = 0; w < p_w; ++w) {
        const std::size_t d_lo = diagonal_of(L_w, p_w, w);
        const std::size_t d_hi = diagonal_of(L_w, p_w, w + 1);
        const partition_point local = detail::diagonal_search_observed(
            sub, d_lo, comp, [&](std::size_t ai, std::size_t bi) {
              workers[w].push_back(
                  {{array_id::a, cur.a_off + ai, access_kind::read},
                   {array_id::b, cur.b_off + bi, access_kind::read}});
            });
        const partition_point start{cur.a_off + local.a_off,
                                    cur.b_off + local.b_off};
        const partition_point end =
            detail::trace_segment(in, start, d_hi - d_lo, cur.d() + d_lo,
                                  spec, comp, workers[w]);
        if (w + 1 == p_w)
          next = end;
      }
      const std::size_t emitted = out.size();
      detail::round_robin(workers, out);
      for (std::size_t k = emitted; k < out.size(); ++k) {
        const mem_access &acc = out[k];
        if (acc.kind != access_kind::read)
          continue;
        high_mark &hi = acc.array == array_id::a ? read_hi_a : read_hi_b;
        if (!hi.have || acc.index > hi.idx)
          hi = {true, acc.index};
      }
      cur = next;
    }
    return out;
  }
  }
  return out;
}

struct conflict_report {
  bool passed = false;
  cache_stats stats;
};

// Replays the segmented merge, tuned to the given cache, through that
// cache. With associativity a multiple of 3 each window's lines fit their
// sets, and the touch reads keep LRU from evicting a line a later window
// still needs, so every miss should be compulsory or capacity.
template <typename T, typename Comp = std::less<T>>
conflict_report verify_conflict_freedom(const merge_input<T> &in,
                                        std::size_t p,
                                        const cache_config &cfg,
                                        Comp comp = {}) {
  if (cfg.associativity % 3 != 0)
    throw std::invalid_argument(
        "conflict-freedom check needs associativity divisible by 3");
  trace_spec spec;
  spec.variant = trace_spec::kind::segmented;
  spec.p = p;
  spec.cache_elems = cfg.capacity;
  spec.touch = true;
  spec.line_size = cfg.line_size;
  spec.base_a = cfg.base_a;
  spec.base_b = cfg.base_b;
  const auto trace = trace_merge(in, spec, comp);
  conflict_report rep;
  rep.stats = simulate(trace, cfg);
  rep.passed = rep.stats.conflict_misses == 0;
  return rep;
}

// Ratio of segmented single-worker trace lengths with the touch workaround
// on versus off: about 1.5 at element-granular lines, near 1 once a line
// holds many elements.
template <typename T, typename Comp = std::less<T>>
double lru_touch_overhead(const merge_input<T> &in, std::size_t cache_elems,
                          std::size_t line_size, Comp comp = {}) {
  trace_spec spec;
  spec.variant = trace_spec::kind::segmented;
  spec.p = 1;
  spec.cache_elems = cache_elems;
  spec.line_size = line_size;
  spec.base_a = 0;
  spec.base_b = in.a.size();
  spec.touch = false;
  const auto off = trace_merge(in, spec, comp);
  if (off.empty())
    return 1.0;
  spec.touch = true;
  const auto on = trace_merge(in, spec, comp);
  return static_cast<double>(on.size()) / static_cast<double>(off.size());
}

} // namespace mergepath
