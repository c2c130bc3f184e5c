#include <doctest.h>

#include <algorithm>
#include <bit>
#include <random>

#include "mergepath/core.hpp"
#include "oracles.hpp"

using namespace mergepath;
using oracle::tagged;

namespace {

merge_input<element> view(const std::vector<element> &a,
                          const std::vector<element> &b) {
  return {std::span<const element>(a), std::span<const element>(b)};
}

} // namespace

TEST_CASE("merge matrix entries") {
  const auto a = tagged({1, 3, 5, 7});
  const auto b = tagged({2, 4, 6, 8});
  const auto in = view(a, b);
  CHECK(merge_matrix_entry(in, 1, 0)); // 3 > 2
  CHECK_FALSE(merge_matrix_entry(in, 0, 0)); // 1 > 2 is false
  CHECK_FALSE(merge_matrix_entry(in, 3, 3)); // 7 > 8 is false

  const auto eq = tagged({4});
  const auto in2 = view(eq, eq);
  CHECK_FALSE(merge_matrix_entry(in2, 0, 0)); // equal keys: not greater
}

TEST_CASE("merge matrix is monotone along every cross diagonal") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 50; ++round) {
    const auto a = oracle::random_sorted(rng() % 24, rng);
    const auto b = oracle::random_sorted(rng() % 24, rng);
    const auto in = view(a, b);
    const std::size_t n = in.path_length();
    for (std::size_t d = 1; d <= n; ++d) {
      const std::size_t lo = d > b.size() ? d - b.size() : 0;
      const std::size_t hi = std::min(d, a.size());
      bool seen_one = false;
      for (std::size_t x = lo; x < hi; ++x) {
        const bool one = merge_matrix_entry(in, x, d - 1 - x);
        if (seen_one)
          CHECK(one); // once entries turn 1 they stay 1 as x grows
        seen_one = seen_one || one;
      }
    }
  }
}

TEST_CASE("diagonal_search on worked examples") {
  const auto a = tagged({1, 3, 5, 7});
  const auto b = tagged({2, 4, 6, 8});
  CHECK(diagonal_search(view(a, b), 4) == partition_point{2, 2});

  // ties: all equal elements of A are consumed before any of B
  const auto ta = tagged({2, 2, 2});
  const auto tb = tagged({2, 2});
  CHECK(diagonal_search(view(ta, tb), 3) == partition_point{3, 0});

  const std::vector<element> empty;
  const auto eb = tagged({7, 8});
  CHECK(diagonal_search(view(empty, eb), 1) == partition_point{0, 1});

  const auto da = tagged({1, 2});
  const auto db = tagged({3, 4});
  CHECK(diagonal_search(view(da, db), 2) == partition_point{2, 0});
}

TEST_CASE("diagonal_search endpoints cost nothing") {
  const auto a = tagged({1, 3, 5});
  const auto b = tagged({2, 4});
  std::uint64_t cmp = 0;
  CHECK(diagonal_search(view(a, b), 0, key_less{}, &cmp) ==
        partition_point{0, 0});
  // d = N pins both offsets; the search interval is empty either way
  CHECK(diagonal_search(view(a, b), 5, key_less{}, &cmp) ==
        partition_point{3, 2});
  CHECK(cmp == 0);
}

TEST_CASE("diagonal_search agrees with both oracles on every diagonal") {
  std::mt19937_64 rng(23);
  for (int round = 0; round < 120; ++round) {
    const auto a = oracle::random_sorted(rng() % 40, rng);
    const auto b = oracle::random_sorted(rng() % 40, rng);
    const auto in = view(a, b);
    const std::size_t min_side = std::min(a.size(), b.size());
    const std::uint64_t per_search =
        static_cast<std::uint64_t>(std::bit_width(min_side + 1)) + 1;
    for (std::size_t d = 0; d <= in.path_length(); ++d) {
      std::uint64_t cmp = 0;
      const auto got = diagonal_search(in, d, key_less{}, &cmp);
      CAPTURE(round);
      CAPTURE(d);
      REQUIRE(got == oracle::diagonal_by_scan(in, d));
      REQUIRE(got == oracle::diagonal_by_prefix(a, b, d));
      REQUIRE(oracle::valid_split(in, got));
      REQUIRE(cmp <= per_search);
    }
  }
}

TEST_CASE("partition lands on equispaced diagonals with balanced segments") {
  const auto a = tagged({1, 3, 5, 7, 9, 11, 13, 15});
  const auto b = tagged({2, 4, 6, 8, 10, 12, 14, 16});
  const auto points = partition(view(a, b), 4);
  REQUIRE(points.size() == 5);
  CHECK(points[0] == partition_point{0, 0});
  CHECK(points[1] == partition_point{2, 2});
  CHECK(points[2] == partition_point{4, 4});
  CHECK(points[3] == partition_point{6, 6});
  CHECK(points[4] == partition_point{8, 8});

  std::mt19937_64 rng(37);
  for (int round = 0; round < 60; ++round) {
    const auto ra = oracle::random_sorted(rng() % 200, rng);
    const auto rb = oracle::random_sorted(rng() % 200, rng);
    const std::size_t p = 1 + rng() % 12;
    const auto pts = partition(view(ra, rb), p);
    REQUIRE(pts.size() == p + 1);
    std::size_t lo = SIZE_MAX, hi = 0;
    for (std::size_t w = 0; w < p; ++w) {
      CHECK(pts[w].d() == diagonal_of(ra.size() + rb.size(), p, w));
      const std::size_t len = pts[w + 1].d() - pts[w].d();
      lo = std::min(lo, len);
      hi = std::max(hi, len);
    }
    CHECK(hi - lo <= 1);
  }

  CHECK_THROWS_AS(partition(view(a, b), 0), std::invalid_argument);
}

TEST_CASE("sequential_merge matches the stable reference") {
  std::mt19937_64 rng(41);
  for (int round = 0; round < 80; ++round) {
    const auto a = oracle::random_sorted(rng() % 120, rng);
    const auto b = oracle::random_sorted(rng() % 120, rng);
    const auto in = view(a, b);
    std::vector<element> out(in.path_length());
    std::uint64_t steps = 0;
    const auto end = sequential_merge(in, {0, 0}, out.size(), out.begin(),
                                      key_less{}, &steps);
    CHECK(end == partition_point{a.size(), b.size()});
    CHECK(steps == out.size());
    REQUIRE(out == oracle::merge_ref(a, b));
  }
}

TEST_CASE("sequential_merge stability: equal keys keep A first, tags intact") {
  const auto a = tagged({5, 5, 5}, 100);
  const auto b = tagged({5, 5}, 200);
  std::vector<element> out(5);
  sequential_merge(view(a, b), {0, 0}, 5, out.begin(), key_less{});
  const std::vector<element> want = {
      {5, 100}, {5, 101}, {5, 102}, {5, 200}, {5, 201}};
  CHECK(out == want);
}

TEST_CASE("sequential_merge segments concatenate to the full merge") {
  std::mt19937_64 rng(43);
  for (int round = 0; round < 40; ++round) {
    const auto a = oracle::random_sorted(rng() % 100, rng);
    const auto b = oracle::random_sorted(rng() % 100, rng);
    const auto in = view(a, b);
    const std::size_t p = 1 + rng() % 7;
    const auto pts = partition(in, p);
    std::vector<element> out(in.path_length());
    for (std::size_t w = 0; w < p; ++w) {
      const std::size_t len = pts[w + 1].d() - pts[w].d();
      const auto end = sequential_merge(in, pts[w], len,
                                        out.begin() + pts[w].d(), key_less{});
      CHECK(end == pts[w + 1]);
    }
    REQUIRE(out == oracle::merge_ref(a, b));
  }
}

TEST_CASE("sequential_merge rejects overruns") {
  const auto a = tagged({1, 2});
  const auto b = tagged({3});
  std::vector<element> out(4);
  CHECK_THROWS_AS(
      sequential_merge(view(a, b), {1, 0}, 3, out.begin(), key_less{}),
      std::invalid_argument);
  // zero-length segment anywhere is fine and moves nothing
  const auto end = sequential_merge(view(a, b), {2, 1}, 0, out.begin());
  CHECK(end == partition_point{2, 1});
}

TEST_CASE("path_trace worked example and counts") {
  const auto a = tagged({1, 3});
  const auto b = tagged({2});
  const auto steps = path_trace(view(a, b), key_less{});
  const std::vector<path_step> want = {path_step::down, path_step::right,
                                       path_step::down};
  CHECK(steps == want);
}

TEST_CASE("path_trace is consistent with diagonal_search and the merge") {
  std::mt19937_64 rng(47);
  for (int round = 0; round < 60; ++round) {
    const auto a = oracle::random_sorted(rng() % 48, rng);
    const auto b = oracle::random_sorted(rng() % 48, rng);
    const auto in = view(a, b);
    const auto steps = path_trace(in, key_less{});
    REQUIRE(steps.size() == in.path_length());

    std::size_t i = 0, j = 0;
    std::vector<element> replay;
    for (std::size_t d = 0; d < steps.size(); ++d) {
      // the point after d moves sits on diagonal d, at the search's split
      CHECK(partition_point{i, j} == diagonal_search(in, d, key_less{}));
      if (steps[d] == path_step::down)
        replay.push_back(a[i++]);
      else
        replay.push_back(b[j++]);
    }
    CHECK(i == a.size());
    CHECK(j == b.size());
    REQUIRE(replay == oracle::merge_ref(a, b));
  }
}

TEST_CASE("checksum sink reproduces the array checksum") {
  std::mt19937_64 rng(53);
  const auto a = oracle::random_sorted(50, rng);
  const auto b = oracle::random_sorted(31, rng);
  const auto in = view(a, b);
  std::vector<element> out(in.path_length());
  sequential_merge(in, {0, 0}, out.size(), out.begin(), key_less{});

  std::uint64_t sum = 0;
  sequential_merge(in, {0, 0}, out.size(), checksum_sink{&sum, 0}, key_less{});
  CHECK(sum == checksum_of(std::span<const element>(out)));

  // order sensitivity: swapping two distinct-key outputs changes the sum
  auto swapped = out;
  std::size_t x = 0;
  while (x + 1 < swapped.size() && swapped[x].key == swapped[x + 1].key)
    ++x;
  if (x + 1 < swapped.size()) {
    std::swap(swapped[x], swapped[x + 1]);
    CHECK(checksum_of(std::span<const element>(swapped)) != sum);
  }
}
