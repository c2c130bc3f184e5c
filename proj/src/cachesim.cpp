#include "mergepath/cachesim.hpp"

#include <algorithm>
#include <istream>
#include <list>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace mergepath {

namespace {

void check_geometry(const cache_config &cfg) {
  if (cfg.capacity == 0 || cfg.line_size == 0 || cfg.associativity == 0)
    throw std::invalid_argument("cache: capacity, line size and "
                                "associativity must be positive");
  if (cfg.capacity % cfg.line_size != 0)
    throw std::invalid_argument("cache: capacity not a multiple of line size");
  const std::size_t lines = cfg.capacity / cfg.line_size;
  if (lines % cfg.associativity != 0)
    throw std::invalid_argument("cache: line count not a multiple of "
                                "associativity");
}

void check_overlap(const std::vector<mem_access> &trace,
                   const cache_config &cfg) {
  struct extent {
    bool used = false;
    std::uint64_t max_index = 0;
  };
  extent ext[3];
  for (const auto &acc : trace) {
    extent &e = ext[static_cast<std::size_t>(acc.array)];
    e.used = true;
    e.max_index = std::max(e.max_index, acc.index);
  }
  struct range {
    std::uint64_t lo, hi; // [lo, hi)
  };
  std::vector<range> ranges;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!ext[i].used)
      continue;
    const std::uint64_t base = cfg.base(static_cast<array_id>(i));
    ranges.push_back({base, base + ext[i].max_index + 1});
  }
  for (std::size_t i = 0; i < ranges.size(); ++i)
    for (std::size_t j = i + 1; j < ranges.size(); ++j)
      if (ranges[i].lo < ranges[j].hi && ranges[j].lo < ranges[i].hi)
        throw std::invalid_argument("cache: array address ranges overlap");
}

// Fully-associative LRU of the same capacity, replayed in lockstep to
// attribute capacity misses. List front = most recent.
class fa_lru {
public:
  explicit fa_lru(std::size_t lines) : lines_(lines) {}

  bool access(std::uint64_t line) {
    auto it = where_.find(line);
    if (it != where_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return true;
    }
    order_.push_front(line);
    where_[line] = order_.begin();
    if (order_.size() > lines_) {
      where_.erase(order_.back());
      order_.pop_back();
    }
    return false;
  }

private:
  std::size_t lines_;
  std::list<std::uint64_t> order_;
  std::unordered_map<std::uint64_t, std::list<std::uint64_t>::iterator> where_;
};

} // namespace

cache_stats simulate(const std::vector<mem_access> &trace,
                     const cache_config &cfg) {
  check_geometry(cfg);
  check_overlap(trace, cfg);

  const std::size_t lines = cfg.capacity / cfg.line_size;
  const std::size_t n_sets = lines / cfg.associativity;

  struct way {
    std::uint64_t line = 0;
    std::uint64_t stamp = 0; // LRU: last use; FIFO: fill time
  };
  std::vector<std::vector<way>> sets(n_sets);
  for (auto &s : sets)
    s.reserve(cfg.associativity);

  fa_lru baseline(lines);
  std::unordered_set<std::uint64_t> touched;
  cache_stats st;
  std::uint64_t clock = 0;

  for (const auto &acc : trace) {
    ++clock;
    ++st.accesses;
    const std::uint64_t addr = cfg.base(acc.array) + acc.index;
    const std::uint64_t line = addr / cfg.line_size;
    auto &set = sets[line % n_sets];

    bool hit = false;
    for (auto &w : set) {
      if (w.line == line) {
        hit = true;
        if (cfg.policy == replacement::lru)
          w.stamp = clock;
        break;
      }
    }
    const bool fa_hit = baseline.access(line);
    const bool first = touched.insert(line).second;

    if (hit) {
      ++st.hits;
      continue;
    }
    ++st.misses;
    if (first)
      ++st.compulsory;
    else if (!fa_hit)
      ++st.capacity_misses;
    else
      ++st.conflict_misses;

    if (set.size() < cfg.associativity) {
      set.push_back({line, clock});
    } else {
      auto victim = std::min_element(
          set.begin(), set.end(),
          [](const way &l, const way &r) { return l.stamp < r.stamp; });
      *victim = {line, clock};
    }
  }
  return st;
}

std::string stats_to_json(const cache_stats &st) {
  nlohmann::json j{{"accesses", st.accesses},
                   {"hits", st.hits},
                   {"misses", st.misses},
                   {"compulsory", st.compulsory},
                   {"capacity", st.capacity_misses},
                   {"conflict", st.conflict_misses}};
  return j.dump();
}

void dump_trace(const std::vector<mem_access> &trace, std::ostream &out) {
  static constexpr char names[] = {'A', 'B', 'S'};
  for (const auto &acc : trace)
    out << names[static_cast<std::size_t>(acc.array)] << ' ' << acc.index
        << ' ' << (acc.kind == access_kind::read ? 'r' : 'w') << '\n';
}

std::vector<mem_access> load_trace(std::istream &in) {
  std::vector<mem_access> trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    std::istringstream ls(line);
    std::string arr, kind;
    std::uint64_t index = 0;
    if (!(ls >> arr >> index >> kind) || arr.size() != 1 || kind.size() != 1)
      throw std::invalid_argument("trace: malformed line " +
                                  std::to_string(lineno));
    mem_access acc;
    switch (arr[0]) {
    case 'A':
      acc.array = array_id::a;
      break;
    case 'B':
      acc.array = array_id::b;
      break;
    case 'S':
      acc.array = array_id::s;
      break;
    default:
      throw std::invalid_argument("trace: bad array on line " +
                                  std::to_string(lineno));
    }
    acc.index = index;
    if (kind[0] == 'r')
      acc.kind = access_kind::read;
    else if (kind[0] == 'w')
      acc.kind = access_kind::write;
    else
      throw std::invalid_argument("trace: bad access kind on line " +
                                  std::to_string(lineno));
    trace.push_back(acc);
  }
  return trace;
}

std::size_t shared_output_lines(const partition_set &points,
                                std::uint64_t base_s, std::size_t line_size) {
  if (line_size == 0)
    throw std::invalid_argument("shared_output_lines: line size must be "
                                "positive");
  if (points.size() < 2)
    return 0;
  // Worker w writes S[points[w].d(), points[w+1].d()); a line is shared
  // exactly when an interior boundary cuts through it, because the writer
  // of output d-1 always ends at boundary d.
  const std::size_t n = points.back().d();
  std::unordered_set<std::uint64_t> shared;
  for (std::size_t w = 1; w + 1 < points.size(); ++w) {
    const std::size_t d = points[w].d();
    if (d == 0 || d == n)
      continue;
    if ((base_s + d) % line_size != 0)
      shared.insert((base_s + d) / line_size);
  }
  return shared.size();
}

} // namespace mergepath
