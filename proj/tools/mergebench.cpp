// Benchmark and inspection tool for the merge-path library.
//
// Subcommands: gen (input files), merge (timed merges against a reference),
// sort (timed sorts), cachesim (trace a merge through the cache model),
// report (re-render a saved report). Exit codes: 0 success, 1 usage,
// 2 I/O failure, 3 validation failure, 4 reference mismatch.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mergepath/cachesim.hpp"
#include "mergepath/core.hpp"
#include "mergepath/dataio.hpp"
#include "mergepath/parallel.hpp"
#include "mergepath/sort.hpp"
#include "mergepath/trace.hpp"

using json = nlohmann::json;
using ivec = std::vector<std::int64_t>;

namespace {

struct reference_mismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::size_t hw_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::vector<std::size_t> default_thread_sweep() {
  const std::size_t hw = hw_threads();
  std::vector<std::size_t> out;
  for (std::size_t p = 1; p <= hw; p *= 2)
    out.push_back(p);
  if (out.back() != hw)
    out.push_back(hw);
  return out;
}

ivec load_sorted(const std::string &path, const char *role) {
  ivec v = mergepath::read_keys(path);
  if (!std::is_sorted(v.begin(), v.end()))
    throw std::invalid_argument(std::string(role) + " input is not sorted: " +
                                path);
  return v;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double> &v) {
  double s = 0;
  for (double x : v)
    s += x;
  return v.empty() ? 0 : s / static_cast<double>(v.size());
}

template <typename Fn> double timed(Fn &&fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

struct bench_row {
  std::string op;      // merge | sort
  std::string variant; // regular | segmented | plain | cache_efficient
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t cache_elems = 0; // 0 when not applicable
  std::size_t reps = 0;
  double median_seconds = 0;
  double mean_seconds = 0;
  std::optional<double> speedup_vs_p1;
  std::optional<std::uint64_t> partition_comparisons;
  std::optional<std::uint64_t> merge_steps;
  std::optional<std::size_t> merge_rounds;
  bool verified = false;
};

json row_to_json(const bench_row &r) {
  json j{{"op", r.op},
         {"variant", r.variant},
         {"n", r.n},
         {"p", r.p},
         {"cache_elems", r.cache_elems},
         {"reps", r.reps},
         {"median_seconds", r.median_seconds},
         {"mean_seconds", r.mean_seconds},
         {"verified", r.verified}};
  j["speedup_vs_p1"] =
      r.speedup_vs_p1 ? json(*r.speedup_vs_p1) : json(nullptr);
  j["partition_comparisons"] =
      r.partition_comparisons ? json(*r.partition_comparisons) : json(nullptr);
  j["merge_steps"] = r.merge_steps ? json(*r.merge_steps) : json(nullptr);
  j["merge_rounds"] = r.merge_rounds ? json(*r.merge_rounds) : json(nullptr);
  return j;
}

void render_csv(const json &report, std::ostream &out) {
  out << "op,variant,n,p,cache_elems,reps,median_seconds,mean_seconds,"
         "speedup_vs_p1,partition_comparisons,merge_steps,merge_rounds,"
         "verified\n";
  for (const auto &r : report.at("rows")) {
    auto cell = [&](const char *key) -> std::string {
      const auto &v = r.at(key);
      if (v.is_null())
        return "";
      if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", v.get<double>());
        return buf;
      }
      if (v.is_boolean())
        return v.get<bool>() ? "true" : "false";
      if (v.is_string())
        return v.get<std::string>();
      return v.dump();
    };
    const char *cols[] = {"op",           "variant",
                          "n",            "p",
                          "cache_elems",  "reps",
                          "median_seconds", "mean_seconds",
                          "speedup_vs_p1", "partition_comparisons",
                          "merge_steps",  "merge_rounds",
                          "verified"};
    bool first = true;
    for (const char *c : cols) {
      if (!first)
        out << ',';
      out << cell(c);
      first = false;
    }
    out << '\n';
  }
}

void emit_report(const json &report, const std::string &format,
                 const std::string &out_path) {
  std::ostream *out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file)
      throw std::runtime_error("cannot open for writing: " + out_path);
    out = &file;
  }
  if (format == "csv")
    render_csv(report, *out);
  else
    *out << report.dump(2) << '\n';
  if (!*out)
    throw std::runtime_error("write failed");
}

void attach_speedups(std::vector<bench_row> &rows) {
  // p=1 baseline per (op, variant, cache_elems)
  for (auto &r : rows) {
    if (r.speedup_vs_p1)
      continue;
    for (const auto &base : rows) {
      if (base.p == 1 && base.op == r.op && base.variant == r.variant &&
          base.cache_elems == r.cache_elems) {
        if (r.median_seconds > 0)
          r.speedup_vs_p1 = base.median_seconds / r.median_seconds;
        break;
      }
    }
  }
}

// ---- merge subcommand ----

struct merge_args {
  std::string a_path, b_path;
  std::string variant = "regular";
  std::vector<std::size_t> threads;
  std::vector<std::size_t> cache_elems;
  std::size_t reps = 5;
  std::string sink = "memory";
  std::string format = "json";
  std::string out_path;
};

int run_merge(const merge_args &args) {
  const ivec a = load_sorted(args.a_path, "merge A");
  const ivec b = load_sorted(args.b_path, "merge B");
  const mergepath::merge_input<std::int64_t> in{a, b};
  const std::size_t n = in.path_length();

  ivec ref(n);
  std::merge(a.begin(), a.end(), b.begin(), b.end(), ref.begin());
  const std::uint64_t ref_sum =
      mergepath::checksum_of(std::span<const std::int64_t>(ref));

  auto threads = args.threads.empty() ? default_thread_sweep() : args.threads;
  std::vector<std::size_t> caches;
  if (args.variant == "segmented") {
    caches = args.cache_elems;
    if (caches.empty())
      for (std::size_t segments : {2, 5, 10})
        caches.push_back(std::max<std::size_t>(3, 3 * n / segments));
  } else {
    caches.push_back(0);
  }

  std::vector<bench_row> rows;
  ivec out(n);
  for (std::size_t cache : caches) {
    for (std::size_t p : threads) {
      if (p == 0)
        throw std::invalid_argument("merge: thread counts must be positive");
      bench_row row;
      row.op = "merge";
      row.variant = args.variant;
      row.n = n;
      row.p = p;
      row.cache_elems = cache;
      row.reps = args.reps;
      std::vector<double> times;
      mergepath::merge_stats stats;
      for (std::size_t rep = 0; rep < args.reps; ++rep) {
        bool ok = true;
        if (args.sink == "register") {
          std::uint64_t sum = 0;
          times.push_back(timed([&] {
            sum = args.variant == "segmented"
                      ? mergepath::segmented_parallel_merge_checksum(
                            in, p, cache, std::less<std::int64_t>{}, &stats)
                      : mergepath::parallel_merge_checksum(
                            in, p, std::less<std::int64_t>{}, &stats);
          }));
          ok = sum == ref_sum;
        } else {
          times.push_back(timed([&] {
            if (args.variant == "segmented")
              mergepath::segmented_parallel_merge_into(
                  in, std::span<std::int64_t>(out), p, cache,
                  std::less<std::int64_t>{}, &stats);
            else
              mergepath::parallel_merge_into(in, std::span<std::int64_t>(out),
                                             p, std::less<std::int64_t>{},
                                             &stats);
          }));
          ok = out == ref;
        }
        if (!ok)
          throw reference_mismatch("merge output diverged from the "
                                   "sequential reference");
      }
      // stats accumulated over reps; report one rep's share
      row.partition_comparisons = stats.partition_comparisons / args.reps;
      row.merge_steps = stats.merge_steps / args.reps;
      row.median_seconds = median_of(times);
      row.mean_seconds = mean_of(times);
      row.verified = true;
      rows.push_back(row);
    }
  }
  attach_speedups(rows);

  json report{{"meta",
               {{"tool", "mergebench"},
                {"op", "merge"},
                {"na", a.size()},
                {"nb", b.size()},
                {"sink", args.sink},
                {"hardware_threads", hw_threads()}}},
              {"rows", json::array()}};
  for (const auto &r : rows)
    report["rows"].push_back(row_to_json(r));
  emit_report(report, args.format, args.out_path);
  return 0;
}

// ---- sort subcommand ----

struct sort_args {
  std::string in_path;
  std::string variant = "plain";
  std::vector<std::size_t> threads;
  std::size_t cache_elems = 3 * 4096;
  std::size_t reps = 3;
  std::string format = "json";
  std::string out_path;
};

int run_sort(const sort_args &args) {
  const ivec data = mergepath::read_keys(args.in_path);
  ivec ref = data;
  std::sort(ref.begin(), ref.end());

  auto threads = args.threads.empty() ? default_thread_sweep() : args.threads;
  std::vector<bench_row> rows;
  for (std::size_t p : threads) {
    if (p == 0)
      throw std::invalid_argument("sort: thread counts must be positive");
    bench_row row;
    row.op = "sort";
    row.variant = args.variant;
    row.n = data.size();
    row.p = p;
    row.cache_elems = args.variant == "cache_efficient" ? args.cache_elems : 0;
    row.reps = args.reps;
    std::vector<double> times;
    mergepath::sort_stats stats;
    for (std::size_t rep = 0; rep < args.reps; ++rep) {
      ivec out;
      times.push_back(timed([&] {
        out = args.variant == "cache_efficient"
                  ? mergepath::cache_efficient_parallel_sort(
                        std::span<const std::int64_t>(data), p,
                        args.cache_elems, std::less<std::int64_t>{}, &stats)
                  : mergepath::parallel_merge_sort(
                        std::span<const std::int64_t>(data), p,
                        std::less<std::int64_t>{}, &stats);
      }));
      if (out != ref)
        throw reference_mismatch("sort output diverged from the reference");
    }
    row.merge_rounds = stats.merge_rounds / args.reps;
    row.median_seconds = median_of(times);
    row.mean_seconds = mean_of(times);
    row.verified = true;
    rows.push_back(row);
  }
  attach_speedups(rows);

  json report{{"meta",
               {{"tool", "mergebench"},
                {"op", "sort"},
                {"n", data.size()},
                {"variant", args.variant},
                {"hardware_threads", hw_threads()}}},
              {"rows", json::array()}};
  for (const auto &r : rows)
    report["rows"].push_back(row_to_json(r));
  emit_report(report, args.format, args.out_path);
  return 0;
}

// ---- cachesim subcommand ----

struct cachesim_args {
  std::string a_path, b_path;
  std::string trace_in, trace_out;
  std::string variant = "segmented";
  std::size_t threads = 1;
  std::size_t cache_elems = 48;
  std::size_t assoc = 3;
  std::size_t line_size = 1;
  std::string policy = "lru";
  bool touch = false;
  bool check_conflicts = false;
  std::optional<std::uint64_t> base_a, base_b, base_s;
  std::string format = "json";
  std::string out_path;
};

int run_cachesim(const cachesim_args &args) {
  mergepath::cache_config cfg;
  cfg.capacity = args.cache_elems;
  cfg.line_size = args.line_size;
  cfg.associativity = args.assoc;
  cfg.policy = args.policy == "fifo" ? mergepath::replacement::fifo
                                     : mergepath::replacement::lru;

  std::vector<mergepath::mem_access> trace;
  std::size_t na = 0, nb = 0;
  if (!args.trace_in.empty()) {
    std::ifstream in(args.trace_in);
    if (!in)
      throw std::runtime_error("cannot open: " + args.trace_in);
    trace = mergepath::load_trace(in);
    for (const auto &acc : trace) {
      if (acc.array == mergepath::array_id::a)
        na = std::max<std::size_t>(na, acc.index + 1);
      if (acc.array == mergepath::array_id::b)
        nb = std::max<std::size_t>(nb, acc.index + 1);
    }
  } else {
    if (args.a_path.empty() || args.b_path.empty())
      throw std::invalid_argument(
          "cachesim needs --a and --b, or --trace-in");
    const ivec a = load_sorted(args.a_path, "cachesim A");
    const ivec b = load_sorted(args.b_path, "cachesim B");
    na = a.size();
    nb = b.size();
    mergepath::trace_spec spec;
    spec.p = args.threads;
    spec.cache_elems = args.cache_elems;
    spec.touch = args.touch;
    spec.line_size = args.line_size;
    if (args.variant == "sequential")
      spec.variant = mergepath::trace_spec::kind::sequential;
    else if (args.variant == "parallel")
      spec.variant = mergepath::trace_spec::kind::parallel;
    else
      spec.variant = mergepath::trace_spec::kind::segmented;
    cfg.base_a = args.base_a.value_or(0);
    cfg.base_b = args.base_b.value_or(na);
    cfg.base_s = args.base_s.value_or(na + nb);
    spec.base_a = cfg.base_a;
    spec.base_b = cfg.base_b;
    const mergepath::merge_input<std::int64_t> in{a, b};
    trace = trace_merge(in, spec);
  }
  if (!args.trace_in.empty()) {
    cfg.base_a = args.base_a.value_or(0);
    cfg.base_b = args.base_b.value_or(na);
    cfg.base_s = args.base_s.value_or(na + nb);
  }

  if (!args.trace_out.empty()) {
    std::ofstream out(args.trace_out);
    if (!out)
      throw std::runtime_error("cannot open for writing: " + args.trace_out);
    mergepath::dump_trace(trace, out);
    if (!out)
      throw std::runtime_error("write failed: " + args.trace_out);
  }

  const auto stats = mergepath::simulate(trace, cfg);
  json j{{"config",
          {{"capacity", cfg.capacity},
           {"line_size", cfg.line_size},
           {"associativity", cfg.associativity},
           {"policy", args.policy},
           {"base_a", cfg.base_a},
           {"base_b", cfg.base_b},
           {"base_s", cfg.base_s},
           {"variant", args.variant},
           {"threads", args.threads},
           {"touch", args.touch}}},
         {"stats", json::parse(mergepath::stats_to_json(stats))}};
  if (args.check_conflicts)
    j["conflict_free"] = stats.conflict_misses == 0;

  std::ostream *out = &std::cout;
  std::ofstream file;
  if (!args.out_path.empty()) {
    file.open(args.out_path);
    if (!file)
      throw std::runtime_error("cannot open for writing: " + args.out_path);
    out = &file;
  }
  *out << j.dump(2) << '\n';
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"merge-path benchmark tool"};
  app.require_subcommand(1);

  // gen
  auto *gen = app.add_subcommand("gen", "generate a sorted input pair");
  std::string gen_dist = "uniform";
  std::size_t gen_na = 0, gen_nb = 0;
  std::uint64_t gen_seed = 1;
  std::string gen_out_a, gen_out_b, gen_format = "bin";
  gen->add_option("--dist", gen_dist, "distribution")
      ->check(CLI::IsMember(
          {"uniform", "all_equal", "disjoint_ranges", "interleaved"}));
  gen->add_option("--na", gen_na, "elements in A")->required();
  gen->add_option("--nb", gen_nb, "elements in B")->required();
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_option("--out-a", gen_out_a, "output file for A")->required();
  gen->add_option("--out-b", gen_out_b, "output file for B")->required();
  gen->add_option("--format", gen_format, "file format")
      ->check(CLI::IsMember({"bin", "text"}));

  // merge
  auto *merge = app.add_subcommand("merge", "time parallel merges");
  merge_args margs;
  merge->add_option("--a", margs.a_path, "sorted input A")->required();
  merge->add_option("--b", margs.b_path, "sorted input B")->required();
  merge->add_option("--variant", margs.variant, "merge variant")
      ->check(CLI::IsMember({"regular", "segmented"}));
  merge->add_option("--threads", margs.threads, "worker counts")
      ->delimiter(',');
  merge->add_option("--cache-elems", margs.cache_elems,
                    "cache sizes for the segmented variant")
      ->delimiter(',');
  merge->add_option("--reps", margs.reps, "repetitions per row")
      ->check(CLI::Range(std::size_t{3}, std::size_t{1000000}));
  merge->add_option("--sink", margs.sink, "output sink")
      ->check(CLI::IsMember({"memory", "register"}));
  merge->add_option("--format", margs.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));
  merge->add_option("--out", margs.out_path, "report file (default stdout)");

  // sort
  auto *sort_cmd = app.add_subcommand("sort", "time parallel sorts");
  sort_args sargs;
  sort_cmd->add_option("--in", sargs.in_path, "input keys")->required();
  sort_cmd->add_option("--variant", sargs.variant, "sort variant")
      ->check(CLI::IsMember({"plain", "cache_efficient"}));
  sort_cmd->add_option("--threads", sargs.threads, "worker counts")
      ->delimiter(',');
  sort_cmd->add_option("--cache-elems", sargs.cache_elems,
                       "cache size for the cache-efficient variant");
  sort_cmd->add_option("--reps", sargs.reps, "repetitions per row")
      ->check(CLI::Range(std::size_t{3}, std::size_t{1000000}));
  sort_cmd->add_option("--format", sargs.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));
  sort_cmd->add_option("--out", sargs.out_path, "report file");

  // cachesim
  auto *sim = app.add_subcommand("cachesim",
                                 "replay a merge trace through a cache");
  cachesim_args cargs;
  sim->add_option("--a", cargs.a_path, "sorted input A");
  sim->add_option("--b", cargs.b_path, "sorted input B");
  sim->add_option("--trace-in", cargs.trace_in, "replay a stored trace");
  sim->add_option("--trace-out", cargs.trace_out, "dump the trace here");
  sim->add_option("--variant", cargs.variant, "merge variant to trace")
      ->check(CLI::IsMember({"sequential", "parallel", "segmented"}));
  sim->add_option("--threads", cargs.threads, "workers in the traced merge");
  sim->add_option("--cache-elems", cargs.cache_elems,
                  "cache capacity in elements");
  sim->add_option("--assoc", cargs.assoc, "associativity");
  sim->add_option("--line-size", cargs.line_size, "elements per line");
  sim->add_option("--policy", cargs.policy, "replacement policy")
      ->check(CLI::IsMember({"lru", "fifo"}));
  sim->add_flag("--touch", cargs.touch, "model the LRU touch workaround");
  sim->add_flag("--check-conflicts", cargs.check_conflicts,
                "report whether the trace was conflict-free");
  std::uint64_t base_a_val = 0, base_b_val = 0, base_s_val = 0;
  auto *oa = sim->add_option("--base-a", base_a_val, "base address of A");
  auto *ob = sim->add_option("--base-b", base_b_val, "base address of B");
  auto *os = sim->add_option("--base-s", base_s_val, "base address of S");
  sim->add_option("--out", cargs.out_path, "write the json here");

  // report
  auto *rep = app.add_subcommand("report", "re-render a saved report");
  std::string rep_in, rep_format = "csv", rep_out;
  rep->add_option("--in", rep_in, "report json")->required();
  rep->add_option("--format", rep_format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  rep->add_option("--out", rep_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*gen) {
      const auto dist = mergepath::parse_distribution(gen_dist);
      const auto [a, b] =
          mergepath::generate_pair(dist, gen_na, gen_nb, gen_seed);
      if (gen_format == "text") {
        mergepath::write_keys_text(gen_out_a, a);
        mergepath::write_keys_text(gen_out_b, b);
      } else {
        mergepath::write_keys_binary(gen_out_a, a);
        mergepath::write_keys_binary(gen_out_b, b);
      }
      return 0;
    }
    if (*merge)
      return run_merge(margs);
    if (*sort_cmd)
      return run_sort(sargs);
    if (*sim) {
      if (*oa)
        cargs.base_a = base_a_val;
      if (*ob)
        cargs.base_b = base_b_val;
      if (*os)
        cargs.base_s = base_s_val;
      return run_cachesim(cargs);
    }
    if (*rep) {
      std::ifstream in(rep_in);
      if (!in)
        throw std::runtime_error("cannot open: " + rep_in);
      json report;
      try {
        report = json::parse(in);
      } catch (const json::parse_error &e) {
        throw std::invalid_argument(std::string("bad report file: ") +
                                    e.what());
      }
      if (!report.contains("rows"))
        throw std::invalid_argument("report file has no rows");
      emit_report(report, rep_format, rep_out);
      return 0;
    }
  } catch (const reference_mismatch &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
