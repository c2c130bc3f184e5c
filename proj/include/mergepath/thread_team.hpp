#pragma once

// Fixed pool of p logical workers multiplexed onto at most
// min(p, hardware_concurrency) OS threads. Workers are the unit the merge
// algorithms reason about (each one owns a path segment and computes its
// own partition point); the pool only decides which OS thread runs which
// worker. The calling thread always participates as lane 0, so a team of
// one spawns nothing.

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mergepath {

class thread_team {
public:
  explicit thread_team(std::size_t workers);
  thread_team(std::size_t workers, std::size_t max_os_threads);
  ~thread_team();

  thread_team(const thread_team &) = delete;
  thread_team &operator=(const thread_team &) = delete;

  std::size_t size() const { return workers_; }
  std::size_t lanes() const { return lanes_; }

  // Run fn(w) once for every worker w in [0, size()); returns after all
  // have finished. fn must not throw.
  void run(const std::function<void(std::size_t)> &fn);

  // Phased variant: per phase, fn(w, phase) runs for every worker, then
  // completion(phase) runs exactly once before any worker starts the next
  // phase. Neither callback may throw.
  void run_phased(std::size_t phases,
                  const std::function<void(std::size_t, std::size_t)> &fn,
                  const std::function<void(std::size_t)> &completion);

private:
  void lane_loop(std::size_t lane);
  void dispatch(const std::function<void(std::size_t)> &lane_job);

  std::size_t workers_;
  std::size_t lanes_;
  std::vector<std::thread> threads_; // lanes_ - 1 worker lanes

  std::mutex m_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  std::function<void(std::size_t)> lane_job_;
  std::uint64_t generation_ = 0;
  std::size_t lanes_done_ = 0;
  bool stop_ = false;
};

} // namespace mergepath
