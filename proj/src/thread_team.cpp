#include "mergepath/thread_team.hpp"

#include <barrier>
#include <stdexcept>

namespace mergepath {

namespace {

std::size_t default_os_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

} // namespace

thread_team::thread_team(std::size_t workers)
    : thread_team(workers, default_os_threads()) {}

thread_team::thread_team(std::size_t workers, std::size_t max_os_threads)
    : workers_(workers) {
  if (workers_ == 0)
    throw std::invalid_argument("thread_team: need at least one worker");
  if (max_os_threads == 0)
    max_os_threads = 1;
  lanes_ = workers_ < max_os_threads ? workers_ : max_os_threads;
  threads_.reserve(lanes_ - 1);
  for (std::size_t lane = 1; lane < lanes_; ++lane)
    threads_.emplace_back([this, lane] { lane_loop(lane); });
}

thread_team::~thread_team() {
  {
    std::lock_guard lk(m_);
    stop_ = true;
  }
  cv_.notify_all();
  for (auto &t : threads_)
    t.join();
}

void thread_team::lane_loop(std::size_t lane) {
  std::uint64_t seen = 0;
  for (;;) {
    std::function<void(std::size_t)> job;
    {
      std::unique_lock lk(m_);
      cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
      if (stop_)
        return;
      seen = generation_;
      job = lane_job_;
    }
    job(lane);
    {
      std::lock_guard lk(m_);
      if (++lanes_done_ == lanes_ - 1)
        done_cv_.notify_one();
    }
  }
}

void thread_team::dispatch(const std::function<void(std::size_t)> &lane_job) {
  {
    std::lock_guard lk(m_);
    lane_job_ = lane_job;
    lanes_done_ = 0;
    ++generation_;
  }
  cv_.notify_all();
  lane_job(0);
  std::unique_lock lk(m_);
  done_cv_.wait(lk, [&] { return lanes_done_ == lanes_ - 1; });
}

void thread_team::run(const std::function<void(std::size_t)> &fn) {
  if (lanes_ == 1) {
    for (std::size_t w = 0; w < workers_; ++w)
      fn(w);
    return;
  }
  dispatch([&](std::size_t lane) {
    for (std::size_t w = lane; w < workers_; w += lanes_)
      fn(w);
  });
}

void thread_team::run_phased(
    std::size_t phases, const std::function<void(std::size_t, std::size_t)> &fn,
    const std::function<void(std::size_t)> &completion) {
  if (phases == 0)
    return;
  if (lanes_ == 1) {
    for (std::size_t ph = 0; ph < phases; ++ph) {
      for (std::size_t w = 0; w < workers_; ++w)
        fn(w, ph);
      completion(ph);
    }
    return;
  }
  std::size_t done_phase = 0;
  auto on_complete = [&completion, &done_phase]() noexcept {
    completion(done_phase);
    ++done_phase;
  };
  std::barrier bar(static_cast<std::ptrdiff_t>(lanes_), on_complete);
  dispatch([&](std::size_t lane) {
    for (std::size_t ph = 0; ph < phases; ++ph) {
      for (std::size_t w = lane; w < workers_; w += lanes_)
        fn(w, ph);
      bar.arrive_and_wait();
    }
  });
}

} // namespace mergepath
