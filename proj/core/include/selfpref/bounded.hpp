#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace selfpref {

// Runs task(i) for i in [0, n) on at most `max_parallel` worker threads and
// hands each result to consume(i, result) on the calling thread, strictly in
// index order. The first exception thrown by a task or by consume stops
// scheduling and is rethrown after the workers have drained.
template <typename Task, typename Consume>
void run_bounded(std::size_t n, std::size_t max_parallel, Task task, Consume consume) {
  using Result = decltype(task(std::size_t{0}));
  if (n == 0) return;
  max_parallel = std::clamp<std::size_t>(max_parallel, 1, n);
  if (max_parallel == 1) {
    for (std::size_t i = 0; i < n; ++i) consume(i, task(i));
    return;
  }

  std::mutex mu;
  std::condition_variable cv;
  std::size_t next = 0;
  bool stop = false;
  std::exception_ptr failure;
  std::map<std::size_t, std::optional<Result>> ready;

  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (stop || next >= n) return;
        i = next++;
      }
      try {
        Result r = task(i);
        std::lock_guard lock(mu);
        ready.emplace(i, std::move(r));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(max_parallel);
  for (std::size_t t = 0; t < max_parallel; ++t) threads.emplace_back(worker);

  for (std::size_t want = 0; want < n; ++want) {
    std::optional<Result> r;
    {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return stop || ready.count(want) > 0; });
      if (stop && ready.count(want) == 0) break;
      r = std::move(ready.at(want));
      ready.erase(want);
    }
    try {
      consume(want, std::move(*r));
    } catch (...) {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
      stop = true;
      break;
    }
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace selfpref
