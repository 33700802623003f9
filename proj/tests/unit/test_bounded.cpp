#include <doctest.h>

#include <atomic>
#include <chrono>
#include <stdexcept>
#include <thread>
#include <vector>

#include "selfpref/bounded.hpp"

using selfpref::run_bounded;

TEST_CASE("results arrive in index order regardless of completion order") {
  for (std::size_t par : {1u, 2u, 5u, 16u}) {
    std::vector<std::size_t> seen;
    run_bounded(
        40, par,
        [](std::size_t i) {
          std::this_thread::sleep_for(std::chrono::microseconds((40 - i) * 20));
          return i * i;
        },
        [&](std::size_t i, std::size_t v) {
          CHECK(v == i * i);
          seen.push_back(i);
        });
    REQUIRE(seen.size() == 40);
    for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == i);
  }
}

TEST_CASE("in-flight tasks never exceed the bound") {
  for (std::size_t par : {1u, 3u, 8u}) {
    std::atomic<int> live{0}, peak{0};
    run_bounded(
        60, par,
        [&](std::size_t) {
          const int now = ++live;
          int p = peak.load();
          while (now > p && !peak.compare_exchange_weak(p, now)) {
          }
          std::this_thread::sleep_for(std::chrono::microseconds(300));
          --live;
          return 0;
        },
        [](std::size_t, int) {});
    CHECK(peak.load() <= static_cast<int>(par));
    CHECK(peak.load() >= 1);
  }
}

TEST_CASE("task failure is rethrown on the caller after draining") {
  std::vector<std::size_t> consumed;
  CHECK_THROWS_AS(run_bounded(
                      20, 4,
                      [](std::size_t i) {
                        if (i == 7) throw std::runtime_error("boom");
                        return i;
                      },
                      [&](std::size_t i, std::size_t) { consumed.push_back(i); }),
                  std::runtime_error);
  for (std::size_t i = 0; i < consumed.size(); ++i) CHECK(consumed[i] == i);
  CHECK(consumed.size() <= 7);
}

TEST_CASE("empty range is a no-op") {
  int calls = 0;
  run_bounded(0, 4, [&](std::size_t) { return ++calls; }, [&](std::size_t, int) { ++calls; });
  CHECK(calls == 0);
}
