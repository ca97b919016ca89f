#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace ragprobe {

/// Runs fn(i) for i in [0, count) on up to `concurrency` threads. Exceptions
/// are captured per item and returned as messages (empty = success), so a
/// failing item never tears down the batch. Results land at their own index;
/// callers commit them in deterministic order afterwards.
inline std::vector<std::string> parallel_for(size_t count, int concurrency,
                                             const std::function<void(size_t)>& fn) {
  std::vector<std::string> errors(count);
  if (count == 0) return errors;
  auto workers = static_cast<size_t>(std::max(1, concurrency));
  workers = std::min(workers, count);

  std::atomic<size_t> next{0};
  auto worker = [&] {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (const std::exception& e) {
        errors[i] = e.what()[0] ? e.what() : "unknown error";
      } catch (...) {
        errors[i] = "unknown error";
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return errors;
}

}  // namespace ragprobe
