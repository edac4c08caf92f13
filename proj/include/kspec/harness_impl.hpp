#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace kspec {

template <class T>
std::vector<T> run_trials(int trials, const std::function<T(int)>& body, int threads) {
  if (trials < 1) throw std::invalid_argument("run_trials needs trials >= 1");
  const int workers = std::max(1, std::min(trials, threads > 0 ? threads : worker_count()));
  std::vector<std::optional<T>> slots(trials);
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&] {
    for (int t = next++; t < trials; t = next++) {
      try {
        slots[t] = body(t);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
  std::vector<T> out;
  out.reserve(trials);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace kspec
