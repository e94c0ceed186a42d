#ifndef CENSORLAB_CAMPAIGN_IMPL_HPP
#define CENSORLAB_CAMPAIGN_IMPL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace censorlab::campaign {

template <typename R, typename Fn>
std::vector<R> run_chunks(size_t chunks, int jobs, Fn fn) {
  std::vector<R> out(chunks);
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  auto worker = [&] {
    for (size_t i; (i = next++) < chunks;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  size_t n = std::min<size_t>(std::max(1, jobs), std::max<size_t>(1, chunks));
  std::vector<std::thread> threads;
  for (size_t t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace censorlab::campaign

#endif  // CENSORLAB_CAMPAIGN_IMPL_HPP
