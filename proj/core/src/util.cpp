#include "finsec/util.hpp"

#include <atomic>
#include <cstdio>

namespace finsec {

std::string fmt_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fmt_cplx(cplx z) { return "[" + fmt_g17(z.real()) + "," + fmt_g17(z.imag()) + "]"; }

int thread_cap() {
  const char* env = std::getenv("FINSEC_THREADS");
  if (!env) return 1;
  int v = std::atoi(env);
  return v >= 1 ? v : 1;
}

void parallel_for(int count, const std::function<void(int)>& body) {
  const int cap = std::min(thread_cap(), count);
  if (cap <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  pool.reserve(cap);
  for (int t = 0; t < cap; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace finsec
