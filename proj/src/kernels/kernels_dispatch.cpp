#include <atomic>
#include <cstdlib>
#include <string_view>

#include "netdesign/kernels.hpp"

namespace netdesign::kernels {

#ifdef NETDESIGN_HAVE_AVX2
const Backend& avx2();  // kernels_avx2.cpp
#endif

namespace {

bool avx2_available() {
#ifdef NETDESIGN_HAVE_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Backend* pick(std::string_view name) {
  if (name == "scalar") return &scalar();
#ifdef NETDESIGN_HAVE_AVX2
  if (name == "avx2" && avx2_available()) return &avx2();
#endif
  if (name == "auto") {
#ifdef NETDESIGN_HAVE_AVX2
    if (avx2_available()) return &avx2();
#endif
    return &scalar();
  }
  return nullptr;
}

const Backend* initial() {
  if (const char* env = std::getenv("NETDESIGN_KERNELS")) {
    if (const Backend* b = pick(env)) return b;
  }
  return pick("auto");
}

std::atomic<const Backend*>& slot() {
  static std::atomic<const Backend*> s{initial()};
  return s;
}

}  // namespace

const Backend& active() { return *slot().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
  const Backend* b = pick(name);
  if (b == nullptr) return false;
  slot().store(b, std::memory_order_relaxed);
  return true;
}

}  // namespace netdesign::kernels
