#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <string>

#include "narrative/kernels.hpp"

namespace narrative::kernels {

#if defined(NARRATIVE_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

const KernelTable* avx2_table() {
#if defined(NARRATIVE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* initial_table() {
  const char* forced = std::getenv("NA_KERNELS");
  if (forced && std::string(forced) == "scalar") return &scalar_table();
  if (const auto* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
  if (name == "scalar") {
    current().store(&scalar_table());
    return true;
  }
  if (name == "avx2" && avx2_table()) {
    current().store(avx2_table());
    return true;
  }
  return false;
}

void softmax(double beta, std::span<double> x) {
  assert(beta >= 0.0);
  if (x.empty()) return;
  if (beta == 0.0) {
    const double u = 1.0 / static_cast<double>(x.size());
    for (auto& v : x) v = u;
    return;
  }
  // beta >= 0, so the largest exponent comes from max(x)
  const double top = max(x);
  double total = 0.0;
  for (auto& v : x) {
    v = std::exp(beta * (v - top));
    total += v;
  }
  scale(1.0 / total, x);
}

}  // namespace narrative::kernels
