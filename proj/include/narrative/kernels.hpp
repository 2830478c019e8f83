#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

// Dense arithmetic used by the planner and learner. Every routine has a scalar
// reference implementation; SIMD variants are chosen once at startup from the
// CPU's capabilities (override with NA_KERNELS=scalar|avx2).
namespace narrative::kernels {

struct KernelTable {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[r] = rows[r*k .. r*k+k) . x  for r < nrows
  void (*gemv)(const double* rows, std::size_t nrows, std::size_t k, const double* x, double* out);
  double (*max)(const double* x, std::size_t n);
  void (*scale)(double alpha, double* x, std::size_t n);
};

const KernelTable& scalar_table();
/// nullptr when not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

const KernelTable& active();
/// Switches the active table; returns false if `name` is unavailable.
bool select(std::string_view name);

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void gemv(std::span<const double> rows, std::size_t k, std::span<const double> x, std::span<double> out) {
  assert(x.size() == k && rows.size() == out.size() * k);
  active().gemv(rows.data(), out.size(), k, x.data(), out.data());
}

inline double max(std::span<const double> x) { return active().max(x.data(), x.size()); }

inline void scale(double alpha, std::span<double> x) { active().scale(alpha, x.data(), x.size()); }

/// In-place softmax of beta * x with max subtraction. Empty input is a no-op.
void softmax(double beta, std::span<double> x);

}  // namespace narrative::kernels
