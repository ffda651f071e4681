#include <atomic>
#include <cassert>

#include "econmech/kernels.hpp"

namespace econmech::kernels {

#if defined(ECONMECH_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif

namespace {

Isa widest_supported() noexcept {
  return supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<const KernelTable*>& active_slot() noexcept {
  static std::atomic<const KernelTable*> slot{&table(widest_supported())};
  return slot;
}

}  // namespace

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(ECONMECH_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) noexcept {
#if defined(ECONMECH_HAVE_AVX2)
  if (isa == Isa::avx2 && supported(Isa::avx2)) return avx2_table();
#endif
  (void)isa;
  return scalar_table();
}

const KernelTable& active() noexcept { return *active_slot().load(std::memory_order_acquire); }

Isa select(Isa isa) noexcept {
  const KernelTable* previous = active_slot().exchange(&table(isa), std::memory_order_acq_rel);
  return previous->isa;
}

std::string_view name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

void axpy(std::span<double> out, std::span<const double> x, double a,
          std::span<const double> y) {
  assert(out.size() == x.size() && x.size() == y.size());
  active().axpy(out.data(), x.data(), a, y.data(), out.size());
}

void rk4_combine(std::span<double> out, std::span<const double> x, std::span<const double> k1,
                 std::span<const double> k2, std::span<const double> k3,
                 std::span<const double> k4, double h) {
  assert(out.size() == x.size() && k1.size() == x.size() && k2.size() == x.size() &&
         k3.size() == x.size() && k4.size() == x.size());
  active().rk4_combine(out.data(), x.data(), k1.data(), k2.data(), k3.data(), k4.data(), h,
                       out.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

void rotate(std::span<double> x, std::span<double> y, double c, double s) {
  assert(x.size() == y.size());
  active().rotate(x.data(), y.data(), c, s, x.size());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().max_abs_diff(a.data(), b.data(), a.size());
}

}  // namespace econmech::kernels
