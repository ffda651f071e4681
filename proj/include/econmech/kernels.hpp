#pragma once

// Data-parallel inner loops shared by the integrator, the ledger and the
// Jacobi eigen-solver. Each kernel has a portable scalar reference and,
// where the CPU supports it, an AVX2 variant picked once at startup.
//
// Element-wise kernels (axpy, rk4_combine, rotate, max_abs_diff) produce
// bit-identical results on every ISA. dot() reduces in a different order on
// vector ISAs and agrees with the scalar reference to rounding only.

#include <cstddef>
#include <span>
#include <string_view>

namespace econmech::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  // out = x + a * y
  void (*axpy)(double* out, const double* x, double a, const double* y, std::size_t n);
  // out = x + (h / 6) * (k1 + 2 k2 + 2 k3 + k4)
  void (*rk4_combine)(double* out, const double* x, const double* k1, const double* k2,
                      const double* k3, const double* k4, double h, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  // (x, y) <- (c x - s y, s x + c y)
  void (*rotate)(double* x, double* y, double c, double s, std::size_t n);
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

/// True when the running CPU (and this build) can execute `isa`.
bool supported(Isa isa) noexcept;

/// Table for `isa`; falls back to scalar when unsupported.
const KernelTable& table(Isa isa) noexcept;

/// Currently dispatched table. Defaults to the widest supported ISA.
const KernelTable& active() noexcept;

/// Override dispatch (tests use this to pin the scalar path). Returns the
/// previously active ISA. Unsupported requests select scalar.
Isa select(Isa isa) noexcept;

std::string_view name(Isa isa) noexcept;

// Span front-ends over the active table. Sizes must agree; the caller
// guarantees that (checked with assert in debug builds).
void axpy(std::span<double> out, std::span<const double> x, double a,
          std::span<const double> y);
void rk4_combine(std::span<double> out, std::span<const double> x, std::span<const double> k1,
                 std::span<const double> k2, std::span<const double> k3,
                 std::span<const double> k4, double h);
double dot(std::span<const double> a, std::span<const double> b);
void rotate(std::span<double> x, std::span<double> y, double c, double s);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace econmech::kernels
