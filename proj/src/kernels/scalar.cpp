#include "econmech/kernels.hpp"

#include <cmath>

namespace econmech::kernels {
namespace {

void axpy_scalar(double* out, const double* x, double a, const double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * y[i];
}

void rk4_combine_scalar(double* out, const double* x, const double* k1, const double* k2,
                        const double* k3, const double* k4, double h, std::size_t n) {
  const double h6 = h / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double slope = ((k1[i] + 2.0 * k2[i]) + 2.0 * k3[i]) + k4[i];
    out[i] = x[i] + h6 * slope;
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void rotate_scalar(double* x, double* y, double c, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (d > m || std::isnan(d)) m = d;
  }
  return m;
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable t{Isa::scalar,   axpy_scalar,   rk4_combine_scalar,
                             dot_scalar,    rotate_scalar, max_abs_diff_scalar};
  return t;
}

}  // namespace econmech::kernels
