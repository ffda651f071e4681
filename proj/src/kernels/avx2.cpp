// Compiled with -mavx2 only; never called unless the CPU reports AVX2.
// No FMA: every lane performs the same unfused mul/add sequence as the
// scalar reference so element-wise results match bit for bit.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "econmech/kernels.hpp"

namespace econmech::kernels {
namespace {

void axpy_avx2(double* out, const double* x, double a, const double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(out + i, _mm256_add_pd(vx, _mm256_mul_pd(va, vy)));
  }
  for (; i < n; ++i) out[i] = x[i] + a * y[i];
}

void rk4_combine_avx2(double* out, const double* x, const double* k1, const double* k2,
                      const double* k3, const double* k4, double h, std::size_t n) {
  const double h6 = h / 6.0;
  const __m256d vh6 = _mm256_set1_pd(h6);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_mul_pd(two, _mm256_loadu_pd(k2 + i)));
    s = _mm256_add_pd(s, _mm256_mul_pd(two, _mm256_loadu_pd(k3 + i)));
    s = _mm256_add_pd(s, _mm256_loadu_pd(k4 + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_mul_pd(vh6, s)));
  }
  for (; i < n; ++i) {
    const double slope = ((k1[i] + 2.0 * k2[i]) + 2.0 * k3[i]) + k4[i];
    out[i] = x[i] + h6 * slope;
  }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void rotate_avx2(double* x, double* y, double c, double s, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(x + i, _mm256_sub_pd(_mm256_mul_pd(vc, vx), _mm256_mul_pd(vs, vy)));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_mul_pd(vs, vx), _mm256_mul_pd(vc, vy)));
  }
  for (; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

double max_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  __m256d nan_seen = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    nan_seen = _mm256_or_pd(nan_seen, _mm256_cmp_pd(d, d, _CMP_UNORD_Q));
    m = _mm256_max_pd(m, d);
  }
  if (_mm256_movemask_pd(nan_seen) != 0) return std::numeric_limits<double>::quiet_NaN();
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double out = lanes[0];
  for (int k = 1; k < 4; ++k) out = lanes[k] > out ? lanes[k] : out;
  for (; i < n; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (std::isnan(d)) return d;
    if (d > out) out = d;
  }
  return out;
}

}  // namespace

const KernelTable& avx2_table() noexcept {
  static const KernelTable t{Isa::avx2, axpy_avx2,   rk4_combine_avx2,
                             dot_avx2,  rotate_avx2, max_abs_diff_avx2};
  return t;
}

}  // namespace econmech::kernels
