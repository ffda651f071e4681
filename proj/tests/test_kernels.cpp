#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "econmech/kernels.hpp"
#include "oracle.hpp"

namespace k = econmech::kernels;

namespace {

std::vector<double> random_vec(oracle::Gen& g, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = g.uniform(-1e3, 1e3);
  return v;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar reference kernels compute the documented formulas") {
    const auto& s = k::scalar_table();
    std::vector<double> x{1, 2, 3}, y{4, 5, 6}, out(3);
    s.axpy(out.data(), x.data(), 0.5, y.data(), 3);
    CHECK(out == std::vector<double>{3, 4.5, 6});

    std::vector<double> k1{1, 1, 1}, k2{2, 2, 2}, k3{3, 3, 3}, k4{4, 4, 4};
    s.rk4_combine(out.data(), x.data(), k1.data(), k2.data(), k3.data(), k4.data(), 0.6, 3);
    // (1 + 4 + 6 + 4) * 0.1 = 1.5
    CHECK(out[0] == doctest::Approx(2.5));
    CHECK(out[2] == doctest::Approx(4.5));

    CHECK(s.dot(x.data(), y.data(), 3) == 32.0);
    CHECK(s.max_abs_diff(x.data(), y.data(), 3) == 3.0);

    std::vector<double> rx{1, 0}, ry{0, 1};
    s.rotate(rx.data(), ry.data(), 0.0, 1.0, 2);
    CHECK(rx == std::vector<double>{0, -1});
    CHECK(ry == std::vector<double>{1, 0});
  }

  TEST_CASE("max_abs_diff propagates NaN") {
    const auto& s = k::scalar_table();
    std::vector<double> a{0, std::numeric_limits<double>::quiet_NaN()}, b{0, 0};
    CHECK(std::isnan(s.max_abs_diff(a.data(), b.data(), 2)));
  }

  TEST_CASE("vector kernels agree with the scalar reference on random lengths") {
    if (!k::supported(k::Isa::avx2)) {
      MESSAGE("AVX2 not available on this CPU; equivalence not exercised");
      return;
    }
    const auto& s = k::scalar_table();
    const auto& v = k::table(k::Isa::avx2);
    CHECK(v.isa == k::Isa::avx2);
    oracle::Gen g(7);
    for (int trial = 0; trial < 200; ++trial) {
      const auto n = static_cast<std::size_t>(g.integer(0, 67));
      const auto x = random_vec(g, n), y = random_vec(g, n), k1 = random_vec(g, n), k2 = random_vec(g, n),
                 k3 = random_vec(g, n), k4 = random_vec(g, n);
      const double a = g.uniform(-2, 2), h = g.uniform(1e-4, 1);
      std::vector<double> o1(n), o2(n);

      s.axpy(o1.data(), x.data(), a, y.data(), n);
      v.axpy(o2.data(), x.data(), a, y.data(), n);
      CHECK(bits_equal(o1, o2));

      s.rk4_combine(o1.data(), x.data(), k1.data(), k2.data(), k3.data(), k4.data(), h, n);
      v.rk4_combine(o2.data(), x.data(), k1.data(), k2.data(), k3.data(), k4.data(), h, n);
      CHECK(bits_equal(o1, o2));

      auto rx1 = x, ry1 = y, rx2 = x, ry2 = y;
      const double th = g.uniform(-3, 3);
      s.rotate(rx1.data(), ry1.data(), std::cos(th), std::sin(th), n);
      v.rotate(rx2.data(), ry2.data(), std::cos(th), std::sin(th), n);
      CHECK(bits_equal(rx1, rx2));
      CHECK(bits_equal(ry1, ry2));

      CHECK(s.max_abs_diff(x.data(), y.data(), n) == v.max_abs_diff(x.data(), y.data(), n));

      double mag = 0;
      for (std::size_t i = 0; i < n; ++i) mag += std::fabs(x[i] * y[i]);
      CHECK(std::fabs(s.dot(x.data(), y.data(), n) - v.dot(x.data(), y.data(), n)) <= 1e-14 * (mag + 1));
    }
  }

  TEST_CASE("select switches the active table and reports the previous ISA") {
    const k::Isa before = k::active().isa;
    const k::Isa prev = k::select(k::Isa::scalar);
    CHECK(prev == before);
    CHECK(k::active().isa == k::Isa::scalar);
    k::select(before);
    CHECK(k::active().isa == before);
    CHECK(k::name(k::Isa::scalar) == "scalar");
  }
}
