#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "econmech/errors.hpp"
#include "econmech/surplus.hpp"
#include "oracle.hpp"

using namespace econmech;
using namespace econmech::surplus;

namespace {

Demander agent(const std::string& id, double m, double q0 = 0, double p0 = 0) {
  return Demander{id, m, {q0}, {p0}, {}};
}

}  // namespace

TEST_SUITE("surplus") {
  TEST_CASE("direct surplus and coenergy") {
    CHECK(direct_surplus(4, 2) == 4.0);
    CHECK(direct_surplus(0, 2) == 0.0);
    CHECK_THROWS_AS(direct_surplus(1, 0), DomainError);
    CHECK(coenergy(3, 2) == 9.0);
    CHECK(coenergy(0, 2) == 0.0);
    // Legendre: p v - T* = T at p = 6, m = 2
    CHECK(6 * 3 - coenergy(3, 2) == direct_surplus(6, 2));
  }

  TEST_CASE("Legendre identity on random samples") {
    oracle::Gen g(21);
    for (int i = 0; i < 1000; ++i) {
      const double m = g.uniform(0.01, 50), v = g.uniform(-20, 20);
      const double p = m * v;
      CHECK(std::fabs(p * v - coenergy(v, m) - direct_surplus(p, m)) < 1e-12 * std::max(1.0, p * v));
      CHECK(std::fabs(coenergy(v, m) - direct_surplus(m * v, m)) < 1e-12 * std::max(1.0, p * v));
    }
  }

  TEST_CASE("indirect surplus of storage laws") {
    CHECK(indirect_surplus(LinearSpring{4, 1}, 1.5) == 0.5);
    CHECK(indirect_surplus(LinearSpring{4, 1}, 1.0) == 0.0);
    // Needs push the stock up: the stored surplus is -m g q.
    CHECK(indirect_surplus(ConstantNeeds{1}, 3, 2) == -6.0);
    CHECK(indirect_surplus(GravityLikeConvenience{2, 1.0}, std::exp(1.0), 3) == doctest::Approx(6.0));
    CHECK(indirect_surplus(GravityLikeConvenience{2, std::nullopt}, 2, 1, 2.0) == 0.0);
    CHECK_THROWS_AS(indirect_surplus(GravityLikeConvenience{2, 1.0}, 0), SingularityError);
    CHECK(indirect_surplus(SaturatingSpring{4, 2, 0}, 0.25) == doctest::Approx(0.125));
    CHECK(indirect_surplus(SaturatingSpring{4, 2, 0}, 0.5) == doctest::Approx(0.5));
    CHECK(indirect_surplus(SaturatingSpring{4, 2, 0}, -1.5) == doctest::Approx(0.5 + 2 * 1.0));
    CHECK(indirect_surplus(StockoutWall{0, 1, 100}, 1.1) == doctest::Approx(0.5));
    CHECK(indirect_surplus(SeriesCarry{4, 1, 0}, 0.5) == 0.5);
    CHECK_THROWS_AS(indirect_surplus(LinearDamper{1}, 1), DomainError);
  }

  TEST_CASE("potentials are consistent with their forces") {
    // F = -dV/dq by central differences.
    const std::vector<ElementLaw> laws{LinearSpring{3, 0.5}, ConstantNeeds{1.5}, GravityLikeConvenience{2, 1.0},
                                       SaturatingSpring{4, 1, 0.2}, StockoutWall{0, 1, 50}};
    oracle::Gen g(4);
    for (const auto& law : laws)
      for (int i = 0; i < 50; ++i) {
        const double q = g.uniform(0.1, 3), m = 1.7, h = 1e-6;
        const double dV = (indirect_surplus(law, q + h, m) - indirect_surplus(law, q - h, m)) / (2 * h);
        CHECK(element_force(law, q, 0, m) == doctest::Approx(-dV).epsilon(1e-5));
      }
  }

  TEST_CASE("dissipation rate") {
    CHECK(dissipation_rate(element_force(LinearDamper{2}, 0, 3), 3) == 18.0);
    CHECK(dissipation_rate(0, 0) == 0.0);
    CHECK(dissipation_rate(element_force(SignumFriction{2, 1.5}, 0, -2), -2) == 3.0);
    CHECK_THROWS_AS(dissipation_rate(1.0, 1.0), std::logic_error);
  }

  TEST_CASE("frictionless two-body keeps disposable surplus over 20 periods") {
    Network net;
    net.agents.push_back(agent("a", 1.0, 0.0, 1.0));
    net.agents.push_back(agent("b", 1.0, 0.5, 0.0));
    net.elements.push_back({LinearSpring{4}, {"a", "b", 0}});
    const double omega = std::sqrt(4 * 2.0);
    const double T_end = 20 * 2 * std::acos(-1.0) / omega;
    const auto s = simulate(net, SimConfig{T_end, 1e-3});
    const auto L = ledger_accrue(s, net);
    CHECK(L.residuals.reallocative < 1e-6);
    CHECK(L.residuals.general < 1e-6);
    CHECK(L.dQ.back() == 0.0);
  }

  TEST_CASE("damper-only decay conserves T + dQ and consumption never falls") {
    Network net;
    net.agents.push_back(agent("a", 2.0, 0.0, 3.0));
    net.elements.push_back({LinearDamper{0.7}, {"a", "", 0}});
    const auto s = simulate(net, SimConfig{10, 1e-3});
    const auto L = ledger_accrue(s, net);
    CHECK(L.residuals.consumptive < 1e-6);
    for (std::size_t r = 1; r < L.size(); ++r) CHECK(L.dQ[r] >= L.dQ[r - 1]);
    CHECK(L.V.back() == 0.0);
  }

  TEST_CASE("driven damped oscillator balances") {
    Network net;
    net.agents.push_back(agent("a", 1.0, 1.0, 0.0));
    net.elements.push_back({LinearSpring{4}, {"a", "", 0}});
    net.elements.push_back({LinearDamper{0.4}, {"a", "", 0}});
    net.exogenous.push_back({"a", 0, WantSignal{Sinusoid{1.5, 1.1, 0.2}}});
    const auto s = simulate(net, SimConfig{30, 1e-3});
    const auto L = ledger_accrue(s, net);
    CHECK(L.residuals.general < 1e-6 * L.E);
    const auto gdp = gdp_view(L, L.size() - 1);
    CHECK(gdp.consumption == L.dQ.back());
    CHECK(gdp.investment == L.V.back());
    CHECK(gdp.government == L.dW.back());
  }

  TEST_CASE("work by an exogenous want changes direct surplus one for one") {
    Network net;
    net.agents.push_back(agent("a", 1.5, 0.0, 0.5));
    net.exogenous.push_back({"a", 0, WantSignal{Step{2.0, 0}}});
    const auto s = simulate(net, SimConfig{5, 1e-3});
    const auto L = ledger_accrue(s, net);
    CHECK(std::fabs((L.T.back() - L.T.front()) + L.dW.back()) < 1e-6);
  }

  TEST_CASE("stored surplus depends only on the end stocks") {
    // Two different paths between q = 0 and q = 1 under a spring; the work
    // done by the spring is the same.
    const LinearSpring spring{3, 0.2};
    auto work = [&](auto path) {
      double w = 0;
      const int n = 200000;
      for (int i = 0; i < n; ++i) {
        const double s0 = static_cast<double>(i) / n, s1 = static_cast<double>(i + 1) / n;
        const double q0 = path(s0), q1 = path(s1);
        w += 0.5 * (element_force(spring, q0, 0) + element_force(spring, q1, 0)) * (q1 - q0);
      }
      return w;
    };
    const double direct = work([](double s) { return s; });
    const double detour = work([](double s) { return s + 2.0 * std::sin(3 * std::acos(-1.0) * s); });
    CHECK(std::fabs(direct - detour) < 1e-8);
    CHECK(direct == doctest::Approx(-(indirect_surplus(spring, 1) - indirect_surplus(spring, 0))).epsilon(1e-10));
  }

  TEST_CASE("cost-of-carry dissipation is accounted") {
    Network net;
    net.agents.push_back(agent("a", 1.0, 0.0, 2.0));
    net.elements.push_back({SeriesCarry{2, 0.5, 0}, {"a", "", 0}});
    const auto s = simulate(net, SimConfig{20, 1e-3});
    const auto L = ledger_accrue(s, net);
    CHECK(L.residuals.general < 1e-6 * L.E);
  }
}
