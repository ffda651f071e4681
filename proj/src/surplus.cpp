#include "econmech/surplus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "econmech/errors.hpp"

namespace econmech::surplus {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double direct_surplus(double p, double m) {
  if (!(m > 0.0)) throw DomainError("direct surplus requires m > 0");
  return p * p / (2.0 * m);
}

double direct_surplus(const ElasticityTensor& eps, std::span<const double> p) {
  return tensor_surplus(eps, p);
}

double coenergy(double v, double m) { return 0.5 * m * v * v; }

double indirect_surplus(const ElementLaw& law, double x, double m, std::optional<double> q_ref) {
  return std::visit(
      overloaded{
          [&](const LinearSpring& e) { return 0.5 * e.k * (x - e.set_point) * (x - e.set_point); },
          [&](const ConstantNeeds& e) { return -m * e.g * x; },
          [&](const GravityLikeConvenience& e) {
            const std::optional<double> datum = e.q_ref ? e.q_ref : q_ref;
            if (!datum) throw DomainError("gravity-like potential needs a datum q_ref");
            if (!(x > 0.0) || !(*datum > 0.0))
              throw SingularityError("gravity-like potential is singular at q <= 0");
            return e.mu * m * std::log(x / *datum);
          },
          [&](const StockoutWall& e) {
            const double over = x > e.q_max ? x - e.q_max : (x < e.q_min ? x - e.q_min : 0.0);
            return 0.5 * e.k_wall * over * over;
          },
          [&](const SaturatingSpring& e) {
            const double d = std::fabs(x - e.set_point);
            const double knee = e.f_sat / e.k;
            if (d <= knee) return 0.5 * e.k * d * d;
            return e.f_sat * d - 0.5 * e.f_sat * knee;
          },
          [&](const SeriesCarry& e) { return 0.5 * e.k * x * x; },
          [](const auto&) -> double { throw DomainError("indirect surplus needs a storage element"); }},
      law);
}

double dissipation_rate(double F_friction, double v) {
  const double P = -F_friction * v;
  if (P < -1e-12) throw std::logic_error("negative dissipation: friction force does not oppose the flow");
  return P;
}

SurplusLedger ledger_accrue(const TimeSeries& series, const Network& net) {
  SurplusLedger L;
  const std::size_t rows = series.size();
  const std::size_t d = series.chart.dimension();
  const std::size_t agents = series.agent_ids.size();
  if (rows == 0) return L;

  std::vector<std::size_t> agent_of(net.elements.size()), other_of(net.elements.size());
  constexpr std::size_t market = static_cast<std::size_t>(-1);
  for (std::size_t i = 0; i < net.elements.size(); ++i) {
    const auto& a = net.elements[i].attachment;
    agent_of[i] = *net.find_agent(a.agent);
    other_of[i] = a.to_market() ? market : *net.find_agent(a.counterparty);
  }
  auto rel_q = [&](std::size_t r, std::size_t i) {
    const std::size_t k = net.elements[i].attachment.account;
    const double qa = series.q_at(r, agent_of[i], k);
    return other_of[i] == market ? qa : qa - series.q_at(r, other_of[i], k);
  };
  auto rel_v = [&](std::size_t r, std::size_t i) {
    const std::size_t k = net.elements[i].attachment.account;
    const double va = series.v_at(r, agent_of[i], k);
    return other_of[i] == market ? va : va - series.v_at(r, other_of[i], k);
  };
  auto scalar_mass = [&](std::size_t a, double t) {
    const auto& m = net.agents[a].inelasticity;
    return m.is_tensor() ? 1.0 : m.at(t);
  };

  auto dissipation = [&](std::size_t r) {
    double P = 0.0;
    for (std::size_t i = 0; i < net.elements.size(); ++i) {
      const auto& law = net.elements[i].law;
      if (const auto* c = std::get_if<SeriesCarry>(&law)) {
        const double f = c->k * series.state_at(r, i);
        P += f * f / c->b;
      } else if (is_friction(law)) {
        P += std::max(0.0, -series.force_at(r, i) * rel_v(r, i));
      }
    }
    return P;
  };

  double dQ = 0.0, dW = 0.0;
  double P_prev = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double t = series.times[r];

    double T = 0.0, T_star = 0.0;
    for (std::size_t a = 0; a < agents; ++a) {
      const auto& m = net.agents[a].inelasticity;
      if (m.is_tensor()) {
        std::vector<double> p(d);
        double pv = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          p[k] = series.p_at(r, a, k);
          pv += p[k] * series.v_at(r, a, k);
        }
        T += tensor_surplus(m.elasticity(), p);
        T_star += 0.5 * pv;
      } else {
        const double ma = m.at(t);
        for (std::size_t k = 0; k < d; ++k) {
          T += direct_surplus(series.p_at(r, a, k), ma);
          T_star += coenergy(series.v_at(r, a, k), ma);
        }
      }
    }

    double V = 0.0;
    for (std::size_t i = 0; i < net.elements.size(); ++i) {
      const auto& law = net.elements[i].law;
      if (!is_storage(law)) continue;
      const std::size_t k = net.elements[i].attachment.account;
      const double x = std::holds_alternative<SeriesCarry>(law) ? series.state_at(r, i) : rel_q(r, i);
      V += indirect_surplus(law, x, scalar_mass(agent_of[i], t), series.q_at(0, agent_of[i], k));
    }

    const double P = dissipation(r);
    if (r > 0) {
      const double dt = t - series.times[r - 1];
      dQ += 0.5 * dt * (P_prev + P);
      // Work of each source over the interval as mean force times stock moved;
      // exact for wants held constant across it.
      for (std::size_t s = 0; s < series.sources.size(); ++s) {
        const auto& src = series.sources[s];
        const double dq = series.q_at(r, src.agent, src.account) - series.q_at(r - 1, src.agent, src.account);
        const double F = src.held ? series.exogenous_at(r - 1, s)
                                  : 0.5 * (series.exogenous_at(r - 1, s) + series.exogenous_at(r, s));
        dW -= F * dq;
      }
    }
    P_prev = P;

    const double H = T + V;
    if (r == 0) L.E = H;
    L.times.push_back(t);
    L.T.push_back(T);
    L.V.push_back(V);
    L.T_star.push_back(T_star);
    L.H.push_back(H);
    L.dQ.push_back(dQ);
    L.dW.push_back(dW);
    L.balance_residual.push_back(H + dQ + dW - L.E);

    L.residuals.reallocative = std::max(L.residuals.reallocative, std::fabs(H - L.E));
    L.residuals.consumptive = std::max(L.residuals.consumptive, std::fabs(T + dQ - L.T.front()));
    L.residuals.general = std::max(L.residuals.general, std::fabs(L.balance_residual.back()));
  }
  return L;
}

GdpView gdp_view(const SurplusLedger& ledger, std::size_t row) {
  return GdpView{ledger.dQ.at(row), ledger.V.at(row), ledger.dW.at(row)};
}

}  // namespace econmech::surplus
