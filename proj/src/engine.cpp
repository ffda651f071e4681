#include "econmech/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "econmech/errors.hpp"
#include "econmech/kernels.hpp"
#include "econmech/surplus.hpp"

namespace econmech {

// SimConfig

SimConfig SimConfig::with_default_step(double horizon, std::size_t record_every) {
  return SimConfig{horizon, 1e-3 * horizon, record_every};
}

void SimConfig::validate() const {
  if (!(std::isfinite(horizon) && horizon > 0.0)) throw DomainError("simulation horizon must be > 0");
  if (!(std::isfinite(step) && step > 0.0 && step <= horizon))
    throw DomainError("simulation step must satisfy 0 < h <= horizon");
  if (horizon / step > 1e8) throw DomainError("simulation would take more than 1e8 steps");
  if (record_every < 1) throw DomainError("record_every must be >= 1");
}

std::size_t SimConfig::steps() const {
  const double ratio = horizon / step;
  const double nearest = std::round(ratio);
  if (std::fabs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(ratio));
}

// System

System::System(Network net) : net_(std::move(net)) {
  net_.validate();
  layout_.agents = net_.agents.size();
  layout_.accounts = net_.chart.dimension();

  for (std::size_t i = 0; i < net_.elements.size(); ++i) {
    const auto& e = net_.elements[i];
    Bound b{*net_.find_agent(e.attachment.agent),
            e.attachment.to_market() ? npos : *net_.find_agent(e.attachment.counterparty),
            e.attachment.account, npos};
    if (std::holds_alternative<SeriesCarry>(e.law)) b.carry = layout_.carries++;
    const bool needs_scalar_mass = std::holds_alternative<ConstantNeeds>(e.law) ||
                                   std::holds_alternative<GravityLikeConvenience>(e.law);
    if (needs_scalar_mass && net_.agents[b.a].inelasticity.is_tensor())
      throw AssemblyError("element #" + std::to_string(i + 1) + " (" + std::string(kind_name(e.law)) +
                          ") needs a scalar inelasticity on agent '" + e.attachment.agent + "'");
    bound_.push_back(b);
  }
  for (const auto& in : net_.exogenous)
    input_slot_.push_back(layout_.slot(*net_.find_agent(in.agent), in.account));
}

System assemble(const Network& net) { return System(net); }

std::vector<double> System::initial_state() const {
  std::vector<double> x(layout_.size(), 0.0);
  for (std::size_t a = 0; a < layout_.agents; ++a) {
    for (std::size_t k = 0; k < layout_.accounts; ++k) {
      x[layout_.q(a, k)] = net_.agents[a].q[k];
      x[layout_.p(a, k)] = net_.agents[a].p[k];
    }
  }
  for (std::size_t i = 0; i < bound_.size(); ++i)
    if (bound_[i].carry != npos) x[layout_.carry(bound_[i].carry)] = std::get<SeriesCarry>(net_.elements[i].law).s0;
  return x;
}

double System::effective_mass(std::size_t agent, std::size_t account, double t) const {
  const auto& m = net_.agents[agent].inelasticity;
  if (m.is_tensor()) return 1.0 / m.elasticity().matrix()(account, account);
  return m.at(t);
}

std::vector<double> System::flows(double t, std::span<const double> x) const {
  const std::size_t d = layout_.accounts;
  std::vector<double> v(layout_.slots());
  for (std::size_t a = 0; a < layout_.agents; ++a) {
    const auto price = x.subspan(layout_.p(a, 0), d);
    const auto& m = net_.agents[a].inelasticity;
    if (m.is_tensor()) {
      const auto va = m.elasticity().demand(price);
      std::copy(va.begin(), va.end(), v.begin() + static_cast<std::ptrdiff_t>(a * d));
    } else {
      const double ma = m.at(t);
      for (std::size_t k = 0; k < d; ++k) v[a * d + k] = price[k] / ma;
    }
  }
  return v;
}

double System::relative(std::span<const double> values, const Bound& e) const {
  const double va = values[layout_.slot(e.a, e.account)];
  return e.b == npos ? va : va - values[layout_.slot(e.b, e.account)];
}

double System::input_value(std::size_t i, double t, const StepContext& ctx) const {
  return net_.exogenous[i].signal.value(t, ctx.t_step, ctx.h);
}

void System::derivative(double t, std::span<const double> x, std::span<double> dx,
                        const StepContext& ctx, std::span<double> element_forces) const {
  const std::size_t n = layout_.slots();
  const std::vector<double> v = flows(t, x);
  const auto q = x.subspan(0, n);
  auto force = dx.subspan(n, n);
  std::fill(force.begin(), force.end(), 0.0);
  std::copy(v.begin(), v.end(), dx.begin());

  auto apply = [&](std::size_t i, double f) {
    const Bound& e = bound_[i];
    force[layout_.slot(e.a, e.account)] += f;
    if (e.b != npos) force[layout_.slot(e.b, e.account)] -= f;
    if (!element_forces.empty()) element_forces[i] = f;
  };

  for (std::size_t i = 0; i < bound_.size(); ++i) {
    const auto& law = net_.elements[i].law;
    if (std::holds_alternative<SignumFriction>(law)) continue;
    const Bound& e = bound_[i];
    if (e.carry != npos) {
      const auto& c = std::get<SeriesCarry>(law);
      const double s = x[layout_.carry(e.carry)];
      dx[layout_.carry(e.carry)] = relative(v, e) - c.k * s / c.b;
      apply(i, element_force(law, LawInput{s, 0.0, 1.0, 0.0}));
      continue;
    }
    const double m = net_.agents[e.a].inelasticity.is_tensor() ? 1.0 : net_.agents[e.a].inelasticity.at(t);
    apply(i, element_force(law, LawInput{relative(q, e), relative(v, e), m, 0.0}));
  }

  for (std::size_t i = 0; i < input_slot_.size(); ++i) force[input_slot_[i]] += input_value(i, t, ctx);
  if (!ctx.held.empty())
    for (std::size_t s = 0; s < n; ++s)
      if (ctx.held[s] != 0.0) force[s] += ctx.held[s];

  // Stiction last: the holding force balances everything else on the pair.
  for (std::size_t i = 0; i < bound_.size(); ++i) {
    const auto& law = net_.elements[i].law;
    if (!std::holds_alternative<SignumFriction>(law)) continue;
    const Bound& e = bound_[i];
    const double fa = force[layout_.slot(e.a, e.account)];
    double hold = -fa;
    if (e.b != npos) {
      const double ma = effective_mass(e.a, e.account, t);
      const double mb = effective_mass(e.b, e.account, t);
      const double fb = force[layout_.slot(e.b, e.account)];
      hold = (ma * fb - mb * fa) / (ma + mb);
    }
    apply(i, element_force(law, LawInput{relative(q, e), relative(v, e), 1.0, hold}));
  }
}

std::vector<double> System::operator()(double t, std::span<const double> x) const {
  std::vector<double> dx(layout_.size());
  derivative(t, x, dx);
  return dx;
}

std::vector<double> System::internal_force_sum(double t, std::span<const double> x) const {
  std::vector<double> dx(layout_.size());
  std::vector<double> f(bound_.size());
  derivative(t, x, dx, {}, f);
  std::vector<double> per_agent(layout_.slots(), 0.0);
  for (std::size_t i = 0; i < bound_.size(); ++i) {
    const Bound& e = bound_[i];
    if (e.b == npos) continue;
    per_agent[layout_.slot(e.a, e.account)] += f[i];
    per_agent[layout_.slot(e.b, e.account)] -= f[i];
  }
  std::vector<double> sum(layout_.accounts, 0.0);
  for (std::size_t a = 0; a < layout_.agents; ++a)
    for (std::size_t k = 0; k < layout_.accounts; ++k) sum[k] += per_agent[layout_.slot(a, k)];
  return sum;
}

void System::resolve_events(double t, std::span<double> x, std::span<const double> x_prev,
                            const StepContext& ctx) const {
  std::vector<double> v_prev;  // lazily computed
  std::vector<double> dx(layout_.size());
  std::vector<double> f(bound_.size());
  for (std::size_t i = 0; i < bound_.size(); ++i) {
    const auto* law = std::get_if<SignumFriction>(&net_.elements[i].law);
    if (!law) continue;
    const Bound& e = bound_[i];
    const std::vector<double> v = flows(t, x);
    const double rel = relative(v, e);
    if (rel == 0.0) continue;
    if (v_prev.empty()) v_prev = flows(ctx.t_step, x_prev);
    const double rel_prev = relative(v_prev, e);
    const bool in_band = std::fabs(rel) <= law->v_band;
    const bool crossed = (rel > 0.0 && rel_prev < 0.0) || (rel < 0.0 && rel_prev > 0.0);
    const std::size_t pa = layout_.p(e.a, e.account);
    const std::size_t pb = e.b == npos ? npos : layout_.p(e.b, e.account);
    const double ma = effective_mass(e.a, e.account, t);
    // Kinetic friction alone would stop the pair within the next step; RK4
    // stages straddling zero would otherwise leave it chattering.
    const double mu = pb == npos ? ma : ma * effective_mass(e.b, e.account, t) / (ma + effective_mass(e.b, e.account, t));
    const bool stops = std::isfinite(ctx.h) && mu * std::fabs(rel) <= law->b_kinetic * ctx.h;
    if (!in_band && !crossed && !stops) continue;

    const double saved_a = x[pa];
    const double saved_b = pb == npos ? 0.0 : x[pb];
    if (pb == npos) {
      x[pa] = 0.0;
    } else {
      const double mb = effective_mass(e.b, e.account, t);
      const double common = (saved_a + saved_b) / (ma + mb);
      x[pa] = ma * common;
      x[pb] = mb * common;
    }

    // Holding force required at the clamped state, excluding this element.
    derivative(t, x, dx, ctx, f);
    const double fa = dx[pa] - f[i];
    double need = -fa;
    if (pb != npos) {
      const double mb = effective_mass(e.b, e.account, t);
      const double fb = dx[pb] + f[i];
      need = (ma * fb - mb * fa) / (ma + mb);
    }
    if (std::fabs(need) > law->b_static) {
      x[pa] = saved_a;
      if (pb != npos) x[pb] = saved_b;
    }
  }
}

// Simulation

namespace {

class Recorder {
 public:
  Recorder(const System& sys, const Actuator* actuator, std::size_t expected) : sys_(sys) {
    const Network& net = sys.network();
    out_.chart = net.chart;
    for (const auto& a : net.agents) out_.agent_ids.push_back(a.id);
    out_.element_count = net.elements.size();
    for (const auto& in : net.exogenous) {
      std::ostringstream label;
      label << in.agent << ":" << net.chart[in.account].name;
      out_.sources.push_back({*net.find_agent(in.agent), in.account, false, label.str()});
    }
    if (actuator) out_.sources.push_back({actuator->agent, actuator->account, true, actuator->label});
    const std::size_t slots = out_.slots();
    out_.times.reserve(expected);
    out_.q.reserve(expected * slots);
    out_.v.reserve(expected * slots);
    out_.p.reserve(expected * slots);
  }

  void record(double t, std::span<const double> x, const StepContext& ctx, double held_action) {
    const StateLayout& L = sys_.layout();
    const std::size_t n = L.slots();
    out_.times.push_back(t);
    out_.q.insert(out_.q.end(), x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    out_.p.insert(out_.p.end(), x.begin() + static_cast<std::ptrdiff_t>(n),
                  x.begin() + static_cast<std::ptrdiff_t>(2 * n));
    const std::vector<double> v = sys_.flows(t, x);
    out_.v.insert(out_.v.end(), v.begin(), v.end());

    dx_.resize(L.size());
    forces_.assign(out_.element_count, 0.0);
    sys_.derivative(t, x, dx_, ctx, forces_);
    out_.element_force.insert(out_.element_force.end(), forces_.begin(), forces_.end());

    const auto& elements = sys_.network().elements;
    std::size_t carry = 0;
    for (const auto& e : elements) {
      if (std::holds_alternative<SeriesCarry>(e.law)) {
        out_.element_state.push_back(x[L.carry(carry++)]);
      } else {
        out_.element_state.push_back(0.0);
      }
    }
    for (std::size_t i = 0; i < sys_.network().exogenous.size(); ++i)
      out_.exogenous.push_back(sys_.input_value(i, t, ctx));
    if (out_.sources.size() > sys_.network().exogenous.size()) out_.exogenous.push_back(held_action);
  }

  TimeSeries take() { return std::move(out_); }

 private:
  const System& sys_;
  TimeSeries out_;
  std::vector<double> dx_;
  std::vector<double> forces_;
};

void check_finite(std::span<const double> x, double t) {
  for (double xi : x) {
    if (!std::isfinite(xi)) {
      std::ostringstream msg;
      msg << "non-finite state (blow-up) at t=" << t;
      throw BlowUpError(msg.str(), t);
    }
  }
}

}  // namespace

TimeSeries simulate(const Network& net, const SimConfig& cfg, const Actuator* actuator) {
  cfg.validate();
  const System sys(net);
  const StateLayout& L = sys.layout();
  if (actuator && (actuator->agent >= L.agents || actuator->account >= L.accounts || !actuator->action))
    throw AssemblyError("actuator targets a slot outside the network");

  const std::size_t n_steps = cfg.steps();
  const double h = cfg.step;
  const std::size_t dim = L.size();

  std::vector<double> x = sys.initial_state();
  std::vector<double> x_prev(dim), k1(dim), k2(dim), k3(dim), k4(dim), stage(dim);
  std::vector<double> held(actuator ? L.slots() : 0, 0.0);
  double action = 0.0;

  Recorder rec(sys, actuator, n_steps / cfg.record_every + 2);
  check_finite(x, 0.0);

  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t = static_cast<double>(n) * h;
    if (actuator) {
      action = actuator->action(t, x);
      if (!std::isfinite(action)) throw BlowUpError("non-finite controller action", t);
      held[L.slot(actuator->agent, actuator->account)] = action;
    }
    const StepContext ctx{t, h, held};
    if (n % cfg.record_every == 0) rec.record(t, x, ctx, action);

    sys.derivative(t, x, k1, ctx);
    kernels::axpy(stage, x, 0.5 * h, k1);
    sys.derivative(t + 0.5 * h, stage, k2, ctx);
    kernels::axpy(stage, x, 0.5 * h, k2);
    sys.derivative(t + 0.5 * h, stage, k3, ctx);
    kernels::axpy(stage, x, h, k3);
    sys.derivative(t + h, stage, k4, ctx);

    x_prev = x;
    kernels::rk4_combine(x, x_prev, k1, k2, k3, k4, h);
    const double t_next = static_cast<double>(n + 1) * h;
    check_finite(x, t_next);
    sys.resolve_events(t_next, x, x_prev, ctx);
  }

  const double t_end = static_cast<double>(n_steps) * h;
  const StepContext end_ctx{t_end, h, held};
  rec.record(t_end, x, end_ctx, action);
  return rec.take();
}

ConservationReport verify_conservation(const TimeSeries& series, const Network& net) {
  ConservationReport report{0.0, 0.0, !net.has_reference()};
  const std::size_t d = series.chart.dimension();
  const std::size_t agents = series.agent_ids.size();
  if (series.size() == 0) return report;

  std::vector<double> total0(d, 0.0);
  for (std::size_t a = 0; a < agents; ++a)
    for (std::size_t k = 0; k < d; ++k) total0[k] += series.p_at(0, a, k);

  // Inducements that are not captured analytically: market-attached element
  // forces (trapezoid) and held controller actions (exact left sums).
  std::vector<double> accrued(d, 0.0);
  const double t0 = series.times.front();
  for (std::size_t r = 0; r < series.size(); ++r) {
    if (r > 0) {
      const double dt = series.times[r] - series.times[r - 1];
      for (std::size_t i = 0; i < net.elements.size(); ++i) {
        if (!net.elements[i].attachment.to_market()) continue;
        const std::size_t k = net.elements[i].attachment.account;
        accrued[k] += 0.5 * dt * (series.force_at(r - 1, i) + series.force_at(r, i));
      }
      for (std::size_t s = 0; s < series.sources.size(); ++s)
        if (series.sources[s].held) accrued[series.sources[s].account] += dt * series.exogenous_at(r - 1, s);
    }
    for (std::size_t k = 0; k < d; ++k) {
      double total = 0.0;
      for (std::size_t a = 0; a < agents; ++a) total += series.p_at(r, a, k);
      double exogenous = 0.0;
      for (const auto& in : net.exogenous)
        if (in.account == k) exogenous += in.signal.integral(series.times[r]) - in.signal.integral(t0);
      const double drift = std::fabs(total - total0[k] - exogenous - accrued[k]);
      report.momentum_drift = std::max(report.momentum_drift, drift);
    }
  }

  report.balance_residual_max = surplus::ledger_accrue(series, net).residuals.general;
  return report;
}

}  // namespace econmech
