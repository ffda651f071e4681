// End-to-end acceptance checks. One PASS/FAIL line per criterion; the exit
// status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "econmech/control.hpp"
#include "econmech/equilibrium.hpp"
#include "econmech/errors.hpp"
#include "econmech/lti.hpp"
#include "econmech/scenario.hpp"
#include "econmech/surplus.hpp"
#include "econmech/tensor.hpp"
#include "oracle.hpp"

using namespace econmech;
namespace fs = std::filesystem;

namespace {

const fs::path data = ECONMECH_TEST_DATA;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Demander agent(const std::string& id, double m, double q0 = 0, double p0 = 0) {
  return Demander{id, m, {q0}, {p0}, {}};
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct Outcome {
  bool pass;
  std::string detail;
};

// 1. First-order free and step responses against the engine.
Outcome first_order() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  for (double gamma : {0.0, 0.02, 0.2, 0.6, 2.0}) {
    const double m = 1, b = gamma * m, p0 = 1, F = 1;
    const auto curve = lti::respond(1, lti::Topology::parallel, m, 0, b, F, p0, 20, 2001);
    Network free_net, step_net;
    free_net.agents.push_back(agent("a", m, 0, p0));
    free_net.elements.push_back({LinearDamper{b}, {"a", "", 0}});
    step_net.agents.push_back(agent("a", m));
    step_net.elements.push_back({LinearDamper{b}, {"a", "", 0}});
    step_net.exogenous.push_back({"a", 0, WantSignal{Step{F, 0}}});
    const SimConfig cfg{20, 1e-3, 10};
    const auto fs_ = simulate(free_net, cfg), ss = simulate(step_net, cfg);
    for (std::size_t i = 0; i < curve.t.size(); ++i) {
      worst = std::max(worst, std::fabs(fs_.p_at(i, 0, 0) - curve.free[i]));
      worst = std::max(worst, std::fabs(ss.p_at(i, 0, 0) - curve.step[i]));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < 1e-6 && secs < 1.0, fmt("max |err| %.3g, runtime %.3g s", worst, secs)};
}

// 2. Second-order discount factor against RK4, overshoot and settling order.
Outcome second_order() {
  const double m = 1, k = 1, h = 1e-3;
  const std::size_t n = 20000;
  double worst = 0, min_margin = INFINITY, max_excess = -INFINITY;
  for (double zeta : {0.0, 0.1, 0.3, 0.9, 1.0, 2.0}) {
    const double b = 2 * zeta * std::sqrt(k * m);
    const auto p = lti::second_order_params(m, k, b, lti::Topology::parallel);
    const auto x = oracle::oscillator_free(m, b, k, h, n);
    double peak = -INFINITY;
    for (std::size_t i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) * h;
      worst = std::max(worst, std::fabs(lti::discount_factor(p, t) - x[i]));
      peak = std::max(peak, lti::step_stock(p, 1.0, k, t));
    }
    if (zeta < 1) min_margin = std::min(min_margin, peak - 1.0);
    else max_excess = std::max(max_excess, peak - 1.0);
  }
  const auto s1 = lti::transient_metrics(lti::second_order_params(m, k, 2, lti::Topology::parallel)).settling_time;
  const auto s2 = lti::transient_metrics(lti::second_order_params(m, k, 4, lti::Topology::parallel)).settling_time;
  const bool order = s1 && s2 && *s1 < *s2;
  return {worst < 1e-6 && min_margin > 0 && max_excess <= 1e-9 && order,
          fmt("max |DF - rk4| %.3g, min overshoot %.3g, max excess %.3g", worst, min_margin, max_excess) +
              (order ? fmt(", settling %.3g < %.3g", *s1, *s2) : ", settling order wrong")};
}

// 3. Continuity of the discount factor through critical damping.
Outcome continuity() {
  const double omega = 1, gamma_c = 2 * omega;
  const auto crit = lti::second_order_from_rates(gamma_c, omega);
  double worst = 0;
  for (double zeta : {1 - 1e-6, 1 + 1e-6}) {
    const auto p = lti::second_order_from_rates(2 * zeta * omega, omega);
    for (int i = 0; i <= 10000; ++i) {
      const double t = i * (10 / gamma_c) / 10000;
      worst = std::max(worst, std::fabs(lti::discount_factor(p, t) - lti::discount_factor(crit, t)));
    }
  }
  return {worst < 1e-4, fmt("max |DF - DF_crit| %.3g", worst)};
}

// 4. Closed two-body conservation with and without friction.
Outcome conservation() {
  auto pair = [](bool friction) {
    Network net;
    net.agents.push_back(agent("d", 1.0, 0.0, 1.0));
    net.agents.push_back(agent("s", 2.0, 0.5, -0.2));
    net.elements.push_back({LinearSpring{3}, {"d", "s", 0}});
    if (friction) net.elements.push_back({LinearDamper{0.4}, {"d", "s", 0}});
    return net;
  };
  const SimConfig cfg{50, 1e-3};
  const auto free_net = pair(false), damped_net = pair(true);
  const auto fs_ = simulate(free_net, cfg), ds = simulate(damped_net, cfg);
  const auto fr = verify_conservation(fs_, free_net), dr = verify_conservation(ds, damped_net);
  const auto fl = surplus::ledger_accrue(fs_, free_net), dl = surplus::ledger_accrue(ds, damped_net);
  double h_drift = 0, hq_drift = 0;
  for (std::size_t r = 0; r < fl.size(); ++r) h_drift = std::max(h_drift, std::fabs(fl.H[r] - fl.H[0]));
  for (std::size_t r = 0; r < dl.size(); ++r)
    hq_drift = std::max(hq_drift, std::fabs(dl.H[r] + dl.dQ[r] - dl.H[0]));
  h_drift /= fl.H[0];
  hq_drift /= dl.H[0];
  const double drift = std::max(fr.momentum_drift, dr.momentum_drift);
  return {drift < 1e-8 && h_drift < 1e-6 && hq_drift < 1e-6,
          fmt("momentum drift %.3g, |dH|/H0 %.3g, |d(H+dQ)|/H0 %.3g", drift, h_drift, hq_drift)};
}

// 5. General balance on a driven damped oscillator.
Outcome general_balance() {
  Network net;
  net.agents.push_back(agent("a", 1.0, 1.0));
  net.elements.push_back({LinearSpring{4}, {"a", "", 0}});
  net.elements.push_back({LinearDamper{0.4}, {"a", "", 0}});
  net.exogenous.push_back({"a", 0, WantSignal{Sinusoid{1.5, 1.1, 0.2}}});
  const auto L = surplus::ledger_accrue(simulate(net, SimConfig{30, 1e-3}), net);
  double worst = 0;
  for (double r : L.balance_residual) worst = std::max(worst, std::fabs(r));
  return {worst < 1e-6 * L.E, fmt("max |H + dQ + dW - E| / E %.3g", worst / L.E)};
}

bool friction_bearing(const Network& net) {
  return std::any_of(net.elements.begin(), net.elements.end(), [](const ForceElement& e) {
    return std::holds_alternative<LinearDamper>(e.law) || std::holds_alternative<SignumFriction>(e.law) ||
           std::holds_alternative<QuadraticDrag>(e.law) || std::holds_alternative<SeriesCarry>(e.law);
  });
}

// 6. Disposable surplus as a Lyapunov function on the undriven friction corpus.
Outcome lyapunov() {
  std::size_t count = 0;
  std::string failures;
  double worst = 0;
  for (const auto& entry : fs::directory_iterator(data / "valid")) {
    auto cfg = parse_scenario(slurp(entry.path()));
    if (!cfg.network.exogenous.empty() || cfg.control || !friction_bearing(cfg.network)) continue;
    ++count;
    cfg.sim.record_every = 1;
    const auto series = simulate(cfg.network, cfg.sim);
    const auto lc = lyapunov_check(series, cfg.network);
    const auto H0 = surplus::ledger_accrue(series, cfg.network).H[0];
    worst = std::max(worst, lc.max_increase / std::max(H0, 1e-300));
    const auto eq = classify_equilibrium(cfg.network);
    if (!lc.ok || eq.stability != Stability::asymptotically_stable)
      failures += " " + entry.path().filename().string() + "(" + std::string(name(eq.stability)) + ")";
  }
  return {count >= 5 && failures.empty(),
          fmt("%g scenarios, max relative step increase %.3g", static_cast<double>(count), worst) +
              (failures.empty() ? "" : ", failing:" + failures)};
}

// 7. Spread through a damper decays at the mutual elasticity times b.
Outcome spread_decay() {
  const auto cfg = parse_scenario(slurp(data / "valid" / "two_body_damper.scn"));
  const auto s = simulate(cfg.network, cfg.sim);
  const double md = cfg.network.agents[0].inelasticity.at(0), ms = cfg.network.agents[1].inelasticity.at(0);
  const double b = std::get<LinearDamper>(cfg.network.elements[0].law).b;
  const double eps = 1 / md + 1 / ms;
  auto rel = [&](std::size_t r) {
    const double pd = s.p_at(r, 0, 0), ps = s.p_at(r, 1, 0);
    return two_body_reduce(1 / md, 1 / ms, pd, ps, pd / md, ps / ms).relative_price;
  };
  const double r0 = rel(0);
  double worst = 0;
  for (std::size_t r = 0; r < s.size(); ++r) {
    const double fit = r0 * std::exp(-eps * b * s.times[r]);
    worst = std::max(worst, std::fabs(rel(r) - fit) / std::fabs(r0));
  }
  return {worst < 1e-3, fmt("relative L-inf error %.3g at rate %.3g", worst, eps * b)};
}

// 8. Eigen-baskets on random SPD tensors.
Outcome baskets() {
  oracle::Gen g(2024);
  double recon = 0, ortho = 0, chart = 0;
  for (int i = 0; i < 100; ++i) {
    const auto d = static_cast<std::size_t>(g.integer(1, 8));
    const auto rows = g.spd(d);
    Matrix a(d, d);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) a(r, c) = rows[r][c];
    const ElasticityTensor eps(a);
    const auto eb = eigen_baskets(eps);
    recon = std::max(recon, max_abs_diff(eb.reconstruct(), a));
    Matrix gram(d, d);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) {
        double s = 0;
        for (std::size_t k = 0; k < d; ++k) s += eb.basis(k, r) * eb.basis(k, c);
        gram(r, c) = s - (r == c ? 1.0 : 0.0);
      }
    ortho = std::max(ortho, max_abs_diff(gram, Matrix(d, d)));
    std::vector<double> p(d);
    for (auto& x : p) x = g.uniform(-3, 3);
    const double ts = tensor_surplus(eps, p);
    chart = std::max(chart, std::fabs(ts - basket_surplus(eb, p)) / std::max(1.0, ts));
  }
  bool rejected = false;
  try {
    ElasticityTensor(Matrix{{1, 2}, {2, 1}});
  } catch (const DomainError&) {
    rejected = true;
  }
  return {recon < 1e-12 && ortho < 1e-12 && chart < 1e-12 && rejected,
          fmt("reconstruction %.3g, orthonormality %.3g, chart invariance %.3g", recon, ortho, chart) +
              (rejected ? ", indefinite input rejected" : ", indefinite input accepted")};
}

// 9. RK4 error ratio when the step is halved.
Outcome convergence() {
  struct Case {
    Network net;
    std::function<double(const TimeSeries&, std::size_t)> measure;
    std::function<double(double)> exact;
    double horizon, h;
  };
  std::vector<Case> cases;
  {
    Network n;
    n.agents.push_back(agent("a", 1.0, 0, 1.0));
    n.elements.push_back({LinearDamper{0.8}, {"a", "", 0}});
    const auto p = lti::first_order_params(1.0, 0.8);
    cases.push_back({n, [](const TimeSeries& s, std::size_t r) { return s.p_at(r, 0, 0); },
                     [p](double t) { return lti::free_response(p, 1.0, t); }, 10, 0.2});
  }
  {
    Network n;
    n.agents.push_back(agent("a", 2.0));
    n.elements.push_back({LinearDamper{1.0}, {"a", "", 0}});
    n.exogenous.push_back({"a", 0, WantSignal{Step{1.5, 0}}});
    const auto p = lti::first_order_params(2.0, 1.0);
    cases.push_back({n, [](const TimeSeries& s, std::size_t r) { return s.p_at(r, 0, 0); },
                     [p](double t) { return lti::step_response(p, 1.5, t); }, 10, 0.2});
  }
  for (double zeta : {0.0, 0.3, 2.0}) {
    const double m = 1, k = 4, b = 2 * zeta * std::sqrt(k * m);
    Network n;
    n.agents.push_back(agent("a", m, 1.0));
    n.elements.push_back({LinearSpring{k}, {"a", "", 0}});
    if (b > 0) n.elements.push_back({LinearDamper{b}, {"a", "", 0}});
    const auto p = lti::second_order_params(m, k, b, lti::Topology::parallel);
    cases.push_back({n, [](const TimeSeries& s, std::size_t r) { return s.q_at(r, 0, 0); },
                     [p](double t) { return lti::free_response(p, 1.0, t); }, 10, 0.05});
  }
  double lo = INFINITY, hi = 0;
  for (const auto& c : cases) {
    auto err = [&](double h, std::size_t every) {
      const auto s = simulate(c.net, SimConfig{c.horizon, h, every});
      double e = 0;
      for (std::size_t r = 0; r < s.size(); ++r) e = std::max(e, std::fabs(c.measure(s, r) - c.exact(s.times[r])));
      return e;
    };
    const double ratio = err(c.h, 1) / err(c.h / 2, 2);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  return {lo >= 8 && hi <= 32, fmt("error ratios in [%.3g, %.3g] over %g cases", lo, hi, static_cast<double>(cases.size()))};
}

// 10. PI removes the error, P leaves gamma r / (kp + gamma).
Outcome control() {
  auto loop = [](PidGains g) {
    ControlLoop l;
    l.plant.agents.push_back(agent("a", 1.0));
    l.plant.elements.push_back({LinearDamper{0.5}, {"a", "", 0}});
    l.agent = "a";
    l.variable = Measured::p;
    l.gains = g;
    l.setpoint = 10;
    return l;
  };
  const double r = 10, gamma = 0.5, kp = 2;
  const auto pi = loop({kp, 0.5, 0});
  const auto p_only = loop({kp, 0, 0});
  const SimConfig cfg{100, 1e-3, 10};
  const auto e_pi = steady_state_error(closed_loop_simulate(pi, cfg).series, pi);
  const auto e_p = steady_state_error(closed_loop_simulate(p_only, cfg).series, p_only);
  const double expected = gamma * r / (kp + gamma);
  if (!e_pi || !e_p) return {false, "loop did not settle"};
  const double rel = std::fabs(*e_p - expected) / expected;
  return {std::fabs(*e_pi) < 1e-3 * r && rel < 1e-4,
          fmt("PI error %.3g, P error %.6g vs %.6g", *e_pi, *e_p, expected) + fmt(" (relative %.3g)", rel)};
}

// 11. Bad corpus rejected with line numbers; valid corpus round-trips.
Outcome parser() {
  std::size_t bad = 0, rejected = 0, good = 0, round = 0;
  for (const auto& entry : fs::directory_iterator(data / "bad")) {
    ++bad;
    try {
      parse_scenario(slurp(entry.path()));
    } catch (const ParseError& e) {
      if (e.line() > 0 && std::string(e.what()).rfind("line ", 0) == 0) ++rejected;
    }
  }
  for (const auto& entry : fs::directory_iterator(data / "valid")) {
    ++good;
    const auto c = parse_scenario(slurp(entry.path()));
    if (parse_scenario(dump_scenario(c)) == c) ++round;
  }
  return {bad >= 10 && rejected == bad && good >= 20 && round == good,
          fmt("%g/%g bad rejected with line numbers, ", static_cast<double>(rejected), static_cast<double>(bad)) +
              fmt("%g/%g valid round-trip", static_cast<double>(round), static_cast<double>(good))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"first-order responses", first_order},  {"second-order discount factor", second_order},
      {"regime continuity", continuity},        {"conservation", conservation},
      {"general balance", general_balance},     {"lyapunov", lyapunov},
      {"spread decay", spread_decay},           {"eigen-baskets", baskets},
      {"rk4 convergence", convergence},         {"control", control},
      {"parser", parser}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
