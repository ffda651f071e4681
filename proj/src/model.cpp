#include "econmech/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "econmech/errors.hpp"

namespace econmech {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }
bool finite_pos(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

// ChartOfAccounts

ChartOfAccounts::ChartOfAccounts() : accounts_{{"units", "#"}} {}

ChartOfAccounts::ChartOfAccounts(std::vector<Account> accounts) : accounts_(std::move(accounts)) {
  require(!accounts_.empty(), "chart of accounts needs at least one account");
  std::set<std::string> seen;
  for (const auto& a : accounts_) {
    require(!a.name.empty(), "account names must be nonempty");
    require(seen.insert(a.name).second, "duplicate account name '" + a.name + "'");
  }
}

std::optional<std::size_t> ChartOfAccounts::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < accounts_.size(); ++i)
    if (accounts_[i].name == name) return i;
  return std::nullopt;
}

CommodityVector::CommodityVector(Role role, std::vector<double> values)
    : role_(role), values_(std::move(values)) {
  for (double x : values_) require(std::isfinite(x), "commodity vector entries must be finite");
}

// Inelasticity

Inelasticity::Inelasticity(double m) : rep_(m) {
  require(finite_pos(m), "inelasticity must satisfy m > 0");
}

Inelasticity Inelasticity::schedule(std::vector<Breakpoint> knots) {
  require(!knots.empty(), "inelasticity schedule needs at least one knot");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    require(std::isfinite(knots[i].t), "schedule times must be finite");
    require(finite_pos(knots[i].m), "inelasticity must satisfy m > 0 at every schedule knot");
    if (i > 0) require(knots[i].t > knots[i - 1].t, "schedule times must be strictly increasing");
  }
  Inelasticity out;
  out.rep_ = std::move(knots);
  return out;
}

Inelasticity Inelasticity::tensor(ElasticityTensor elasticity) {
  Inelasticity out;
  out.rep_ = std::move(elasticity);
  return out;
}

double Inelasticity::at(double t) const {
  return std::visit(
      overloaded{
          [](double m) { return m; },
          [t](const std::vector<Breakpoint>& k) {
            if (t <= k.front().t) return k.front().m;
            if (t >= k.back().t) return k.back().m;
            auto hi = std::upper_bound(k.begin(), k.end(), t,
                                       [](double x, const Breakpoint& b) { return x < b.t; });
            auto lo = hi - 1;
            const double w = (t - lo->t) / (hi->t - lo->t);
            return lo->m + w * (hi->m - lo->m);
          },
          [](const ElasticityTensor&) -> double {
            throw DomainError("scalar inelasticity requested from a tensor agent");
          }},
      rep_);
}

double Inelasticity::rate(double t) const {
  if (!is_schedule()) return 0.0;
  const auto& k = knots();
  if (k.size() < 2 || t < k.front().t || t >= k.back().t) return 0.0;
  auto hi = std::upper_bound(k.begin(), k.end(), t,
                             [](double x, const Breakpoint& b) { return x < b.t; });
  auto lo = hi - 1;
  return (hi->m - lo->m) / (hi->t - lo->t);
}

std::vector<double> Inelasticity::flow(std::span<const double> price, double t) const {
  if (is_tensor()) return elasticity().demand(price);
  const double m = at(t);
  std::vector<double> v(price.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = price[i] / m;
  return v;
}

std::vector<double> Inelasticity::price(std::span<const double> flow, double t) const {
  if (is_tensor()) {
    const EigenBaskets eb = eigen_baskets(elasticity());
    std::vector<double> y = to_basket_chart(eb, flow);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] /= eb.eigenvalues[i];
    return eb.basis.transposed().apply(y);
  }
  const double m = at(t);
  std::vector<double> p(flow.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = m * flow[i];
  return p;
}

Demander Demander::from_flow(std::string id, Inelasticity m, std::vector<double> q,
                             std::vector<double> v) {
  Demander d{std::move(id), std::move(m), std::move(q), {}, {}};
  d.p = d.inelasticity.price(v, 0.0);
  return d;
}

// Force laws

bool is_friction(const ElementLaw& law) noexcept {
  return std::holds_alternative<LinearDamper>(law) || std::holds_alternative<SignumFriction>(law) ||
         std::holds_alternative<QuadraticDrag>(law) || std::holds_alternative<SeriesCarry>(law);
}

bool is_storage(const ElementLaw& law) noexcept {
  return std::holds_alternative<LinearSpring>(law) || std::holds_alternative<ConstantNeeds>(law) ||
         std::holds_alternative<GravityLikeConvenience>(law) ||
         std::holds_alternative<StockoutWall>(law) || std::holds_alternative<SaturatingSpring>(law) ||
         std::holds_alternative<SeriesCarry>(law);
}

bool is_single_agent_only(const ElementLaw& law) noexcept {
  return std::holds_alternative<ConstantNeeds>(law) ||
         std::holds_alternative<GravityLikeConvenience>(law) ||
         std::holds_alternative<StockoutWall>(law);
}

bool is_linear(const ElementLaw& law) noexcept {
  return std::holds_alternative<LinearSpring>(law) || std::holds_alternative<LinearDamper>(law) ||
         std::holds_alternative<ConstantNeeds>(law) || std::holds_alternative<SeriesCarry>(law);
}

std::string_view kind_name(const ElementLaw& law) noexcept {
  return std::visit(overloaded{[](const LinearSpring&) { return "spring"; },
                               [](const LinearDamper&) { return "damper"; },
                               [](const SignumFriction&) { return "signum"; },
                               [](const QuadraticDrag&) { return "drag"; },
                               [](const ConstantNeeds&) { return "needs"; },
                               [](const GravityLikeConvenience&) { return "gravity"; },
                               [](const StockoutWall&) { return "stockout"; },
                               [](const SaturatingSpring&) { return "saturating"; },
                               [](const SeriesCarry&) { return "carry"; }},
                    law);
}

void validate_law(const ElementLaw& law) {
  std::visit(
      overloaded{
          [](const LinearSpring& e) {
            require(finite_pos(e.k), "spring requires k > 0");
            require(std::isfinite(e.set_point), "spring set-point must be finite");
          },
          [](const LinearDamper& e) { require(finite_nonneg(e.b), "damper requires b >= 0"); },
          [](const SignumFriction& e) {
            require(finite_nonneg(e.b_static), "signum friction requires b_static >= 0");
            require(finite_nonneg(e.b_kinetic), "signum friction requires b_kinetic >= 0");
            require(finite_pos(e.v_band), "signum friction requires v_band > 0");
          },
          [](const QuadraticDrag& e) { require(finite_nonneg(e.c), "drag requires c >= 0"); },
          [](const ConstantNeeds& e) { require(std::isfinite(e.g), "needs g must be finite"); },
          [](const GravityLikeConvenience& e) {
            require(finite_pos(e.mu), "gravity-like convenience requires mu > 0");
            if (e.q_ref) require(finite_pos(*e.q_ref), "gravity-like datum requires q_ref > 0");
          },
          [](const StockoutWall& e) {
            require(std::isfinite(e.q_min) && std::isfinite(e.q_max) && e.q_min < e.q_max,
                    "stockout wall requires q_min < q_max");
            require(finite_pos(e.k_wall), "stockout wall requires k_wall > 0");
          },
          [](const SaturatingSpring& e) {
            require(finite_pos(e.k), "saturating spring requires k > 0");
            require(finite_pos(e.f_sat), "saturating spring requires f_sat > 0");
            require(std::isfinite(e.set_point), "saturating spring set-point must be finite");
          },
          [](const SeriesCarry& e) {
            require(finite_pos(e.k), "carry requires k > 0");
            require(finite_pos(e.b), "carry requires b > 0 (b = 0 is an infinite carry rate)");
            require(std::isfinite(e.s0), "carry initial stock must be finite");
          }},
      law);
}

double element_force(const ElementLaw& law, const LawInput& in) {
  return std::visit(
      overloaded{
          [&](const LinearSpring& e) { return -e.k * (in.q - e.set_point); },
          [&](const LinearDamper& e) { return -e.b * in.v; },
          [&](const SignumFriction& e) {
            if (std::fabs(in.v) > e.v_band) return -e.b_kinetic * sgn(in.v);
            return std::clamp(in.hold, -e.b_static, e.b_static);
          },
          [&](const QuadraticDrag& e) { return -e.c * in.v * std::fabs(in.v); },
          [&](const ConstantNeeds& e) { return in.m * e.g; },
          [&](const GravityLikeConvenience& e) {
            if (!(in.q > 0.0)) throw SingularityError("gravity-like convenience is singular at q <= 0");
            return -e.mu * in.m / in.q;
          },
          [&](const StockoutWall& e) {
            if (in.q > e.q_max) return -e.k_wall * (in.q - e.q_max);
            if (in.q < e.q_min) return -e.k_wall * (in.q - e.q_min);
            return 0.0;
          },
          [&](const SaturatingSpring& e) {
            return std::clamp(-e.k * (in.q - e.set_point), -e.f_sat, e.f_sat);
          },
          [&](const SeriesCarry& e) { return -e.k * in.q; }},
      law);
}

// WantSignal

WantSignal::WantSignal(Shape shape) : shape_(std::move(shape)) {
  std::visit(overloaded{[](const NoWant&) {},
                        [](const Step& s) {
                          require(std::isfinite(s.F) && std::isfinite(s.t_on), "step want must be finite");
                        },
                        [](const Impulse& s) {
                          require(std::isfinite(s.J) && std::isfinite(s.t0), "impulse must be finite");
                        },
                        [](const Sinusoid& s) {
                          require(std::isfinite(s.amplitude) && std::isfinite(s.phase),
                                  "sinusoid amplitude and phase must be finite");
                          require(finite_pos(s.frequency), "sinusoid requires frequency > 0");
                        }},
             shape_);
}

double WantSignal::value(double t) const {
  return std::visit(overloaded{[](const NoWant&) { return 0.0; },
                               [t](const Step& s) { return t >= s.t_on ? s.F : 0.0; },
                               [](const Impulse&) { return 0.0; },
                               [t](const Sinusoid& s) {
                                 return s.amplitude * std::sin(s.frequency * t + s.phase);
                               }},
                    shape_);
}

double WantSignal::value(double t, double t_step, double h) const {
  if (const auto* imp = std::get_if<Impulse>(&shape_)) {
    return (imp->t0 >= t_step && imp->t0 < t_step + h) ? imp->J / h : 0.0;
  }
  return value(t);
}

double WantSignal::integral(double t) const {
  return std::visit(overloaded{[](const NoWant&) { return 0.0; },
                               [t](const Step& s) { return t > s.t_on ? s.F * (t - s.t_on) : 0.0; },
                               [t](const Impulse& s) { return t > s.t0 ? s.J : 0.0; },
                               [t](const Sinusoid& s) {
                                 return s.amplitude / s.frequency *
                                        (std::cos(s.phase) - std::cos(s.frequency * t + s.phase));
                               }},
                    shape_);
}

double WantSignal::steady_level() const {
  if (const auto* s = std::get_if<Step>(&shape_)) return s->F;
  return 0.0;
}

bool WantSignal::is_zero() const {
  return std::visit(overloaded{[](const NoWant&) { return true; },
                               [](const Step& s) { return s.F == 0.0; },
                               [](const Impulse& s) { return s.J == 0.0; },
                               [](const Sinusoid& s) { return s.amplitude == 0.0; }},
                    shape_);
}

// Network

std::optional<std::size_t> Network::find_agent(const std::string& id) const {
  for (std::size_t i = 0; i < agents.size(); ++i)
    if (agents[i].id == id) return i;
  return std::nullopt;
}

bool Network::has_reference() const {
  return std::any_of(elements.begin(), elements.end(),
                     [](const ForceElement& e) { return e.attachment.to_market(); });
}

bool Network::driven() const {
  return std::any_of(exogenous.begin(), exogenous.end(),
                     [](const ExogenousInput& in) { return !in.signal.is_zero(); });
}

void Network::validate() const {
  std::vector<std::string> problems;
  const std::size_t d = chart.dimension();
  if (d == 0) problems.push_back("chart of accounts is empty");
  if (agents.empty()) problems.push_back("network has no agents");

  std::set<std::string> ids;
  for (const auto& a : agents) {
    if (a.id.empty()) problems.push_back("agent with empty id");
    if (!ids.insert(a.id).second) problems.push_back("duplicate agent id '" + a.id + "'");
    if (a.q.size() != d) problems.push_back("agent '" + a.id + "' stock does not match chart dimension");
    if (a.p.size() != d) problems.push_back("agent '" + a.id + "' price does not match chart dimension");
    if (!a.reference_flow.empty() && a.reference_flow.size() != d)
      problems.push_back("agent '" + a.id + "' benchmark flow does not match chart dimension");
    if (a.inelasticity.is_tensor() && a.inelasticity.elasticity().dimension() != d)
      problems.push_back("agent '" + a.id + "' elasticity tensor does not match chart dimension");
    for (double x : a.q)
      if (!std::isfinite(x)) problems.push_back("agent '" + a.id + "' has a non-finite stock");
    for (double x : a.p)
      if (!std::isfinite(x)) problems.push_back("agent '" + a.id + "' has a non-finite price");
  }

  for (std::size_t i = 0; i < elements.size(); ++i) {
    const auto& e = elements[i];
    const std::string tag = "element #" + std::to_string(i + 1) + " (" + std::string(kind_name(e.law)) + ")";
    if (!find_agent(e.attachment.agent))
      problems.push_back(tag + " attaches to unknown agent '" + e.attachment.agent + "'");
    if (!e.attachment.to_market()) {
      if (!find_agent(e.attachment.counterparty))
        problems.push_back(tag + " attaches to unknown counterparty '" + e.attachment.counterparty + "'");
      else if (e.attachment.counterparty == e.attachment.agent)
        problems.push_back(tag + " attaches an agent to itself");
      if (is_single_agent_only(e.law)) problems.push_back(tag + " cannot link two agents");
    }
    if (e.attachment.account >= d)
      problems.push_back(tag + " attaches to account index " + std::to_string(e.attachment.account) +
                         " outside the chart");
  }

  for (std::size_t i = 0; i < exogenous.size(); ++i) {
    const auto& in = exogenous[i];
    if (!find_agent(in.agent))
      problems.push_back("input #" + std::to_string(i + 1) + " targets unknown agent '" + in.agent + "'");
    if (in.account >= d)
      problems.push_back("input #" + std::to_string(i + 1) + " targets an account outside the chart");
  }

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "malformed network: ";
    for (std::size_t i = 0; i < problems.size(); ++i) msg << (i ? "; " : "") << problems[i];
    throw AssemblyError(msg.str());
  }
  for (const auto& e : elements) validate_law(e.law);
}

double default_wall_stiffness(const Network& net, const Attachment& where) {
  double k = 0.0;
  for (const auto& e : net.elements) {
    if (e.attachment.agent != where.agent || e.attachment.account != where.account) continue;
    if (const auto* s = std::get_if<LinearSpring>(&e.law)) k = std::max(k, s->k);
    if (const auto* s = std::get_if<SaturatingSpring>(&e.law)) k = std::max(k, s->k);
  }
  return k > 0.0 ? 1e6 * k : 1e6;
}

// Operations

double demand_schedule(double m, double price) {
  require(finite_pos(m), "demand schedule requires m > 0");
  return price / m;
}

CommodityVector demand_schedule(double m, const CommodityVector& price) {
  require(finite_pos(m), "demand schedule requires m > 0");
  std::vector<double> v(price.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = price[i] / m;
  return CommodityVector(Role::flow, std::move(v));
}

CenterOfDemand center_of_demand(std::span<const AgentKinematics> agents) {
  require(!agents.empty(), "center of demand needs at least one agent");
  const std::size_t d = agents.front().q.size();
  CenterOfDemand out{std::vector<double>(d), std::vector<double>(d), std::vector<double>(d), 0.0};
  for (const auto& a : agents) {
    require(finite_pos(a.m), "center of demand requires every m > 0");
    require(a.q.size() == d && a.v.size() == d && (a.a.empty() || a.a.size() == d),
            "center of demand requires agents on the same chart");
    out.m_total += a.m;
  }
  for (const auto& a : agents) {
    const double w = a.m / out.m_total;
    for (std::size_t k = 0; k < d; ++k) {
      out.q[k] += w * a.q[k];
      out.v[k] += w * a.v[k];
      if (!a.a.empty()) out.a[k] += w * a.a[k];
    }
  }
  return out;
}

CenterOfDemand center_of_demand(std::span<const Demander> agents, double t) {
  std::vector<AgentKinematics> kin;
  kin.reserve(agents.size());
  for (const auto& a : agents) kin.push_back({a.inelasticity.at(t), a.q, a.flow(t), {}});
  return center_of_demand(kin);
}

WantParts want_decomposition(double m, double v, double a, double m_dot, double v_star_dot) {
  require(finite_pos(m), "want decomposition requires m > 0");
  return {m * a, v * m_dot, -m * v_star_dot};
}

WantParts want_decomposition(const Demander& agent, std::size_t account, double t, double a,
                             double v_star_dot) {
  const double m = agent.inelasticity.at(t);
  const double v = agent.flow(t).at(account);
  return want_decomposition(m, v, a, agent.inelasticity.rate(t), v_star_dot);
}

CommodityVector excess_demand(const CommodityVector& va, const CommodityVector& vb) {
  require(va.role() == vb.role(), "excess demand requires vectors of the same role");
  require(va.size() == vb.size(), "excess demand requires vectors on the same chart");
  std::vector<double> out(va.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] - vb[i];
  return CommodityVector(va.role(), std::move(out));
}

}  // namespace econmech
