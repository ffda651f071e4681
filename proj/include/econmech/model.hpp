#pragma once

// Domain types for demanders, force laws and networks, plus the pure
// operations on them (demand schedule, force evaluation, center of demand,
// want decomposition).
//
// Sign convention: every force returned here acts ON the agent it is
// attached to. Storage laws restore toward their set-point and friction laws
// oppose the flow.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "econmech/tensor.hpp"

namespace econmech {

struct Account {
  std::string name;
  std::string unit;
  bool operator==(const Account&) const = default;
};

/// Ordered list of commodity accounts. Names are unique and nonempty.
class ChartOfAccounts {
 public:
  /// Single account "units" measured in "#".
  ChartOfAccounts();
  explicit ChartOfAccounts(std::vector<Account> accounts);

  std::size_t dimension() const noexcept { return accounts_.size(); }
  const Account& operator[](std::size_t i) const { return accounts_.at(i); }
  const std::vector<Account>& accounts() const noexcept { return accounts_; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  bool operator==(const ChartOfAccounts&) const = default;

 private:
  std::vector<Account> accounts_;
};

enum class Role { position, flow, price, want };

/// Per-account values of one kind of quantity. All entries finite.
class CommodityVector {
 public:
  CommodityVector(Role role, std::vector<double> values);

  Role role() const noexcept { return role_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_.at(i); }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const CommodityVector&) const = default;

 private:
  Role role_;
  std::vector<double> values_;
};

/// One knot of a piecewise-linear inelasticity schedule m(t).
struct Breakpoint {
  double t;
  double m;
  bool operator==(const Breakpoint&) const = default;
};

/// Price inelasticity of an agent: a constant m > 0, a piecewise-linear
/// schedule m(t) > 0 (held constant outside its knots), or the inverse of a
/// full elasticity tensor.
class Inelasticity {
 public:
  Inelasticity() : Inelasticity(1.0) {}
  Inelasticity(double m);  // NOLINT: implicit, a plain number is the usual case
  static Inelasticity schedule(std::vector<Breakpoint> knots);
  static Inelasticity tensor(ElasticityTensor elasticity);

  bool is_constant() const noexcept { return std::holds_alternative<double>(rep_); }
  bool is_schedule() const noexcept { return std::holds_alternative<std::vector<Breakpoint>>(rep_); }
  bool is_tensor() const noexcept { return std::holds_alternative<ElasticityTensor>(rep_); }

  /// Scalar inelasticity at time t. DomainError for tensor agents.
  double at(double t) const;
  /// dm/dt at time t (right derivative at knots); zero for constants.
  double rate(double t) const;

  const std::vector<Breakpoint>& knots() const { return std::get<std::vector<Breakpoint>>(rep_); }
  const ElasticityTensor& elasticity() const { return std::get<ElasticityTensor>(rep_); }

  /// v = p / m(t), or v = eps p for tensors.
  std::vector<double> flow(std::span<const double> price, double t) const;
  /// p = m(t) v, or p = eps^-1 v for tensors.
  std::vector<double> price(std::span<const double> flow, double t) const;

  bool operator==(const Inelasticity&) const = default;

 private:
  std::variant<double, std::vector<Breakpoint>, ElasticityTensor> rep_;
};

/// An agent whose inertia is its price inelasticity. State is stored as
/// (stock q, price p); the flow is always derived through p = m v.
struct Demander {
  std::string id;
  Inelasticity inelasticity;
  std::vector<double> q;              // initial stock per account
  std::vector<double> p;              // initial reservation price per account
  std::vector<double> reference_flow;  // benchmark demand frame v*, empty means zero

  /// Builds the price from an initial flow so that p = m v holds exactly.
  static Demander from_flow(std::string id, Inelasticity m, std::vector<double> q,
                            std::vector<double> v);

  std::vector<double> flow(double t = 0.0) const { return inelasticity.flow(p, t); }

  bool operator==(const Demander&) const = default;
};

// Force laws. Parameters are validated by validate_law().

struct LinearSpring {
  double k;
  double set_point = 0.0;
  bool operator==(const LinearSpring&) const = default;
};

struct LinearDamper {
  double b;
  bool operator==(const LinearDamper&) const = default;
};

/// Fixed-fee friction with stiction. Inside |v| <= v_band the flow is held
/// at zero by up to b_static of force.
struct SignumFriction {
  double b_static;
  double b_kinetic;
  double v_band = 1e-6;
  bool operator==(const SignumFriction&) const = default;
};

struct QuadraticDrag {
  double c;
  bool operator==(const QuadraticDrag&) const = default;
};

/// Basic needs g; the resulting desire is m g.
struct ConstantNeeds {
  double g;
  bool operator==(const ConstantNeeds&) const = default;
};

/// Convenience falling off as 1/q. Potential datum q_ref; unset means the
/// attached agent's initial stock.
struct GravityLikeConvenience {
  double mu;
  std::optional<double> q_ref;
  bool operator==(const GravityLikeConvenience&) const = default;
};

/// Storage limits enforced by a one-sided penalty spring.
struct StockoutWall {
  double q_min;
  double q_max;
  double k_wall;
  bool operator==(const StockoutWall&) const = default;
};

/// Linear storage whose convenience saturates at +-f_sat (liquidity trap).
struct SaturatingSpring {
  double k;
  double f_sat;
  double set_point = 0.0;
  bool operator==(const SaturatingSpring&) const = default;
};

/// Storage spring in series with a custody damper (cost of carry). Carries
/// one internal state: the stock s held in the spring.
struct SeriesCarry {
  double k;
  double b;
  double s0 = 0.0;
  bool operator==(const SeriesCarry&) const = default;
};

using ElementLaw = std::variant<LinearSpring, LinearDamper, SignumFriction, QuadraticDrag,
                                ConstantNeeds, GravityLikeConvenience, StockoutWall,
                                SaturatingSpring, SeriesCarry>;

/// Where an element acts. An empty counterparty means the element links the
/// agent to the perfectly inelastic market (the reference node).
struct Attachment {
  std::string agent;
  std::string counterparty;
  std::size_t account = 0;

  bool to_market() const noexcept { return counterparty.empty(); }
  bool operator==(const Attachment&) const = default;
};

struct ForceElement {
  ElementLaw law;
  Attachment attachment;
  bool operator==(const ForceElement&) const = default;
};

/// Storage laws admit a potential (indirect surplus); friction laws dissipate.
bool is_friction(const ElementLaw& law) noexcept;
bool is_storage(const ElementLaw& law) noexcept;
/// Laws that only make sense against the market (needs, gravity, walls).
bool is_single_agent_only(const ElementLaw& law) noexcept;
bool is_linear(const ElementLaw& law) noexcept;
std::string_view kind_name(const ElementLaw& law) noexcept;

/// Throws DomainError when a parameter is out of range.
void validate_law(const ElementLaw& law);

struct Step {
  double F;
  double t_on = 0.0;
  bool operator==(const Step&) const = default;
};

struct Impulse {
  double J;
  double t0 = 0.0;
  bool operator==(const Impulse&) const = default;
};

/// amplitude * sin(frequency * t + phase), frequency in rad per unit time.
struct Sinusoid {
  double amplitude;
  double frequency;
  double phase = 0.0;
  bool operator==(const Sinusoid&) const = default;
};

struct NoWant {
  bool operator==(const NoWant&) const = default;
};

class WantSignal {
 public:
  using Shape = std::variant<NoWant, Step, Impulse, Sinusoid>;

  WantSignal() = default;
  WantSignal(Shape shape);  // NOLINT

  const Shape& shape() const noexcept { return shape_; }

  /// Want held over the integration step [t_step, t_step + h) evaluated at
  /// time t inside it. Impulses are realized as J/h over the single step
  /// that contains t0.
  double value(double t, double t_step, double h) const;

  /// Smooth part only (impulses contribute zero).
  double value(double t) const;

  /// Exact inducement accumulated over [0, t].
  double integral(double t) const;

  /// Long-run constant level: step height, zero for the rest.
  double steady_level() const;

  bool is_zero() const;

  bool operator==(const WantSignal&) const = default;

 private:
  Shape shape_ = NoWant{};
};

struct ExogenousInput {
  std::string agent;
  std::size_t account = 0;
  WantSignal signal;
  bool operator==(const ExogenousInput&) const = default;
};

struct Network {
  ChartOfAccounts chart;
  std::vector<Demander> agents;
  std::vector<ForceElement> elements;
  std::vector<ExogenousInput> exogenous;

  /// Throws AssemblyError listing every dangling attachment or shape
  /// mismatch, DomainError for invalid law parameters.
  void validate() const;

  std::optional<std::size_t> find_agent(const std::string& id) const;
  /// True when some element links an agent to the market.
  bool has_reference() const;
  bool driven() const;

  bool operator==(const Network&) const = default;
};

/// Default penalty stiffness for a stockout wall on (agent, account):
/// 1e6 times the stiffest linear storage attached there, else 1e6.
double default_wall_stiffness(const Network& net, const Attachment& where);

// Operations

/// v = p / m componentwise.
CommodityVector demand_schedule(double m, const CommodityVector& price);
double demand_schedule(double m, double price);

/// Inputs to a force law on one account. `m` is the attached agent's
/// inelasticity (needs and gravity use it). `hold` is the force that would
/// keep the flow at zero; only stiction reads it. For SeriesCarry `q` is the
/// internal spring stock.
struct LawInput {
  double q = 0.0;
  double v = 0.0;
  double m = 1.0;
  double hold = 0.0;
};

double element_force(const ElementLaw& law, const LawInput& in);
inline double element_force(const ElementLaw& law, double q, double v, double m = 1.0) {
  return element_force(law, LawInput{q, v, m, 0.0});
}

struct AgentKinematics {
  double m;
  std::vector<double> q;
  std::vector<double> v;
  std::vector<double> a;  // empty means zero
};

struct CenterOfDemand {
  std::vector<double> q;
  std::vector<double> v;
  std::vector<double> a;
  double m_total;
};

/// Inelasticity-weighted means of stock, flow and needs.
CenterOfDemand center_of_demand(std::span<const AgentKinematics> agents);
/// Same, from demanders at time t (needs taken as zero). Tensor agents are rejected.
CenterOfDemand center_of_demand(std::span<const Demander> agents, double t = 0.0);

struct WantParts {
  double move;    // m a, movement along the demand line
  double rotate;  // v dm/dt, rotation of the demand line
  double shift;   // -m dv*/dt, fictitious want of an accelerating benchmark
  double total() const { return move + rotate + shift; }
};

WantParts want_decomposition(double m, double v, double a, double m_dot, double v_star_dot);
/// Uses the demander's schedule for m(t) and dm/dt. Scalar agents only.
WantParts want_decomposition(const Demander& agent, std::size_t account, double t, double a,
                             double v_star_dot);

/// v_a - v_b; throws DomainError on role or length mismatch.
CommodityVector excess_demand(const CommodityVector& va, const CommodityVector& vb);

}  // namespace econmech
