#pragma once

// Network simulator. A Network is assembled into first-order state
// equations over (q, p) per agent and account, plus one internal stock per
// cost-of-carry element, and integrated with fixed-step classical RK4.
//
// State ordering: q block (agents in declaration order, accounts in chart
// order), then the p block in the same order, then carry stocks in element
// order.
//
// A simulation run owns its state; the engine is single-threaded per run and
// distinct runs may execute concurrently.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "econmech/model.hpp"

namespace econmech {

struct SimConfig {
  double horizon = 1.0;
  double step = 1e-3;
  std::size_t record_every = 1;

  /// h = 1e-3 horizon.
  static SimConfig with_default_step(double horizon, std::size_t record_every = 1);

  /// Throws DomainError unless 0 < h <= T, T/h <= 1e8 and record_every >= 1.
  void validate() const;
  /// Number of fixed steps; the last one ends at or just past the horizon.
  std::size_t steps() const;

  bool operator==(const SimConfig&) const = default;
};

struct StateLayout {
  std::size_t agents = 0;
  std::size_t accounts = 0;
  std::size_t carries = 0;

  std::size_t slots() const noexcept { return agents * accounts; }
  std::size_t size() const noexcept { return 2 * slots() + carries; }
  std::size_t slot(std::size_t agent, std::size_t account) const noexcept {
    return agent * accounts + account;
  }
  std::size_t q(std::size_t agent, std::size_t account) const noexcept { return slot(agent, account); }
  std::size_t p(std::size_t agent, std::size_t account) const noexcept {
    return slots() + slot(agent, account);
  }
  std::size_t carry(std::size_t j) const noexcept { return 2 * slots() + j; }
};

/// Exogenous want column in a TimeSeries.
struct SourceInfo {
  std::size_t agent;
  std::size_t account;
  bool held;  // zero-order hold over each step (controller action)
  std::string label;
  bool operator==(const SourceInfo&) const = default;
};

/// Recorded trajectory. Row-major tables indexed [record][column].
struct TimeSeries {
  std::vector<std::string> agent_ids;
  ChartOfAccounts chart;
  std::size_t element_count = 0;
  std::vector<SourceInfo> sources;

  std::vector<double> times;
  std::vector<double> q, v, p;          // columns: agent * d + account
  std::vector<double> element_force;    // force on the element's primary agent
  std::vector<double> element_state;    // carry stock, zero for other laws
  std::vector<double> exogenous;        // one column per source

  std::size_t size() const noexcept { return times.size(); }
  std::size_t slots() const noexcept { return agent_ids.size() * chart.dimension(); }

  double q_at(std::size_t r, std::size_t agent, std::size_t account) const {
    return q[r * slots() + agent * chart.dimension() + account];
  }
  double v_at(std::size_t r, std::size_t agent, std::size_t account) const {
    return v[r * slots() + agent * chart.dimension() + account];
  }
  double p_at(std::size_t r, std::size_t agent, std::size_t account) const {
    return p[r * slots() + agent * chart.dimension() + account];
  }
  double force_at(std::size_t r, std::size_t element) const {
    return element_force[r * element_count + element];
  }
  double state_at(std::size_t r, std::size_t element) const {
    return element_state[r * element_count + element];
  }
  double exogenous_at(std::size_t r, std::size_t source) const {
    return exogenous[r * sources.size() + source];
  }

  bool operator==(const TimeSeries&) const = default;
};

/// Integration-step context: which step we are in and any wants held over
/// it (one entry per slot, or empty).
struct StepContext {
  double t_step = 0.0;
  double h = std::numeric_limits<double>::infinity();
  std::span<const double> held{};
};

/// Assembled state equations of a network.
class System {
 public:
  /// Validates the network; throws AssemblyError listing dangling attachments.
  explicit System(Network net);

  const Network& network() const noexcept { return net_; }
  const StateLayout& layout() const noexcept { return layout_; }

  std::vector<double> initial_state() const;

  /// dx = f(t, x). When `element_forces` is nonempty it receives the force
  /// each element exerts on its primary agent.
  void derivative(double t, std::span<const double> x, std::span<double> dx,
                  const StepContext& ctx = {}, std::span<double> element_forces = {}) const;

  /// Smooth-input state equation (impulses excluded).
  std::vector<double> operator()(double t, std::span<const double> x) const;

  /// Flow per slot at (t, x).
  std::vector<double> flows(double t, std::span<const double> x) const;

  /// Per-account sum over all agents of the forces exerted by agent-to-agent
  /// elements. Zero by construction (third law).
  std::vector<double> internal_force_sum(double t, std::span<const double> x) const;

  /// Exogenous want of input `i` at time t inside the given step.
  double input_value(std::size_t i, double t, const StepContext& ctx) const;

  /// Step-boundary events: engages stiction when a stiction element's
  /// relative flow entered its band or changed sign over the step and the
  /// holding force suffices. Clamps the relative flow to zero while
  /// conserving the pair's momentum.
  void resolve_events(double t, std::span<double> x, std::span<const double> x_prev,
                      const StepContext& ctx) const;

  /// Inelasticity used for agent `a` on `account` at t (tensor agents use
  /// the inverse of the diagonal elasticity).
  double effective_mass(std::size_t agent, std::size_t account, double t) const;

 private:
  struct Bound {
    std::size_t a;
    std::size_t b;  // npos: market
    std::size_t account;
    std::size_t carry;  // npos unless SeriesCarry
  };
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  double relative(std::span<const double> values, const Bound& e) const;

  Network net_;
  StateLayout layout_;
  std::vector<Bound> bound_;
  std::vector<std::size_t> input_slot_;
};

/// Builds the state equations of `net`.
System assemble(const Network& net);

/// Controller hook: called once before every step with the current state;
/// its return value is held as a want on (agent, account) for that step.
struct Actuator {
  std::size_t agent = 0;
  std::size_t account = 0;
  std::function<double(double t, std::span<const double> state)> action;
  std::string label = "control";
};

/// Fixed-step RK4 integration with step-boundary events. Deterministic:
/// equal inputs produce bit-identical series. Throws BlowUpError on a
/// non-finite state.
TimeSeries simulate(const Network& net, const SimConfig& cfg, const Actuator* actuator = nullptr);

struct ConservationReport {
  /// max over time and accounts of |sum p(t) - sum p(0) - inducement from
  /// exogenous wants and market-attached elements|
  double momentum_drift;
  /// max |H + dQ + dW - E| from the surplus ledger
  double balance_residual_max;
  /// True when no element links to the market (momentum is then conserved
  /// up to exogenous inducements alone).
  bool closed;
};

ConservationReport verify_conservation(const TimeSeries& series, const Network& net);

}  // namespace econmech
