#pragma once

// Surplus accounting over recorded trajectories.
//
// Sign convention for accrued benefits: dW is the benefit passed on by the
// network to its exogenous benefactors, dW = -integral(F_ext v dt), so that
// H + dQ + dW stays equal to E = H(0). A positive exogenous want doing
// positive work on an agent therefore drives dW negative.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "econmech/engine.hpp"
#include "econmech/model.hpp"

namespace econmech::surplus {

/// T = p^2 / (2m). DomainError when m <= 0.
double direct_surplus(double p, double m);
/// T = 1/2 p' eps p.
double direct_surplus(const ElasticityTensor& eps, std::span<const double> p);

/// T* = 1/2 m v^2.
double coenergy(double v, double m);

/// Potential of a storage law at displacement x (stock, or the internal
/// stock for carry). `m` is the attached agent's inelasticity; `q_ref` is
/// the datum for gravity-like convenience when the law leaves it unset.
/// Constant needs store -m g q: the needs push the stock up, so stock gained
/// under them releases surplus.
double indirect_surplus(const ElementLaw& law, double x, double m = 1.0,
                        std::optional<double> q_ref = std::nullopt);

/// P = -F v for a friction force F acting on the agent at relative flow v.
/// Throws std::logic_error when P < -1e-12 (a broken force law).
double dissipation_rate(double F_friction, double v);

struct Residuals {
  double reallocative = 0.0;  // max |H - H(0)|
  double consumptive = 0.0;   // max |T + dQ - T(0)|
  double general = 0.0;       // max |H + dQ + dW - E|
};

/// One row per recorded time.
struct SurplusLedger {
  std::vector<double> times;
  std::vector<double> T, V, T_star, H, dQ, dW;
  std::vector<double> balance_residual;  // H + dQ + dW - E
  double E = 0.0;
  Residuals residuals;

  std::size_t size() const noexcept { return times.size(); }
};

/// Evaluates surplus from the recorded state and accrues consumption and
/// benefits by trapezoids on the recorded grid (controller actions, which
/// are held over each step, by left sums).
SurplusLedger ledger_accrue(const TimeSeries& series, const Network& net);

/// Interpretive national-accounts view of one ledger row.
struct GdpView {
  double consumption;  // C = dQ
  double investment;   // I = V
  double government;   // G = dW
};

GdpView gdp_view(const SurplusLedger& ledger, std::size_t row);

}  // namespace econmech::surplus
