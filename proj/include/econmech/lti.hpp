#pragma once

// Closed-form price and inventory responses of first- and second-order
// traders: discount rates, discount factors in every damping regime, and
// free/step responses for the spot (parallel) and cost-of-carry (series)
// topologies.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace econmech::lti {

struct FirstOrderParams {
  double gamma;  // discount rate b/m
};

enum class Topology { parallel, series };
enum class Regime { cyclical, critical, hyperbolic };

std::string_view name(Topology t) noexcept;
std::string_view name(Regime r) noexcept;

/// Width of the band around zeta = 1 that is treated as critical.
inline constexpr double kCriticalBand = 1e-9;

struct SecondOrderParams {
  Topology topology;
  double gamma;    // discount rate b/m (parallel) or carry rate k/b (series)
  double omega_n;  // trade cycle frequency sqrt(k/m)
  double zeta;     // discount propensity gamma / (2 omega_n)
  Regime regime;
  double omega_d = 0.0;  // cyclical only
  double omega_h = 0.0;  // hyperbolic only
};

FirstOrderParams first_order_params(double m, double b);

/// exp(-gamma t)
double discount_factor(const FirstOrderParams& p, double t);

/// (F/gamma)(1 - DF(t)); F t when gamma = 0.
double step_response(const FirstOrderParams& p, double F, double t);

/// p0 DF(t)
double free_response(const FirstOrderParams& p, double p0, double t);

SecondOrderParams second_order_params(double m, double k, double b, Topology topology);

/// Builds parameters directly from (gamma, omega_n); regime and the damped
/// or hyperbolic frequency follow from zeta.
SecondOrderParams second_order_from_rates(double gamma, double omega_n,
                                          Topology topology = Topology::parallel);

/// Regime implied by zeta under the critical band.
Regime classify_regime(double zeta) noexcept;

/// Second-order discount factor; DF(0) = 1 and DF'(0) = 0 in every regime.
double discount_factor(const SecondOrderParams& p, double t);

/// Inventory stock (F/k)(1 - DF(t)). For the series topology this is the
/// stock held in storage under full carry.
double step_stock(const SecondOrderParams& p, double F, double k, double t);

/// x0 DF(t): stock released from q0 (parallel) or price released from p0
/// with an empty store (series).
double free_response(const SecondOrderParams& p, double x0, double t);

/// Rates (slow, fast) of the two exponentials that make up the hyperbolic
/// discount factor: gamma/2 -+ omega_h.
std::pair<double, double> hyperbolic_rates(const SecondOrderParams& p);

struct TransientMetrics {
  std::optional<double> rise_time;      // 10% -> 90% of target
  std::optional<double> overshoot_pct;  // 0 when the target is never exceeded
  std::optional<double> settling_time;  // last entry into the +-2% band
};

/// Metrics of a sampled step response. Rise and overshoot are undefined
/// when the series never reaches 10% of the target; settling is undefined
/// when the series is not inside the band over its final 10%.
TransientMetrics transient_metrics(std::span<const double> times, std::span<const double> values,
                                   double target, double band = 0.02);

/// Metrics of the closed-form unit step of `p`, sampled finely enough to
/// resolve the fastest time scale. Undamped systems never settle.
TransientMetrics transient_metrics(const SecondOrderParams& p, double band = 0.02);

/// Sampled closed-form response curves on the grid t_i = i t_max / (n-1).
struct ResponseCurve {
  std::vector<double> t;
  std::vector<double> discount_factor;
  std::vector<double> free;
  std::vector<double> step;
};

/// order 1: free = x0 DF (price), step = (F/gamma)(1 - DF) (price), k unused.
/// order 2: free = x0 DF, step = (F/k)(1 - DF) (stock).
ResponseCurve respond(int order, Topology topology, double m, double k, double b, double F,
                      double x0, double t_max, std::size_t n);

}  // namespace econmech::lti
