#include "econmech/lti.hpp"

#include <cmath>
#include <numbers>

#include "econmech/errors.hpp"

namespace econmech::lti {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw DomainError(message);
}

void require_time(double t) { require(std::isfinite(t) && t >= 0.0, "response time must satisfy t >= 0"); }

// Above this exponent the cosh/sinh form is replaced by the exponential sum
// to stay finite.
constexpr double kHyperbolicSwitch = 20.0;

}  // namespace

std::string_view name(Topology t) noexcept {
  return t == Topology::parallel ? "parallel" : "series";
}

std::string_view name(Regime r) noexcept {
  switch (r) {
    case Regime::cyclical:
      return "cyclical";
    case Regime::critical:
      return "critical";
    case Regime::hyperbolic:
      return "hyperbolic";
  }
  return "unknown";
}

FirstOrderParams first_order_params(double m, double b) {
  require(std::isfinite(m) && m > 0.0, "first-order trader requires m > 0");
  require(std::isfinite(b) && b >= 0.0, "first-order trader requires b >= 0");
  return {b / m};
}

double discount_factor(const FirstOrderParams& p, double t) {
  require_time(t);
  return std::exp(-p.gamma * t);
}

double step_response(const FirstOrderParams& p, double F, double t) {
  require_time(t);
  if (p.gamma == 0.0) return F * t;
  return F / p.gamma * -std::expm1(-p.gamma * t);
}

double free_response(const FirstOrderParams& p, double p0, double t) {
  return p0 * discount_factor(p, t);
}

Regime classify_regime(double zeta) noexcept {
  if (zeta < 1.0 - kCriticalBand) return Regime::cyclical;
  if (zeta > 1.0 + kCriticalBand) return Regime::hyperbolic;
  return Regime::critical;
}

SecondOrderParams second_order_from_rates(double gamma, double omega_n, Topology topology) {
  require(std::isfinite(omega_n) && omega_n > 0.0, "second-order trader requires omega_n > 0");
  require(std::isfinite(gamma) && gamma >= 0.0, "second-order trader requires gamma >= 0");
  SecondOrderParams p{topology, gamma, omega_n, gamma / (2.0 * omega_n), Regime::critical};
  p.regime = classify_regime(p.zeta);
  if (p.regime == Regime::cyclical) p.omega_d = omega_n * std::sqrt(1.0 - p.zeta * p.zeta);
  if (p.regime == Regime::hyperbolic) p.omega_h = omega_n * std::sqrt(p.zeta * p.zeta - 1.0);
  return p;
}

SecondOrderParams second_order_params(double m, double k, double b, Topology topology) {
  require(std::isfinite(m) && m > 0.0, "second-order trader requires m > 0");
  require(std::isfinite(k) && k > 0.0, "second-order trader requires k > 0");
  if (topology == Topology::parallel) {
    require(std::isfinite(b) && b >= 0.0, "spot trader requires b >= 0");
    return second_order_from_rates(b / m, std::sqrt(k / m), topology);
  }
  require(std::isfinite(b) && b > 0.0, "carry trader requires b > 0 (b = 0 is an infinite carry rate)");
  return second_order_from_rates(k / b, std::sqrt(k / m), topology);
}

double discount_factor(const SecondOrderParams& p, double t) {
  require_time(t);
  const double half = 0.5 * p.gamma;
  switch (p.regime) {
    case Regime::cyclical: {
      const double wt = p.omega_d * t;
      return std::exp(-half * t) * (std::cos(wt) + half / p.omega_d * std::sin(wt));
    }
    case Regime::critical:
      return std::exp(-half * t) * (1.0 + half * t);
    case Regime::hyperbolic: {
      const double ht = p.omega_h * t;
      const double c = half / p.omega_h;
      if (ht < kHyperbolicSwitch) return std::exp(-half * t) * (std::cosh(ht) + c * std::sinh(ht));
      const auto [slow, fast] = hyperbolic_rates(p);
      return 0.5 * (1.0 + c) * std::exp(-slow * t) + 0.5 * (1.0 - c) * std::exp(-fast * t);
    }
  }
  return 0.0;
}

std::pair<double, double> hyperbolic_rates(const SecondOrderParams& p) {
  require(p.regime == Regime::hyperbolic, "hyperbolic rates requested outside the hyperbolic regime");
  const double half = 0.5 * p.gamma;
  // slow = half - omega_h = omega_n^2 / (half + omega_h), written to avoid cancellation
  const double slow = p.omega_n * p.omega_n / (half + p.omega_h);
  return {slow, half + p.omega_h};
}

double step_stock(const SecondOrderParams& p, double F, double k, double t) {
  require(std::isfinite(k) && k > 0.0, "step stock requires k > 0");
  return F / k * (1.0 - discount_factor(p, t));
}

double free_response(const SecondOrderParams& p, double x0, double t) {
  return x0 * discount_factor(p, t);
}

TransientMetrics transient_metrics(std::span<const double> times, std::span<const double> values,
                                   double target, double band) {
  require(times.size() == values.size(), "transient metrics need equal-length series");
  require(target != 0.0 && std::isfinite(target), "transient metrics need a nonzero target");
  TransientMetrics out;
  if (times.empty()) return out;

  // Work on the normalized response y = value / target so negative targets behave.
  auto y = [&](std::size_t i) { return values[i] / target; };
  auto crossing = [&](double level) -> std::optional<double> {
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (y(i) >= level) {
        if (i == 0) return times[0];
        const double y0 = y(i - 1);
        const double y1 = y(i);
        return times[i - 1] + (level - y0) / (y1 - y0) * (times[i] - times[i - 1]);
      }
    }
    return std::nullopt;
  };

  const auto t10 = crossing(0.1);
  if (!t10) return out;
  const auto t90 = crossing(0.9);
  if (t90) out.rise_time = *t90 - *t10;

  double peak = y(0);
  for (std::size_t i = 1; i < times.size(); ++i) peak = std::max(peak, y(i));
  out.overshoot_pct = peak > 1.0 ? (peak - 1.0) * 100.0 : 0.0;

  const double t_end = times.back();
  const double tail_start = t_end - 0.1 * (t_end - times.front());
  std::optional<std::size_t> last_outside;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::fabs(y(i) - 1.0) > band) last_outside = i;
  if (!last_outside) {
    out.settling_time = times.front();
  } else if (*last_outside + 1 < times.size() && times[*last_outside + 1] <= tail_start) {
    const std::size_t i = *last_outside;
    // Interpolate the band entry between the last outside sample and the next one.
    const double e0 = std::fabs(y(i) - 1.0);
    const double e1 = std::fabs(y(i + 1) - 1.0);
    const double w = e0 == e1 ? 1.0 : (e0 - band) / (e0 - e1);
    out.settling_time = times[i] + w * (times[i + 1] - times[i]);
  }
  return out;
}

TransientMetrics transient_metrics(const SecondOrderParams& p, double band) {
  // Slowest decay rate sets the horizon; the fastest time scale sets the grid.
  double slow = 0.0;
  switch (p.regime) {
    case Regime::cyclical:
    case Regime::critical:
      slow = 0.5 * p.gamma;
      break;
    case Regime::hyperbolic:
      slow = hyperbolic_rates(p).first;
      break;
  }
  const double horizon = slow > 0.0 ? std::max(40.0 / slow, 20.0 * std::numbers::pi / p.omega_n)
                                    : 20.0 * std::numbers::pi / p.omega_n;
  const double fast = std::max({p.omega_n, p.gamma, 1e-12});
  const std::size_t n = static_cast<std::size_t>(std::min(2e6, std::max(2e4, 200.0 * horizon * fast))) + 1;
  std::vector<double> t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = horizon * static_cast<double>(i) / static_cast<double>(n - 1);
    y[i] = 1.0 - discount_factor(p, t[i]);
  }
  TransientMetrics out = transient_metrics(t, y, 1.0, band);
  if (p.zeta == 0.0) out.settling_time.reset();
  return out;
}

ResponseCurve respond(int order, Topology topology, double m, double k, double b, double F,
                      double x0, double t_max, std::size_t n) {
  require(order == 1 || order == 2, "response order must be 1 or 2");
  require(std::isfinite(t_max) && t_max > 0.0, "response horizon must satisfy t_max > 0");
  require(n >= 2, "response needs at least two samples");
  ResponseCurve c;
  c.t.resize(n);
  c.discount_factor.resize(n);
  c.free.resize(n);
  c.step.resize(n);
  if (order == 1) {
    const FirstOrderParams p = first_order_params(m, b);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = t_max * static_cast<double>(i) / static_cast<double>(n - 1);
      c.t[i] = t;
      c.discount_factor[i] = discount_factor(p, t);
      c.free[i] = free_response(p, x0, t);
      c.step[i] = step_response(p, F, t);
    }
    return c;
  }
  const SecondOrderParams p = second_order_params(m, k, b, topology);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t_max * static_cast<double>(i) / static_cast<double>(n - 1);
    c.t[i] = t;
    c.discount_factor[i] = discount_factor(p, t);
    c.free[i] = x0 * c.discount_factor[i];
    c.step[i] = F / k * (1.0 - c.discount_factor[i]);
  }
  return c;
}

}  // namespace econmech::lti
