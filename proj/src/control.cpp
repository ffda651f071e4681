#include "econmech/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "econmech/errors.hpp"

namespace econmech {

void PidGains::validate() const {
  if (!(kp >= 0.0 && ki >= 0.0 && kd >= 0.0) || !std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd))
    throw DomainError("PID gains must be finite and >= 0");
  if (kp == 0.0 && ki == 0.0 && kd == 0.0) throw DomainError("PID needs at least one positive gain");
  if (output_limit && !(*output_limit > 0.0 && std::isfinite(*output_limit)))
    throw DomainError("PID output limit must be > 0");
}

double pid_action(const PidGains& gains, double e, double e_integral, double e_prev, double dt) {
  if (!(dt > 0.0)) throw DomainError("PID step dt must be > 0");
  double F = gains.kp * e + gains.ki * e_integral + gains.kd * (e - e_prev) / dt;
  if (gains.output_limit) F = std::clamp(F, -*gains.output_limit, *gains.output_limit);
  return F;
}

PidController::PidController(PidGains gains, double dt) : gains_(gains), dt_(dt) {
  if (!(dt > 0.0)) throw DomainError("PID step dt must be > 0");
}

void PidController::reset() {
  integral_ = 0.0;
  last_measured_.reset();
}

double PidController::update(double setpoint, double measured) {
  const double e = setpoint - measured;
  // Derivative on measurement: feed pid_action a previous error built from
  // the current setpoint.
  const double e_prev = last_measured_ ? setpoint - *last_measured_ : e;
  last_measured_ = measured;

  const double F = pid_action(gains_, e, integral_, e_prev, dt_);
  bool saturated = false;
  if (gains_.output_limit) {
    const PidGains raw{gains_.kp, gains_.ki, gains_.kd, std::nullopt, false};
    saturated = std::fabs(pid_action(raw, e, integral_, e_prev, dt_)) > *gains_.output_limit;
  }
  const bool winding = saturated && e * F > 0.0;
  if (!(gains_.anti_windup && winding)) integral_ += e * dt_;
  if (gains_.anti_windup && gains_.output_limit && gains_.ki > 0.0) {
    const double cap = *gains_.output_limit / gains_.ki;
    integral_ = std::clamp(integral_, -cap, cap);
  }
  return F;
}

double ControlLoop::measured(const TimeSeries& series, std::size_t row) const {
  const auto a = plant.find_agent(agent);
  if (!a) throw AssemblyError("controlled agent '" + agent + "' is not in the plant");
  return variable == Measured::q ? series.q_at(row, *a, account) : series.p_at(row, *a, account);
}

ClosedLoopSeries closed_loop_simulate(const ControlLoop& loop, const SimConfig& cfg) {
  cfg.validate();
  const auto a = loop.plant.find_agent(loop.agent);
  if (!a) throw AssemblyError("controlled agent '" + loop.agent + "' is not in the plant");
  if (loop.account >= loop.plant.chart.dimension())
    throw AssemblyError("controlled account is outside the chart");

  const System probe(loop.plant);
  const std::size_t slot = loop.variable == Measured::q ? probe.layout().q(*a, loop.account)
                                                        : probe.layout().p(*a, loop.account);
  PidController pid(loop.gains, cfg.step);
  Actuator act{*a, loop.account,
               [&](double t, std::span<const double> x) { return pid.update(loop.reference(t), x[slot]); },
               "action"};

  ClosedLoopSeries out;
  try {
    out.series = simulate(loop.plant, cfg, &act);
  } catch (const BlowUpError& e) {
    std::ostringstream msg;
    msg << "closed loop blew up at t=" << e.time() << " (kp=" << loop.gains.kp << ", ki=" << loop.gains.ki
        << ", kd=" << loop.gains.kd << ")";
    throw BlowUpError(msg.str(), e.time());
  }
  const std::size_t src = out.series.sources.size() - 1;
  for (std::size_t r = 0; r < out.series.size(); ++r) {
    out.error.push_back(loop.reference(out.series.times[r]) - loop.measured(out.series, r));
    out.action.push_back(out.series.exogenous_at(r, src));
  }
  return out;
}

std::optional<double> steady_state_error(std::span<const double> times, std::span<const double> measured,
                                         double setpoint, double band) {
  if (times.empty() || times.size() != measured.size()) throw DomainError("series is empty or ragged");
  const double t0 = times.front(), t1 = times.back();
  const double tail_start = t1 - 0.1 * (t1 - t0);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < tail_start) continue;
    sum += measured[i];
    ++count;
  }
  const double mean = sum / static_cast<double>(count);
  const double scale = std::max(std::fabs(setpoint), std::fabs(mean));
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < tail_start) continue;
    if (std::fabs(measured[i] - mean) > band * scale) return std::nullopt;
  }
  return setpoint - mean;
}

std::optional<double> steady_state_error(const TimeSeries& series, const ControlLoop& loop, double band) {
  std::vector<double> y(series.size());
  for (std::size_t r = 0; r < series.size(); ++r) y[r] = loop.measured(series, r);
  return steady_state_error(series.times, y, loop.setpoint, band);
}

}  // namespace econmech
