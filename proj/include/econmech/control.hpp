#pragma once

// PID control of one agent's price or stock on one account. The controller
// actuates a want on that agent, runs at the engine step and holds its
// action over each step.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "econmech/engine.hpp"
#include "econmech/model.hpp"

namespace econmech {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  std::optional<double> output_limit;
  bool anti_windup = false;

  /// Gains >= 0, at least one positive, limit > 0 when set.
  void validate() const;
  bool operator==(const PidGains&) const = default;
};

/// F = kp e + ki e_integral + kd (e - e_prev) / dt, saturated to the output
/// limit. DomainError when dt <= 0.
double pid_action(const PidGains& gains, double e, double e_integral, double e_prev, double dt);

/// Stateful controller. The derivative acts on the measurement, so a
/// setpoint jump produces no kick. The integral is a left sum of e dt;
/// with anti-windup it is frozen while saturated in the direction of the
/// error and kept within output_limit / ki.
class PidController {
 public:
  PidController(PidGains gains, double dt);

  double update(double setpoint, double measured);
  double integral() const noexcept { return integral_; }
  void reset();

 private:
  PidGains gains_;
  double dt_;
  double integral_ = 0.0;
  std::optional<double> last_measured_;
};

enum class Measured { q, p };

struct ControlLoop {
  Network plant;
  std::string agent;
  Measured variable = Measured::p;
  std::size_t account = 0;
  PidGains gains;
  double setpoint = 0.0;
  /// The setpoint applies from t_step on; zero before.
  double t_step = 0.0;

  double reference(double t) const { return t >= t_step ? setpoint : 0.0; }
  /// Measured variable from a recorded series.
  double measured(const TimeSeries& series, std::size_t row) const;
};

struct ClosedLoopSeries {
  TimeSeries series;          // plant state; the last source column is the action
  std::vector<double> error;  // reference - measured, per record
  std::vector<double> action; // want applied from each record on
};

/// BlowUpError carries the gains and the time in its message.
ClosedLoopSeries closed_loop_simulate(const ControlLoop& loop, const SimConfig& cfg);

/// Mean of (setpoint - measured) over the final 10% of the run, or nullopt
/// when the measured value still moves by more than band * scale there
/// (scale = max(|setpoint|, |tail mean|)).
std::optional<double> steady_state_error(std::span<const double> times, std::span<const double> measured,
                                         double setpoint, double band = 0.02);
std::optional<double> steady_state_error(const TimeSeries& series, const ControlLoop& loop,
                                         double band = 0.02);

}  // namespace econmech
