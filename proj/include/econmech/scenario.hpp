#pragma once

// Line-oriented scenario files. Each statement is one line that starts with
// a bracketed keyword; '#' starts a comment.
//
//   [chart]   account <name> <unit>
//   [agent]   <id> m=<m> | m=<t>:<m>,<t>:<m>,... | eps=<row>;<row>;...
//             [q0=<list>] [p0=<list> | v0=<list>]
//   [element] <kind> <key>=<value>... attach=<id>[:<account>] [to=<id>]
//   [input]   <id>[:<account>] step F= [t=] | impulse J= [t=] | sin amp= freq= [phase=]
//   [sim]     horizon= [h=] [record_every=]
//   [control] var=<id>:<q|p>[:<account>] [kp=] [ki=] [kd=] setpoint=
//             [limit=] [antiwindup=yes|no] [t_step=]
//   [output]  ledger=yes|no
//
// Lists are comma-separated; a single value is broadcast to every account.
// Element keys by kind:
//   spring k qstar | damper b | signum bs bk band | drag c | needs g |
//   gravity mu qref | stockout qmin qmax kwall | saturating k fsat qstar |
//   carry k b s0

#include <optional>
#include <string>
#include <string_view>

#include "econmech/control.hpp"
#include "econmech/engine.hpp"
#include "econmech/model.hpp"

namespace econmech {

struct ControlSpec {
  std::string agent;
  Measured variable = Measured::p;
  std::size_t account = 0;
  PidGains gains;
  double setpoint = 0.0;
  double t_step = 0.0;
  bool operator==(const ControlSpec&) const = default;
};

struct OutputOptions {
  bool ledger = true;  // append surplus ledger columns to CSV output
  bool operator==(const OutputOptions&) const = default;
};

struct ScenarioConfig {
  Network network;
  SimConfig sim;
  std::optional<ControlSpec> control;
  OutputOptions output;

  ControlLoop control_loop() const;
  bool operator==(const ScenarioConfig&) const = default;
};

/// Throws ParseError carrying the line (and column where one applies) for
/// syntax errors, unknown keys and semantic errors.
ScenarioConfig parse_scenario(std::string_view text);

/// Canonical text; parse_scenario(dump_scenario(c)) == c.
std::string dump_scenario(const ScenarioConfig& config);

}  // namespace econmech
