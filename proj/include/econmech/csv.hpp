#pragma once

// Locale-independent CSV output with 17 significant digits.

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "econmech/engine.hpp"
#include "econmech/lti.hpp"
#include "econmech/surplus.hpp"

namespace econmech::csv {

/// Shortest text that uses at most 17 significant digits and reads back to
/// the same double.
std::string format_number(double v);

struct ExtraColumn {
  std::string name;
  std::span<const double> values;  // one per record
};

/// t, then <id>.q.<acct>,<id>.v.<acct>,<id>.p.<acct> per agent and account,
/// then T,V,H,dQ,dW,balance_residual when a ledger is given, then extras.
void write_series(std::ostream& out, const TimeSeries& series, const surplus::SurplusLedger* ledger,
                  std::span<const ExtraColumn> extra = {});

/// t,DF,free,step
void write_response(std::ostream& out, const lti::ResponseCurve& curve);

}  // namespace econmech::csv
