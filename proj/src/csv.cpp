#include "econmech/csv.hpp"

#include <charconv>
#include <ostream>

namespace econmech::csv {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_series(std::ostream& out, const TimeSeries& series, const surplus::SurplusLedger* ledger,
                  std::span<const ExtraColumn> extra) {
  const std::size_t d = series.chart.dimension();
  out << "t";
  for (const auto& id : series.agent_ids)
    for (std::size_t k = 0; k < d; ++k) {
      const std::string& acct = series.chart[k].name;
      out << ',' << id << ".q." << acct << ',' << id << ".v." << acct << ',' << id << ".p." << acct;
    }
  if (ledger) out << ",T,V,H,dQ,dW,balance_residual";
  for (const auto& c : extra) out << ',' << c.name;
  out << '\n';

  for (std::size_t r = 0; r < series.size(); ++r) {
    out << format_number(series.times[r]);
    for (std::size_t a = 0; a < series.agent_ids.size(); ++a)
      for (std::size_t k = 0; k < d; ++k)
        out << ',' << format_number(series.q_at(r, a, k)) << ',' << format_number(series.v_at(r, a, k)) << ','
            << format_number(series.p_at(r, a, k));
    if (ledger)
      out << ',' << format_number(ledger->T[r]) << ',' << format_number(ledger->V[r]) << ','
          << format_number(ledger->H[r]) << ',' << format_number(ledger->dQ[r]) << ','
          << format_number(ledger->dW[r]) << ',' << format_number(ledger->balance_residual[r]);
    for (const auto& c : extra) out << ',' << format_number(c.values[r]);
    out << '\n';
  }
}

void write_response(std::ostream& out, const lti::ResponseCurve& curve) {
  out << "t,DF,free,step\n";
  for (std::size_t i = 0; i < curve.t.size(); ++i)
    out << format_number(curve.t[i]) << ',' << format_number(curve.discount_factor[i]) << ','
        << format_number(curve.free[i]) << ',' << format_number(curve.step[i]) << '\n';
}

}  // namespace econmech::csv
