#pragma once

// Equilibrium detection, stability and two-body reduction.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "econmech/engine.hpp"
#include "econmech/model.hpp"
#include "econmech/tensor.hpp"

namespace econmech {

/// Sum of element forces and exogenous wants on `agent`, per account, at
/// (t, state). `state` uses the System layout; empty means the initial state.
std::vector<double> net_want(const Network& net, const std::string& agent, double t,
                             std::span<const double> state = {});

enum class EquilibriumKind { none, price, competitive };
enum class Stability { unstable, marginally_stable, asymptotically_stable };

std::string_view name(EquilibriumKind k) noexcept;
std::string_view name(Stability s) noexcept;

/// Eigenvalues with |Re| below this count as zero.
inline constexpr double kMarginalTolerance = 1e-10;

struct EquilibriumReport {
  EquilibriumKind kind = EquilibriumKind::none;
  Stability stability = Stability::marginally_stable;
  /// Eigenvalues of the linearized system with neutral directions (free
  /// translations of stock, conserved total prices) factored out. Sorted by
  /// real part, then imaginary part, descending.
  std::vector<std::complex<double>> eigenvalues;
  /// H is usable as a Lyapunov function: undriven, constant inelasticities,
  /// and not unstable.
  bool lyapunov_ok = false;
  /// Fixed point (System layout). Stock along neutral directions is free;
  /// the minimum-norm representative is reported. Empty when kind is none.
  std::vector<double> fixed_point;
  std::string diagnostic;
};

/// Linear networks are classified exactly; nonlinear ones are linearized
/// about `operating_point` (System layout; default the initial state).
/// Exogenous wants enter at their steady level; time-varying inelasticities
/// are frozen at t = 0.
EquilibriumReport classify_equilibrium(const Network& net,
                                       std::optional<std::vector<double>> operating_point = std::nullopt);

struct LyapunovResult {
  bool ok;
  /// Largest per-record increase of H (zero when H never rises).
  double max_increase;
};

/// H nonincreasing per recorded step to 1e-9 H(0). DomainError when the
/// network has exogenous wants.
LyapunovResult lyapunov_check(const TimeSeries& series, const Network& net);

struct TwoBody {
  double eps;             // mutual elasticity eps_d + eps_s
  double spread;          // p_d - p_s
  double excess;          // v_d - v_s
  double midpoint_price;  // (p_d + p_s) / 2, conserved for a closed pair
  /// Demander's price measured from the pair's center of demand,
  /// (eps_d p_d - eps_s p_s) / eps. The Marshallian relation reads
  /// excess = eps * relative_price.
  double relative_price;
  bool raw_consistent;       // excess == eps * spread
  bool midpoint_consistent;  // excess == eps * relative_price
};

/// Throws DomainError for negative elasticities or when both are zero.
TwoBody two_body_reduce(double eps_d, double eps_s, double p_d, double p_s, double v_d, double v_s);

/// Inelasticity of the equivalent single body: 1 / eps.
double reduced_inelasticity(double eps_d, double eps_s);

/// Plain-text matrix: first line d, then d rows of d reals. ParseError with
/// line numbers on malformed input.
Matrix parse_matrix_text(std::string_view text);

}  // namespace econmech
