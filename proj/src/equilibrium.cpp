#include "econmech/equilibrium.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>

#include "econmech/errors.hpp"
#include "econmech/surplus.hpp"

namespace econmech {

std::string_view name(EquilibriumKind k) noexcept {
  switch (k) {
    case EquilibriumKind::none: return "none";
    case EquilibriumKind::price: return "price";
    case EquilibriumKind::competitive: return "competitive";
  }
  return "?";
}

std::string_view name(Stability s) noexcept {
  switch (s) {
    case Stability::unstable: return "unstable";
    case Stability::marginally_stable: return "marginally stable";
    case Stability::asymptotically_stable: return "asymptotically stable";
  }
  return "?";
}

std::vector<double> net_want(const Network& net, const std::string& agent, double t,
                             std::span<const double> state) {
  const System sys(net);
  const auto a = net.find_agent(agent);
  if (!a) throw AssemblyError("unknown agent '" + agent + "'");
  std::vector<double> x0;
  if (state.empty()) {
    x0 = sys.initial_state();
    state = x0;
  }
  if (state.size() != sys.layout().size()) throw DomainError("state length does not match the network");
  std::vector<double> dx(state.size());
  sys.derivative(t, state, dx);
  std::vector<double> out(sys.layout().accounts);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = dx[sys.layout().p(*a, k)];
  return out;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Network with_steady_inputs(const Network& net) {
  Network out = net;
  for (auto& in : out.exogenous) {
    const double level = in.signal.steady_level();
    in.signal = level == 0.0 ? WantSignal{} : WantSignal{Step{level, 0.0}};
  }
  return out;
}

bool is_linear_network(const Network& net) {
  return std::all_of(net.elements.begin(), net.elements.end(),
                     [](const ForceElement& e) { return is_linear(e.law); });
}

VectorXd eval(const System& sys, const VectorXd& x) {
  VectorXd dx(x.size());
  sys.derivative(0.0, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                 std::span<double>(dx.data(), static_cast<std::size_t>(dx.size())));
  return dx;
}

/// Orthonormal basis of the vectors orthogonal to every column of C.
MatrixXd orthogonal_complement(const MatrixXd& C, Eigen::Index n) {
  if (C.cols() == 0) return MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<MatrixXd> svd(C.transpose(), Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  const double tol = 1e-12 * std::max(1.0, s.size() ? s(0) : 0.0);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

}  // namespace

EquilibriumReport classify_equilibrium(const Network& net, std::optional<std::vector<double>> operating_point) {
  const Network steady = with_steady_inputs(net);
  const System sys(steady);
  const StateLayout& L = sys.layout();
  const auto n = static_cast<Eigen::Index>(L.size());
  EquilibriumReport report;

  VectorXd x0 = VectorXd::Zero(n);
  {
    const std::vector<double> init = operating_point ? *operating_point : sys.initial_state();
    if (init.size() != L.size()) throw DomainError("operating point length does not match the network");
    for (Eigen::Index i = 0; i < n; ++i) x0(i) = init[static_cast<std::size_t>(i)];
  }

  // Affine model f(x) = A x + c by central differences; a unit offset is
  // exact for linear laws.
  const bool linear = is_linear_network(steady);
  MatrixXd A(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double delta = linear ? 1.0 : 1e-6 * std::max(1.0, std::fabs(x0(j)));
    VectorXd up = x0, down = x0;
    up(j) += delta;
    down(j) -= delta;
    A.col(j) = (eval(sys, up) - eval(sys, down)) / (2.0 * delta);
  }
  const VectorXd c = eval(sys, x0) - A * x0;
  const double scale = std::max({1.0, A.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff()});
  const double tol = 1e-9 * scale;

  // Neutral directions: stock shifts that change no force, and, for
  // accounts not linked to the market, the conserved total price.
  std::vector<VectorXd> right, left;
  for (std::size_t k = 0; k < L.accounts; ++k) {
    VectorXd shift = VectorXd::Zero(n);
    for (std::size_t a = 0; a < L.agents; ++a) shift(static_cast<Eigen::Index>(L.q(a, k))) = 1.0;
    std::vector<VectorXd> singles;
    for (std::size_t a = 0; a < L.agents; ++a) {
      VectorXd e = VectorXd::Zero(n);
      e(static_cast<Eigen::Index>(L.q(a, k))) = 1.0;
      if ((A * e).cwiseAbs().maxCoeff() <= tol) singles.push_back(e);
    }
    if (!singles.empty()) {
      right.insert(right.end(), singles.begin(), singles.end());
    } else if ((A * shift).cwiseAbs().maxCoeff() <= tol) {
      right.push_back(shift);
    }

    VectorXd total = VectorXd::Zero(n);
    for (std::size_t a = 0; a < L.agents; ++a) total(static_cast<Eigen::Index>(L.p(a, k))) = 1.0;
    if ((total.transpose() * A).cwiseAbs().maxCoeff() <= tol) {
      if (std::fabs(total.dot(c)) > tol) {
        report.kind = EquilibriumKind::none;
        report.diagnostic = "no fixed point: unbalanced exogenous want on account '" + net.chart[k].name +
                            "' accelerates the whole network";
      }
      left.push_back(total);
    }
  }

  MatrixXd C(n, static_cast<Eigen::Index>(right.size() + left.size()));
  Eigen::Index col = 0;
  for (const auto& r : right) C.col(col++) = r;
  for (const auto& l : left) C.col(col++) = l;
  const MatrixXd Q = orthogonal_complement(C, n);
  const MatrixXd Ar = Q.transpose() * A * Q;

  if (Ar.rows() > 0) {
    Eigen::EigenSolver<MatrixXd> es(Ar, false);
    const double lam_scale = std::max(1.0, Ar.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      std::complex<double> lam = es.eigenvalues()(i);
      if (std::fabs(lam.imag()) <= 1e-13 * lam_scale) lam.imag(0.0);
      if (std::fabs(lam.real()) <= 1e-13 * lam_scale) lam.real(0.0);
      report.eigenvalues.push_back(lam);
    }
  }
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end(),
            [](const auto& a, const auto& b) {
              return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
            });

  report.stability = Stability::asymptotically_stable;
  for (const auto& lam : report.eigenvalues) {
    if (lam.real() > kMarginalTolerance) {
      report.stability = Stability::unstable;
      break;
    }
    if (std::fabs(lam.real()) <= kMarginalTolerance) report.stability = Stability::marginally_stable;
  }

  bool constant_masses = true;
  for (const auto& a : net.agents) constant_masses = constant_masses && !a.inelasticity.is_schedule();
  report.lyapunov_ok = !net.driven() && constant_masses && report.stability != Stability::unstable;

  if (!report.diagnostic.empty()) return report;

  // Fixed point of the reduced dynamics, lifted back to the full state.
  VectorXd x_star = VectorXd::Zero(n);
  if (Ar.rows() > 0) {
    const VectorXd rhs = -(Q.transpose() * c);
    const Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(Ar);
    const VectorXd z = cod.solve(rhs);
    if ((Ar * z - rhs).cwiseAbs().maxCoeff() > tol) {
      report.kind = EquilibriumKind::none;
      report.diagnostic = "no fixed point: constant wants are not balanced by any storage";
      return report;
    }
    x_star = Q * z;
  }
  const VectorXd rate = A * x_star + c;

  double q_rate = 0.0, other_rate = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool is_q = static_cast<std::size_t>(i) < L.slots();
    (is_q ? q_rate : other_rate) = std::max(is_q ? q_rate : other_rate, std::fabs(rate(i)));
  }
  if (other_rate > tol) {
    report.kind = EquilibriumKind::none;
    report.diagnostic = "no fixed point: prices keep moving at the candidate equilibrium";
    return report;
  }
  report.kind = q_rate > tol ? EquilibriumKind::price : EquilibriumKind::competitive;
  if (!linear) {
    report.diagnostic = "nonlinear network linearized about the operating point";
  }
  report.fixed_point.assign(x_star.data(), x_star.data() + n);
  return report;
}

LyapunovResult lyapunov_check(const TimeSeries& series, const Network& net) {
  if (net.driven()) throw DomainError("lyapunov check requires a network without exogenous wants");
  const auto ledger = surplus::ledger_accrue(series, net);
  LyapunovResult out{true, 0.0};
  if (ledger.size() == 0) return out;
  const double tol = 1e-9 * std::max(std::fabs(ledger.H.front()), std::numeric_limits<double>::min());
  for (std::size_t r = 1; r < ledger.size(); ++r) {
    const double rise = ledger.H[r] - ledger.H[r - 1];
    out.max_increase = std::max(out.max_increase, rise);
    if (rise > tol) out.ok = false;
  }
  return out;
}

TwoBody two_body_reduce(double eps_d, double eps_s, double p_d, double p_s, double v_d, double v_s) {
  if (!(eps_d >= 0.0) || !(eps_s >= 0.0)) throw DomainError("elasticities must be >= 0");
  if (eps_d == 0.0 && eps_s == 0.0) throw DomainError("degenerate pair: both elasticities are zero");
  TwoBody out{};
  out.eps = eps_d + eps_s;
  out.spread = p_d - p_s;
  out.excess = v_d - v_s;
  out.midpoint_price = 0.5 * (p_d + p_s);
  out.relative_price = (eps_d * p_d - eps_s * p_s) / out.eps;
  const double tol = 1e-12 * std::max({1.0, std::fabs(out.excess), std::fabs(out.eps * out.spread)});
  out.raw_consistent = std::fabs(out.excess - out.eps * out.spread) <= tol;
  out.midpoint_consistent = std::fabs(out.excess - out.eps * out.relative_price) <= tol;
  return out;
}

double reduced_inelasticity(double eps_d, double eps_s) {
  return 1.0 / two_body_reduce(eps_d, eps_s, 0, 0, 0, 0).eps;
}

Matrix parse_matrix_text(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t d = 0;
  bool have_d = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    std::vector<double> values;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + j, v);
      if (ec != std::errc() || ptr != line.data() + j || !std::isfinite(v))
        throw ParseError("expected a number, got '" + std::string(line.substr(i, j - i)) + "'", line_no,
                         static_cast<int>(i + 1));
      values.push_back(v);
      i = j;
    }
    if (values.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (!have_d) {
      if (values.size() != 1 || values[0] < 1 || values[0] != std::floor(values[0]))
        throw ParseError("first line must hold the dimension d >= 1", line_no, 1);
      d = static_cast<std::size_t>(values[0]);
      have_d = true;
    } else {
      if (values.size() != d)
        throw ParseError("expected " + std::to_string(d) + " values, got " + std::to_string(values.size()),
                         line_no, 1);
      if (rows.size() == d) throw ParseError("more than d rows", line_no, 1);
      rows.push_back(std::move(values));
    }
    if (end == text.size()) break;
  }
  if (!have_d) throw ParseError("empty matrix file", 1, 1);
  if (rows.size() != d)
    throw ParseError("expected " + std::to_string(d) + " rows, got " + std::to_string(rows.size()), line_no, 1);
  Matrix m(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) m(r, c) = rows[r][c];
  return m;
}

}  // namespace econmech
