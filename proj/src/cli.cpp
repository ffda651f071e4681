#include "econmech/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "econmech/control.hpp"
#include "econmech/csv.hpp"
#include "econmech/equilibrium.hpp"
#include "econmech/errors.hpp"
#include "econmech/lti.hpp"
#include "econmech/scenario.hpp"
#include "econmech/surplus.hpp"
#include "econmech/tensor.hpp"

namespace econmech::cli {

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return buf.str();
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

/// Writes to --out when given, else to the command's stdout.
template <class Fn>
void emit(const std::string& out_path, std::ostream& out, Fn&& write) {
  if (out_path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw IoError("cannot write '" + out_path + "'");
  write(file);
  file.flush();
  if (!file) throw IoError("error while writing '" + out_path + "'");
}

nlohmann::json report_json(const EquilibriumReport& r) {
  nlohmann::json eig = nlohmann::json::array();
  for (const auto& lam : r.eigenvalues) eig.push_back({{"re", lam.real()}, {"im", lam.imag()}});
  return {{"kind", name(r.kind)},
          {"stability", name(r.stability)},
          {"eigenvalues", eig},
          {"lyapunov_ok", r.lyapunov_ok},
          {"fixed_point", r.fixed_point},
          {"diagnostic", r.diagnostic}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Economic networks as mechanical systems: simulate, analyse and control."};
  app.name("econsim");
  app.require_subcommand(1);

  std::string file, out_path, matrix_path;
  auto* simulate_cmd = app.add_subcommand("simulate", "Integrate a scenario and print the time series as CSV");
  simulate_cmd->add_option("file", file, "scenario file")->required();
  simulate_cmd->add_option("--out", out_path, "write CSV here instead of stdout");

  int order = 1;
  std::string topology = "parallel";
  double m = 1.0, k = 0.0, b = 0.0, F = 1.0, x0 = 1.0, t_max = 10.0;
  std::size_t n = 1001;
  auto* respond_cmd = app.add_subcommand("respond", "Closed-form free and step responses as CSV");
  respond_cmd->add_option("--order", order, "1 or 2")->check(CLI::IsMember({1, 2}));
  respond_cmd->add_option("--topology", topology, "parallel or series")
      ->check(CLI::IsMember({"parallel", "series"}));
  respond_cmd->add_option("--m", m, "inelasticity")->required();
  respond_cmd->add_option("--k", k, "storage stiffness");
  respond_cmd->add_option("--b", b, "friction");
  respond_cmd->add_option("--F", F, "step want");
  respond_cmd->add_option("--x0", x0, "initial value for the free response");
  respond_cmd->add_option("--t-max", t_max, "last sample time");
  respond_cmd->add_option("--n", n, "number of samples")->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));
  respond_cmd->add_option("--out", out_path, "write CSV here instead of stdout");

  auto* eigen_cmd = app.add_subcommand("eigen", "Eigen-baskets of an elasticity tensor as JSON");
  eigen_cmd->add_option("--matrix", matrix_path, "plain-text matrix file")->required();

  auto* equilibrium_cmd = app.add_subcommand("equilibrium", "Equilibrium kind and stability as JSON");
  equilibrium_cmd->add_option("file", file, "scenario file")->required();

  auto* control_cmd = app.add_subcommand("control", "Closed-loop simulation as CSV with error and action");
  control_cmd->add_option("file", file, "scenario file")->required();
  control_cmd->add_option("--out", out_path, "write CSV here instead of stdout");

  auto* validate_cmd = app.add_subcommand("validate", "Parse and assemble a scenario");
  validate_cmd->add_option("file", file, "scenario file")->required();

  auto* dump_cmd = app.add_subcommand("dump", "Print a scenario in canonical form");
  dump_cmd->add_option("file", file, "scenario file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return usage_or_parse;
  }

  auto load = [&]() { return parse_scenario(read_file(file)); };

  try {
    if (*simulate_cmd) {
      const ScenarioConfig cfg = load();
      const TimeSeries series = simulate(cfg.network, cfg.sim);
      std::optional<surplus::SurplusLedger> ledger;
      if (cfg.output.ledger) ledger = surplus::ledger_accrue(series, cfg.network);
      emit(out_path, out, [&](std::ostream& os) { csv::write_series(os, series, ledger ? &*ledger : nullptr); });
    } else if (*respond_cmd) {
      const auto curve = lti::respond(order, topology == "series" ? lti::Topology::series : lti::Topology::parallel,
                                      m, k, b, F, x0, t_max, n);
      emit(out_path, out, [&](std::ostream& os) { csv::write_response(os, curve); });
    } else if (*eigen_cmd) {
      const auto baskets = eigen_baskets(parse_matrix_text(read_file(matrix_path)));
      nlohmann::json basis = nlohmann::json::array();
      for (std::size_t i = 0; i < baskets.basis.rows(); ++i) {
        const auto row = baskets.basis.row(i);
        basis.push_back(std::vector<double>(row.begin(), row.end()));
      }
      out << nlohmann::json{{"eigenvalues", baskets.eigenvalues}, {"basis", basis}}.dump(2) << '\n';
    } else if (*equilibrium_cmd) {
      const ScenarioConfig cfg = load();
      out << report_json(classify_equilibrium(cfg.network)).dump(2) << '\n';
    } else if (*control_cmd) {
      const ScenarioConfig cfg = load();
      if (!cfg.control) throw ParseError("scenario has no [control] line", 1);
      const auto result = closed_loop_simulate(cfg.control_loop(), cfg.sim);
      std::optional<surplus::SurplusLedger> ledger;
      if (cfg.output.ledger) ledger = surplus::ledger_accrue(result.series, cfg.network);
      const std::vector<csv::ExtraColumn> extra{{"error", result.error}, {"action", result.action}};
      emit(out_path, out, [&](std::ostream& os) {
        csv::write_series(os, result.series, ledger ? &*ledger : nullptr, extra);
      });
    } else if (*validate_cmd) {
      const ScenarioConfig cfg = load();
      const System sys(cfg.network);
      out << "ok: " << cfg.network.agents.size() << " agents, " << cfg.network.elements.size() << " elements, "
          << cfg.network.exogenous.size() << " inputs, " << sys.layout().size() << " states\n";
    } else if (*dump_cmd) {
      out << dump_scenario(load());
    }
  } catch (const IoError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return io;
  } catch (const BlowUpError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return runtime;
  } catch (const SingularityError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return runtime;
  } catch (const ParseError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return usage_or_parse;
  } catch (const DomainError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return usage_or_parse;
  } catch (const AssemblyError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return usage_or_parse;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return runtime;
  }
  return ok;
}

}  // namespace econmech::cli
