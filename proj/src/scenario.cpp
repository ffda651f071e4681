#include "econmech/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "econmech/csv.hpp"
#include "econmech/errors.hpp"

namespace econmech {

ControlLoop ScenarioConfig::control_loop() const {
  if (!control) throw AssemblyError("scenario has no [control] line");
  return ControlLoop{network, control->agent, control->variable, control->account,
                     control->gains, control->setpoint, control->t_step};
}

namespace {

struct Token {
  std::string_view text;
  int col;
};

struct Statement {
  int line;
  Token section;
  std::vector<Token> args;
};

[[noreturn]] void fail(const std::string& msg, int line, int col = 0) { throw ParseError(msg, line, col); }

std::vector<Statement> split_lines(std::string_view text) {
  std::vector<Statement> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      tokens.push_back({line.substr(i, j - i), static_cast<int>(i + 1)});
      i = j;
    }
    if (tokens.empty()) continue;
    const Token head = tokens.front();
    if (head.text.size() < 3 || head.text.front() != '[' || head.text.back() != ']')
      fail("expected a [section] keyword at the start of the line, got '" + std::string(head.text) + "'",
           line_no, head.col);
    out.push_back({line_no, head, {tokens.begin() + 1, tokens.end()}});
  }
  return out;
}

double parse_number(std::string_view s, const std::string& what, int line, int col) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || std::isnan(v))
    fail("expected a number for " + what + ", got '" + std::string(s) + "'", line, col);
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(sep, start);
    out.push_back(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

/// key=value arguments of one statement. Every key must be consumed.
class Keys {
 public:
  Keys(const Statement& st, std::size_t first, std::string context) : line_(st.line), context_(std::move(context)) {
    for (std::size_t i = first; i < st.args.size(); ++i) {
      const Token& t = st.args[i];
      const auto eq = t.text.find('=');
      if (eq == std::string_view::npos || eq == 0)
        fail("expected key=value, got '" + std::string(t.text) + "'", line_, t.col);
      const std::string key(t.text.substr(0, eq));
      if (values_.count(key)) fail("duplicate key '" + key + "'", line_, t.col);
      values_[key] = {t.text.substr(eq + 1), t.col + static_cast<int>(eq) + 1, t.col};
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<Token> text(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_.push_back(key);
    return Token{it->second.value, it->second.value_col};
  }

  std::optional<double> number(const std::string& key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    return parse_number(t->text, "'" + key + "'", line_, t->col);
  }

  double required(const std::string& key) {
    const auto v = number(key);
    if (!v) fail(context_ + " requires " + key + "=", line_);
    return *v;
  }

  std::vector<double> list(const Token& t, const std::string& key) {
    std::vector<double> out;
    for (auto part : split(t.text, ',')) out.push_back(parse_number(part, "'" + key + "'", line_, t.col));
    return out;
  }

  int col(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? 0 : it->second.key_col;
  }

  void finish() const {
    for (const auto& [key, v] : values_)
      if (std::find(used_.begin(), used_.end(), key) == used_.end())
        fail("unknown key '" + key + "' for " + context_, line_, v.key_col);
  }

 private:
  struct Entry {
    std::string_view value;
    int value_col;
    int key_col;
  };
  int line_;
  std::string context_;
  std::map<std::string, Entry> values_;
  std::vector<std::string> used_;
};

std::string section_name(const Statement& st) {
  return std::string(st.section.text.substr(1, st.section.text.size() - 2));
}

class Builder {
 public:
  ScenarioConfig build(const std::vector<Statement>& statements, int last_line) {
    for (const auto& st : statements) {
      const std::string s = section_name(st);
      if (s != "chart" && s != "agent" && s != "element" && s != "input" && s != "sim" && s != "control" &&
          s != "output")
        fail("unknown section [" + s + "]", st.line, st.section.col);
    }
    std::vector<Account> accounts;
    for (const auto& st : statements)
      if (section_name(st) == "chart") accounts.push_back(chart_line(st));
    if (!accounts.empty()) {
      try {
        cfg_.network.chart = ChartOfAccounts(std::move(accounts));
      } catch (const std::exception& e) {
        fail(e.what(), first_line("chart", statements));
      }
    }
    for (const auto& st : statements)
      if (section_name(st) == "agent") agent_line(st);

    bool have_sim = false, have_control = false, have_output = false;
    for (const auto& st : statements) {
      const std::string s = section_name(st);
      if (s == "element") {
        element_line(st);
      } else if (s == "input") {
        input_line(st);
      } else if (s == "sim") {
        if (have_sim) fail("duplicate [sim] line", st.line, st.section.col);
        have_sim = true;
        sim_line(st);
      } else if (s == "control") {
        if (have_control) fail("duplicate [control] line", st.line, st.section.col);
        have_control = true;
        control_line(st);
      } else if (s == "output") {
        if (have_output) fail("duplicate [output] line", st.line, st.section.col);
        have_output = true;
        output_line(st);
      }
    }
    if (!have_sim) fail("missing [sim] line with horizon=", last_line);

    // Default wall stiffness depends on every spring on the slot.
    for (const std::size_t index : pending_walls_) {
      auto& wall = std::get<StockoutWall>(cfg_.network.elements[index].law);
      wall.k_wall = default_wall_stiffness(cfg_.network, cfg_.network.elements[index].attachment);
    }
    try {
      cfg_.network.validate();
    } catch (const std::exception& e) {
      fail(e.what(), last_line);
    }
    return std::move(cfg_);
  }

 private:
  static int first_line(const std::string& section, const std::vector<Statement>& statements) {
    for (const auto& st : statements)
      if (section_name(st) == section) return st.line;
    return 0;
  }

  Account chart_line(const Statement& st) {
    if (st.args.size() != 3 || st.args[0].text != "account")
      fail("expected: [chart] account <name> <unit>", st.line, st.section.col);
    for (int i = 1; i < 3; ++i)
      if (st.args[i].text.find_first_of("=:,") != std::string_view::npos)
        fail("account names and units may not contain '=', ':' or ','", st.line, st.args[i].col);
    return Account{std::string(st.args[1].text), std::string(st.args[2].text)};
  }

  std::size_t account(std::string_view name, int line, int col) const {
    const auto k = cfg_.network.chart.index_of(std::string(name));
    if (!k) fail("unknown account '" + std::string(name) + "'", line, col);
    return *k;
  }

  void check_agent(const std::string& id, int line, int col) const {
    if (!cfg_.network.find_agent(id)) fail("unknown agent '" + id + "'", line, col);
  }

  std::vector<double> broadcast(std::vector<double> values, const std::string& key, int line, int col) const {
    const std::size_t d = cfg_.network.chart.dimension();
    if (values.size() == 1) return std::vector<double>(d, values[0]);
    if (values.size() != d)
      fail(key + " needs 1 or " + std::to_string(d) + " values, got " + std::to_string(values.size()), line, col);
    return values;
  }

  void agent_line(const Statement& st) {
    if (st.args.empty() || st.args[0].text.find_first_of("=:,") != std::string_view::npos)
      fail("expected: [agent] <id> m=<value> ...", st.line, st.section.col);
    const std::string id(st.args[0].text);
    if (cfg_.network.find_agent(id)) fail("duplicate agent '" + id + "'", st.line, st.args[0].col);
    Keys keys(st, 1, "agent '" + id + "'");
    const std::size_t d = cfg_.network.chart.dimension();

    Demander agent;
    agent.id = id;
    const auto m_tok = keys.text("m");
    const auto eps_tok = keys.text("eps");
    if (m_tok && eps_tok) fail("give either m= or eps=, not both", st.line, keys.col("eps"));
    if (!m_tok && !eps_tok) fail("agent '" + id + "' requires m= (inelasticity, m > 0) or eps=", st.line);
    try {
      if (m_tok && m_tok->text.find(':') != std::string_view::npos) {
        std::vector<Breakpoint> knots;
        for (auto part : split(m_tok->text, ',')) {
          const auto colon = part.find(':');
          if (colon == std::string_view::npos) fail("schedule knots are written t:m", st.line, m_tok->col);
          knots.push_back({parse_number(part.substr(0, colon), "schedule time", st.line, m_tok->col),
                           parse_number(part.substr(colon + 1), "schedule m", st.line, m_tok->col)});
        }
        agent.inelasticity = Inelasticity::schedule(std::move(knots));
      } else if (m_tok) {
        agent.inelasticity = Inelasticity(parse_number(m_tok->text, "'m'", st.line, m_tok->col));
      } else {
        const auto rows = split(eps_tok->text, ';');
        if (rows.size() != d)
          fail("eps needs " + std::to_string(d) + " rows separated by ';'", st.line, eps_tok->col);
        Matrix eps(d, d);
        for (std::size_t r = 0; r < d; ++r) {
          const auto cells = split(rows[r], ',');
          if (cells.size() != d)
            fail("eps row " + std::to_string(r + 1) + " needs " + std::to_string(d) + " values", st.line,
                 eps_tok->col);
          for (std::size_t c = 0; c < d; ++c) eps(r, c) = parse_number(cells[c], "'eps'", st.line, eps_tok->col);
        }
        agent.inelasticity = Inelasticity::tensor(ElasticityTensor(std::move(eps)));
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      fail(e.what(), st.line, m_tok ? keys.col("m") : keys.col("eps"));
    }

    agent.q.assign(d, 0.0);
    agent.p.assign(d, 0.0);
    if (const auto t = keys.text("q0")) agent.q = broadcast(keys.list(*t, "q0"), "q0", st.line, t->col);
    const auto p_tok = keys.text("p0");
    const auto v_tok = keys.text("v0");
    if (p_tok && v_tok)
      fail("give either p0 or v0, not both: the schedule p = m v fixes one from the other", st.line,
           keys.col("v0"));
    if (p_tok) agent.p = broadcast(keys.list(*p_tok, "p0"), "p0", st.line, p_tok->col);
    if (v_tok) {
      const auto v = broadcast(keys.list(*v_tok, "v0"), "v0", st.line, v_tok->col);
      agent.p = agent.inelasticity.price(v, 0.0);
    }
    keys.finish();
    for (std::size_t k = 0; k < d; ++k)
      if (!std::isfinite(agent.q[k]) || !std::isfinite(agent.p[k]))
        fail("initial stock and price must be finite", st.line);
    cfg_.network.agents.push_back(std::move(agent));
  }

  Attachment attachment(Keys& keys, const Statement& st) {
    const auto at = keys.text("attach");
    if (!at) fail("element requires attach=<agent>[:<account>]", st.line);
    Attachment out;
    const auto colon = at->text.find(':');
    out.agent = std::string(at->text.substr(0, colon));
    check_agent(out.agent, st.line, at->col);
    if (colon != std::string_view::npos)
      out.account = account(at->text.substr(colon + 1), st.line, at->col + static_cast<int>(colon) + 1);
    if (const auto to = keys.text("to")) {
      out.counterparty = std::string(to->text);
      check_agent(out.counterparty, st.line, to->col);
      if (out.counterparty == out.agent) fail("an element cannot link an agent to itself", st.line, to->col);
    }
    return out;
  }

  void element_line(const Statement& st) {
    if (st.args.empty()) fail("expected: [element] <kind> <key>=<value>... attach=<agent>", st.line, st.section.col);
    const std::string kind(st.args[0].text);
    Keys keys(st, 1, kind);
    ElementLaw law;
    bool default_wall = false;
    if (kind == "spring") {
      law = LinearSpring{keys.required("k"), keys.number("qstar").value_or(0.0)};
    } else if (kind == "damper") {
      law = LinearDamper{keys.required("b")};
    } else if (kind == "signum") {
      law = SignumFriction{keys.required("bs"), keys.required("bk"), keys.number("band").value_or(1e-6)};
    } else if (kind == "drag") {
      law = QuadraticDrag{keys.required("c")};
    } else if (kind == "needs") {
      law = ConstantNeeds{keys.required("g")};
    } else if (kind == "gravity") {
      law = GravityLikeConvenience{keys.required("mu"), keys.number("qref")};
    } else if (kind == "stockout") {
      const double qmin = keys.required("qmin");
      const double qmax = keys.required("qmax");
      const auto kwall = keys.number("kwall");
      default_wall = !kwall;
      law = StockoutWall{qmin, qmax, kwall.value_or(1.0)};
    } else if (kind == "saturating") {
      law = SaturatingSpring{keys.required("k"), keys.required("fsat"), keys.number("qstar").value_or(0.0)};
    } else if (kind == "carry") {
      law = SeriesCarry{keys.required("k"), keys.required("b"), keys.number("s0").value_or(0.0)};
    } else {
      fail("unknown element kind '" + kind +
               "' (spring, damper, signum, drag, needs, gravity, stockout, saturating, carry)",
           st.line, st.args[0].col);
    }
    const Attachment where = attachment(keys, st);
    keys.finish();
    try {
      validate_law(law);
    } catch (const std::exception& e) {
      fail(e.what(), st.line, st.args[0].col);
    }
    if (!where.to_market() && is_single_agent_only(law))
      fail(kind + " acts between an agent and the market; drop to=", st.line, keys.col("to"));
    const auto a = *cfg_.network.find_agent(where.agent);
    const auto& m = cfg_.network.agents[a].inelasticity;
    if (m.is_tensor() && (std::holds_alternative<ConstantNeeds>(law) ||
                          std::holds_alternative<GravityLikeConvenience>(law)))
      fail(kind + " needs an agent with scalar m", st.line, keys.col("attach"));
    if (default_wall) pending_walls_.push_back(cfg_.network.elements.size());
    cfg_.network.elements.push_back({law, where});
  }

  void input_line(const Statement& st) {
    if (st.args.size() < 2) fail("expected: [input] <agent>[:<account>] step|impulse|sin <key>=<value>...", st.line, st.section.col);
    const Token target = st.args[0];
    ExogenousInput in;
    const auto colon = target.text.find(':');
    in.agent = std::string(target.text.substr(0, colon));
    check_agent(in.agent, st.line, target.col);
    if (colon != std::string_view::npos)
      in.account = account(target.text.substr(colon + 1), st.line, target.col + static_cast<int>(colon) + 1);
    const std::string shape(st.args[1].text);
    Keys keys(st, 2, shape + " input");
    try {
      if (shape == "step") {
        in.signal = WantSignal{Step{keys.required("F"), keys.number("t").value_or(0.0)}};
      } else if (shape == "impulse") {
        in.signal = WantSignal{Impulse{keys.required("J"), keys.number("t").value_or(0.0)}};
      } else if (shape == "sin") {
        in.signal = WantSignal{Sinusoid{keys.required("amp"), keys.required("freq"), keys.number("phase").value_or(0.0)}};
      } else {
        fail("unknown input shape '" + shape + "' (step, impulse, sin)", st.line, st.args[1].col);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      fail(e.what(), st.line, st.args[1].col);
    }
    keys.finish();
    cfg_.network.exogenous.push_back(std::move(in));
  }

  void sim_line(const Statement& st) {
    Keys keys(st, 0, "[sim]");
    SimConfig sim;
    sim.horizon = keys.required("horizon");
    sim.step = keys.number("h").value_or(1e-3 * sim.horizon);
    if (const auto t = keys.text("record_every")) {
      std::size_t n = 0;
      const auto [ptr, ec] = std::from_chars(t->text.data(), t->text.data() + t->text.size(), n);
      if (ec != std::errc() || ptr != t->text.data() + t->text.size() || n < 1)
        fail("record_every must be an integer >= 1", st.line, t->col);
      sim.record_every = n;
    }
    keys.finish();
    try {
      sim.validate();
    } catch (const std::exception& e) {
      fail(e.what(), st.line, st.section.col);
    }
    cfg_.sim = sim;
  }

  static bool flag(const Token& t, const std::string& key, int line) {
    if (t.text == "yes" || t.text == "true" || t.text == "on") return true;
    if (t.text == "no" || t.text == "false" || t.text == "off") return false;
    fail(key + " must be yes or no", line, t.col);
  }

  void control_line(const Statement& st) {
    Keys keys(st, 0, "[control]");
    ControlSpec ctl;
    const auto var = keys.text("var");
    if (!var) fail("[control] requires var=<agent>:<q|p>[:<account>]", st.line);
    const auto parts = split(var->text, ':');
    if (parts.size() < 2 || parts.size() > 3 || (parts[1] != "q" && parts[1] != "p"))
      fail("var must read <agent>:<q|p>[:<account>]", st.line, var->col);
    ctl.agent = std::string(parts[0]);
    check_agent(ctl.agent, st.line, var->col);
    ctl.variable = parts[1] == "q" ? Measured::q : Measured::p;
    if (parts.size() == 3) ctl.account = account(parts[2], st.line, var->col);
    ctl.gains.kp = keys.number("kp").value_or(0.0);
    ctl.gains.ki = keys.number("ki").value_or(0.0);
    ctl.gains.kd = keys.number("kd").value_or(0.0);
    ctl.gains.output_limit = keys.number("limit");
    if (const auto t = keys.text("antiwindup")) ctl.gains.anti_windup = flag(*t, "antiwindup", st.line);
    ctl.setpoint = keys.required("setpoint");
    ctl.t_step = keys.number("t_step").value_or(0.0);
    keys.finish();
    try {
      ctl.gains.validate();
    } catch (const std::exception& e) {
      fail(e.what(), st.line, st.section.col);
    }
    if (!std::isfinite(ctl.setpoint) || !std::isfinite(ctl.t_step))
      fail("setpoint and t_step must be finite", st.line);
    cfg_.control = ctl;
  }

  void output_line(const Statement& st) {
    Keys keys(st, 0, "[output]");
    if (const auto t = keys.text("ledger")) cfg_.output.ledger = flag(*t, "ledger", st.line);
    keys.finish();
  }

  ScenarioConfig cfg_;
  std::vector<std::size_t> pending_walls_;
};

std::string list(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + csv::format_number(values[i]);
  return out;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
  const auto statements = split_lines(text);
  // Errors about something missing point at the last statement.
  const int last_line = statements.empty() ? 1 : statements.back().line;
  return Builder().build(statements, last_line);
}

std::string dump_scenario(const ScenarioConfig& c) {
  using csv::format_number;
  std::ostringstream out;
  const Network& net = c.network;
  // The default chart is implicit; its unit would read as a comment.
  if (!(net.chart == ChartOfAccounts()))
    for (const auto& a : net.chart.accounts()) out << "[chart] account " << a.name << ' ' << a.unit << '\n';

  for (const auto& a : net.agents) {
    out << "[agent] " << a.id << ' ';
    const auto& m = a.inelasticity;
    if (m.is_tensor()) {
      const Matrix& e = m.elasticity().matrix();
      out << "eps=";
      for (std::size_t r = 0; r < e.rows(); ++r) out << (r ? ";" : "") << list(e.row(r));
    } else if (m.is_schedule()) {
      out << "m=";
      for (std::size_t i = 0; i < m.knots().size(); ++i)
        out << (i ? "," : "") << format_number(m.knots()[i].t) << ':' << format_number(m.knots()[i].m);
    } else {
      out << "m=" << format_number(m.at(0.0));
    }
    out << " q0=" << list(a.q) << " p0=" << list(a.p) << '\n';
  }

  for (const auto& e : net.elements) {
    out << "[element] " << kind_name(e.law) << ' ';
    std::visit(
        [&](const auto& law) {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, LinearSpring>) {
            out << "k=" << format_number(law.k) << " qstar=" << format_number(law.set_point);
          } else if constexpr (std::is_same_v<T, LinearDamper>) {
            out << "b=" << format_number(law.b);
          } else if constexpr (std::is_same_v<T, SignumFriction>) {
            out << "bs=" << format_number(law.b_static) << " bk=" << format_number(law.b_kinetic)
                << " band=" << format_number(law.v_band);
          } else if constexpr (std::is_same_v<T, QuadraticDrag>) {
            out << "c=" << format_number(law.c);
          } else if constexpr (std::is_same_v<T, ConstantNeeds>) {
            out << "g=" << format_number(law.g);
          } else if constexpr (std::is_same_v<T, GravityLikeConvenience>) {
            out << "mu=" << format_number(law.mu);
            if (law.q_ref) out << " qref=" << format_number(*law.q_ref);
          } else if constexpr (std::is_same_v<T, StockoutWall>) {
            out << "qmin=" << format_number(law.q_min) << " qmax=" << format_number(law.q_max)
                << " kwall=" << format_number(law.k_wall);
          } else if constexpr (std::is_same_v<T, SaturatingSpring>) {
            out << "k=" << format_number(law.k) << " fsat=" << format_number(law.f_sat)
                << " qstar=" << format_number(law.set_point);
          } else if constexpr (std::is_same_v<T, SeriesCarry>) {
            out << "k=" << format_number(law.k) << " b=" << format_number(law.b) << " s0=" << format_number(law.s0);
          }
        },
        e.law);
    out << " attach=" << e.attachment.agent << ':' << net.chart[e.attachment.account].name;
    if (!e.attachment.to_market()) out << " to=" << e.attachment.counterparty;
    out << '\n';
  }

  for (const auto& in : net.exogenous) {
    out << "[input] " << in.agent << ':' << net.chart[in.account].name << ' ';
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Step>) {
            out << "step F=" << format_number(s.F) << " t=" << format_number(s.t_on);
          } else if constexpr (std::is_same_v<T, Impulse>) {
            out << "impulse J=" << format_number(s.J) << " t=" << format_number(s.t0);
          } else if constexpr (std::is_same_v<T, Sinusoid>) {
            out << "sin amp=" << format_number(s.amplitude) << " freq=" << format_number(s.frequency)
                << " phase=" << format_number(s.phase);
          } else {
            out << "step F=0 t=0";
          }
        },
        in.signal.shape());
    out << '\n';
  }

  out << "[sim] horizon=" << format_number(c.sim.horizon) << " h=" << format_number(c.sim.step)
      << " record_every=" << c.sim.record_every << '\n';

  if (c.control) {
    const auto& s = *c.control;
    out << "[control] var=" << s.agent << ':' << (s.variable == Measured::q ? 'q' : 'p') << ':'
        << net.chart[s.account].name << " kp=" << format_number(s.gains.kp) << " ki=" << format_number(s.gains.ki)
        << " kd=" << format_number(s.gains.kd) << " setpoint=" << format_number(s.setpoint);
    if (s.gains.output_limit) out << " limit=" << format_number(*s.gains.output_limit);
    out << " antiwindup=" << (s.gains.anti_windup ? "yes" : "no") << " t_step=" << format_number(s.t_step) << '\n';
  }
  out << "[output] ledger=" << (c.output.ledger ? "yes" : "no") << '\n';
  return out.str();
}

}  // namespace econmech
