#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "econmech/cli.hpp"

namespace fs = std::filesystem;
using econmech::cli::run;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string valid(const std::string& name) { return (fs::path(ECONMECH_TEST_DATA) / "valid" / name).string(); }

fs::path scratch(const std::string& name, const std::string& text) {
  const auto p = fs::temp_directory_path() / ("econsim_test_" + name);
  std::ofstream(p) << text;
  return p;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

void single_error_line(const Result& r) {
  CHECK(r.err.rfind("error: ", 0) == 0);
  CHECK(lines(r.err) == 1);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("simulate writes CSV with ledger columns") {
    const auto r = call({"simulate", valid("mass_damper_step.scn")});
    CHECK(r.code == 0);
    const auto header = r.out.substr(0, r.out.find('\n'));
    CHECK(header == "t,a.q.units,a.v.units,a.p.units,T,V,H,dQ,dW,balance_residual");
    CHECK(lines(r.out) == 1 + 2001);

    const auto plain = call({"simulate", valid("schedule.scn")});
    CHECK(plain.out.substr(0, plain.out.find('\n')) == "t,a.q.units,a.v.units,a.p.units");
  }

  TEST_CASE("simulate to a file") {
    const auto path = fs::temp_directory_path() / "econsim_test_out.csv";
    const auto r = call({"simulate", valid("free_decay.scn"), "--out", path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    CHECK(fs::file_size(path) > 0);
    const auto bad = call({"simulate", valid("free_decay.scn"), "--out", "/nonexistent/dir/x.csv"});
    CHECK(bad.code == 3);
    single_error_line(bad);
  }

  TEST_CASE("respond") {
    const auto r = call({"respond", "--order", "1", "--m", "2", "--b", "1", "--t-max", "1", "--n", "3"});
    CHECK(r.code == 0);
    std::istringstream in(r.out);
    std::string header, row0, row1;
    std::getline(in, header);
    std::getline(in, row0);
    std::getline(in, row1);
    CHECK(header == "t,DF,free,step");
    CHECK(row0 == "0,1,1,0");
    CHECK(row1.rfind("0.5,", 0) == 0);
    CHECK(call({"respond", "--order", "3", "--m", "1"}).code == 1);
    CHECK(call({"respond", "--order", "2"}).code == 1);
    const auto neg = call({"respond", "--m", "-1", "--b", "1"});
    CHECK(neg.code == 1);
    single_error_line(neg);
  }

  TEST_CASE("eigen") {
    const auto m = scratch("matrix.txt", "2\n2 1\n1 2\n");
    const auto r = call({"eigen", "--matrix", m.string()});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["eigenvalues"][0].get<double>() == doctest::Approx(3.0));
    CHECK(j["eigenvalues"][1].get<double>() == doctest::Approx(1.0));
    CHECK(j["basis"].size() == 2);

    const auto bad = call({"eigen", "--matrix", scratch("bad.txt", "2\n1 2\n3 x\n").string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("line 3") != std::string::npos);
    CHECK(call({"eigen", "--matrix", scratch("npd.txt", "2\n1 2\n2 1\n").string()}).code == 1);
    CHECK(call({"eigen", "--matrix", "/nonexistent.txt"}).code == 3);
  }

  TEST_CASE("equilibrium") {
    const auto r = call({"equilibrium", valid("mass_damper_step.scn")});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["kind"] == "price");
    CHECK(j["stability"] == "asymptotically stable");
    CHECK(j["eigenvalues"][0]["re"].get<double>() == doctest::Approx(-0.5));
    CHECK(j.contains("lyapunov_ok"));
    CHECK(j.contains("fixed_point"));

    const auto osc = nlohmann::json::parse(call({"equilibrium", valid("oscillator_frictionless.scn")}).out);
    CHECK(osc["stability"] == "marginally stable");
  }

  TEST_CASE("control") {
    const auto r = call({"control", valid("pid_first_order.scn")});
    REQUIRE(r.code == 0);
    const auto header = r.out.substr(0, r.out.find('\n'));
    CHECK(header.size() > 13);
    CHECK(header.substr(header.size() - 13) == ",error,action");
    const auto none = call({"control", valid("free_decay.scn")});
    CHECK(none.code == 1);
    single_error_line(none);
  }

  TEST_CASE("validate and dump") {
    const auto r = call({"validate", valid("two_accounts.scn")});
    CHECK(r.code == 0);
    CHECK(r.out == "ok: 1 agents, 2 elements, 1 inputs, 4 states\n");
    const auto d = call({"dump", valid("mass_damper_step.scn")});
    CHECK(d.code == 0);
    const auto again = call({"dump", scratch("dumped.scn", d.out).string()});
    CHECK(again.out == d.out);
  }

  TEST_CASE("exit codes") {
    const auto parse = call({"validate", (fs::path(ECONMECH_TEST_DATA) / "bad" / "zero_mass.scn").string()});
    CHECK(parse.code == 1);
    single_error_line(parse);
    CHECK(parse.err.find("line 1") != std::string::npos);

    CHECK(call({"validate", "/nonexistent.scn"}).code == 3);
    CHECK(call({}).code == 1);
    CHECK(call({"frobnicate"}).code == 1);

    const auto blow = call({"simulate", scratch("blow.scn",
                                                "[agent] a m=1 q0=1\n[element] spring k=1e12 attach=a\n"
                                                "[sim] horizon=10 h=0.1\n")
                                            .string()});
    CHECK(blow.code == 2);
    single_error_line(blow);

    const auto sing = call({"simulate", scratch("sing.scn",
                                                "[agent] a m=1 q0=1 p0=-5\n[element] gravity mu=1 attach=a\n"
                                                "[sim] horizon=10 h=0.01\n")
                                            .string()});
    CHECK(sing.code == 2);
  }
}
