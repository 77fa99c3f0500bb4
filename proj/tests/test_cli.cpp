#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ceds/report.hpp"

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <sys/stat.h>
#include <sys/wait.h>

using namespace ceds;

namespace {

RunReport sample_report() {
    RunReport r;
    r.program = "demo.cir";
    r.store = StoreKind::Sliced;
    r.cache_enabled = true;
    r.backend = "enum";
    r.verdict = Verdict::Kind::Safe;
    r.ledger.equal_checks = 10;
    r.ledger.syntactic_equal = 7;
    r.ledger.cache_hits = 2;
    r.ledger.solver_calls = 1;
    r.ledger.emptiness_checks = 4;
    r.ledger.states_generated = 20;
    r.ledger.states_stored = 12;
    r.ledger.wall_time_ms = 3;
    r.cache = CacheStats{2, 3};
    r.cache_entries = 3;
    return r;
}

struct RunOutput {
    int exit_code = -1;
    std::string stdout_text;
};

RunOutput run_tool(const std::string& args) {
    const char* bin = std::getenv("CEDS_MC_BIN");
    REQUIRE(bin != nullptr);
    std::string cmd = std::string(bin) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunOutput out;
    char buf[4096];
    while (size_t n = fread(buf, 1, sizeof(buf), pipe))
        out.stdout_text.append(buf, n);
    int status = pclose(pipe);
    out.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

std::string write_program(const std::string& name, const std::string& body) {
    std::string path = "/tmp/ceds_cli_" + name + ".cir";
    std::ofstream out(path);
    out << body;
    return path;
}

} // namespace

TEST_CASE("json report carries the fixed key set with the ledger split") {
    std::string text = emit_report(sample_report(), ReportFormat::Json);
    auto j = nlohmann::json::parse(text);
    CHECK(j["program"] == "demo.cir");
    CHECK(j["store"] == "partial");
    CHECK(j["cache"] == "on");
    CHECK(j["backend"] == "enum");
    CHECK(j["verdict"] == "safe");
    CHECK(j["equal_checks"] == 10);
    CHECK(j["syntactic_equal"] == 7);
    CHECK(j["cache_hits"] == 2);
    CHECK(j["solver_calls"] == 1);
    CHECK(j["emptiness_checks"] == 4);
    CHECK(j["states_generated"] == 20);
    CHECK(j["states_stored"] == 12);
    CHECK(j.contains("wall_time_ms"));
    CHECK(j["cache_stats"]["hits"] == 2);
    CHECK(j["cache_stats"]["misses"] == 3);
    CHECK(j["cache_stats"]["entries"] == 3);
}

TEST_CASE("a non-conserved ledger is refused") {
    RunReport r = sample_report();
    r.ledger.solver_calls = 5; // 7 + 2 + 5 != 10
    CHECK_THROWS_AS(emit_report(r, ReportFormat::Json), InvariantError);
    CHECK_THROWS_AS(emit_report(r, ReportFormat::Text), InvariantError);
}

TEST_CASE("text format renders the same numbers as json") {
    RunReport r = sample_report();
    std::string text = emit_report(r, ReportFormat::Text);
    auto j = nlohmann::json::parse(emit_report(r, ReportFormat::Json));
    for (const char* key :
         {"equal_checks", "syntactic_equal", "cache_hits", "solver_calls", "states_stored"}) {
        std::string value = std::to_string(j[key].get<uint64_t>());
        CAPTURE(key);
        CHECK(text.find(value) != std::string::npos);
    }
    CHECK(text.find("partial") != std::string::npos);
    CHECK(text.find("safe") != std::string::npos);
}

TEST_CASE("exit codes are a pure function of the verdict") {
    CHECK(exit_code_for(Verdict::Kind::Safe) == 0);
    CHECK(exit_code_for(Verdict::Kind::AssertFail) == 1);
    CHECK(exit_code_for(Verdict::Kind::Exhausted) == 2);
}

TEST_CASE("the binary maps runs to exit codes and emits parseable reports") {
    std::string safe = write_program("safe", R"(
fn main() {
  var x: u4;
  x = 5;
  assert(x <=u 9);
  halt;
}
)");
    RunOutput ok = run_tool("--store partial --cache on --backend enum " + safe);
    CHECK(ok.exit_code == 0);
    auto j = nlohmann::json::parse(ok.stdout_text);
    CHECK(j["verdict"] == "safe");
    CHECK(j["store"] == "partial");

    std::string failing = write_program("fail", R"(
fn main() {
  var x: u4;
  x = 0;
  assert(x == 1);
  halt;
}
)");
    CHECK(run_tool("--backend enum " + failing).exit_code == 1);

    RunOutput missing = run_tool("--backend enum /nonexistent/prog.cir");
    CHECK(missing.exit_code == 3);

    RunOutput bad_flag = run_tool("--store bogus " + safe);
    CHECK(bad_flag.exit_code == 3);

    // smtlib backend without a solver path is a config error
    RunOutput no_solver = run_tool("--backend smtlib " + safe);
    CHECK(no_solver.exit_code == 3);

    // a configured but broken solver is a backend failure, not a usage error
    const char* bin = std::getenv("CEDS_MC_BIN");
    std::string cmd = "CEDS_SOLVER=/nonexistent/solver " + std::string(bin) +
                      " --backend smtlib " + safe + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 4);

    // exhaustion maps to 2
    RunOutput exhausted = run_tool("--backend enum --max-states 1 " + safe);
    CHECK(exhausted.exit_code == 2);

    // text format is accepted
    RunOutput text = run_tool("--backend enum --format text " + safe);
    CHECK(text.exit_code == 0);
    CHECK(text.stdout_text.find("safe") != std::string::npos);
}

TEST_CASE("bench mode runs every program under all four configurations") {
    std::string dir = "/tmp/ceds_cli_bench";
    mkdir(dir.c_str(), 0755);
    {
        std::ofstream a(dir + "/a.cir");
        a << "fn main() { var x: u2; x = 1; assert(x == 1); halt; }\n";
        std::ofstream b(dir + "/b.cir");
        b << "fn main() { var y: u2; y = nondet(); halt; }\n";
    }
    RunOutput out = run_tool("--backend enum --bench " + dir + " --all-configs");
    CHECK(out.exit_code == 0);
    // one JSON line per (program, configuration)
    int lines = 0;
    size_t pos = 0;
    while ((pos = out.stdout_text.find('\n', pos)) != std::string::npos) {
        ++lines;
        ++pos;
    }
    CHECK(lines == 8);
    auto first_line = out.stdout_text.substr(0, out.stdout_text.find('\n'));
    auto j = nlohmann::json::parse(first_line);
    CHECK(j["store"] == "smt");
    CHECK(j["cache"] == "off");
}
