#include "ceds/explore.hpp"
#include "ceds/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitUsage = 3;
constexpr int kExitBackend = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Options {
    std::string store = "partial";
    std::string cache = "on";
    std::string backend = "smtlib";
    std::string solver;
    std::string order = "bfs";
    std::string format = "json";
    std::string bench_dir;
    bool all_configs = false;
    uint64_t max_states = 1'000'000;
    uint32_t enum_bits = 24;
    std::string program_path;
};

ceds::ExploreConfig config_from(const Options& opt) {
    ceds::ExploreConfig cfg;
    cfg.store = opt.store == "smt" ? ceds::StoreKind::Monolithic : ceds::StoreKind::Sliced;
    cfg.cache_enabled = opt.cache == "on";
    cfg.order = opt.order == "dfs" ? ceds::SearchOrder::DFS : ceds::SearchOrder::BFS;
    cfg.max_states = opt.max_states;
    if (opt.backend == "enum") {
        cfg.backend = ceds::BackendConfig::enumeration(opt.enum_bits);
    } else {
        std::string path = opt.solver;
        if (path.empty())
            if (const char* env = std::getenv("CEDS_SOLVER"))
                path = env;
        if (path.empty())
            throw CLI::ValidationError(
                "--backend smtlib needs --solver PATH or the CEDS_SOLVER variable");
        cfg.backend = ceds::BackendConfig::external(path);
    }
    return cfg;
}

int run_one(const std::string& path, const ceds::ExploreConfig& cfg, ceds::ReportFormat format,
            ceds::RunReport* report_out) {
    ceds::Program prog = ceds::parse_program(read_file(path));
    ceds::ExploreResult result = ceds::explore(prog, cfg);
    ceds::RunReport report = ceds::make_report(path, cfg, result);
    std::cout << ceds::emit_report(report, format)
              << (format == ceds::ReportFormat::Json ? "\n" : "");
    if (report_out)
        *report_out = report;
    return ceds::exit_code_for(result.verdict.kind);
}

int run_bench(const Options& opt, ceds::ReportFormat format) {
    namespace fs = std::filesystem;
    std::vector<std::string> programs;
    for (const auto& entry : fs::directory_iterator(opt.bench_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".cir")
            programs.push_back(entry.path().string());
    std::sort(programs.begin(), programs.end());
    if (programs.empty())
        throw CLI::ValidationError("no .cir programs under '" + opt.bench_dir + "'");

    std::vector<Options> configs;
    if (opt.all_configs) {
        for (const char* store : {"smt", "partial"})
            for (const char* cache : {"off", "on"}) {
                Options o = opt;
                o.store = store;
                o.cache = cache;
                configs.push_back(o);
            }
    } else {
        configs.push_back(opt);
    }

    struct Row {
        std::string label;
        uint64_t equal_checks = 0, syntactic = 0, cached = 0, solver = 0, time_ms = 0;
    };
    std::vector<Row> rows(configs.size());
    for (size_t c = 0; c < configs.size(); ++c)
        rows[c].label = std::string(configs[c].store) + "/" + configs[c].cache;

    for (const std::string& path : programs) {
        for (size_t c = 0; c < configs.size(); ++c) {
            ceds::RunReport report;
            run_one(path, config_from(configs[c]), format, &report);
            rows[c].equal_checks += report.ledger.equal_checks;
            rows[c].syntactic += report.ledger.syntactic_equal;
            rows[c].cached += report.ledger.cache_hits;
            rows[c].solver += report.ledger.solver_calls;
            rows[c].time_ms += report.ledger.wall_time_ms;
        }
    }

    std::cerr << "configuration   equal-checks  syntactic  cached  solver-calls  time-ms\n";
    for (const Row& row : rows)
        std::cerr << row.label << "  " << row.equal_checks << "  " << row.syntactic << "  "
                  << row.cached << "  " << row.solver << "  " << row.time_ms << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"control-explicit data-symbolic model checker for the mini concurrent IR"};
    Options opt;
    app.add_option("--store", opt.store, "state store: smt (monolithic) or partial (sliced)")
        ->check(CLI::IsMember({"smt", "partial"}));
    app.add_option("--cache", opt.cache, "query-verdict caching")
        ->check(CLI::IsMember({"on", "off"}));
    app.add_option("--backend", opt.backend, "satisfiability backend")
        ->check(CLI::IsMember({"smtlib", "enum"}));
    app.add_option("--solver", opt.solver, "SMT-LIB solver binary for --backend smtlib");
    app.add_option("--enum-bits", opt.enum_bits,
                   "assignment-space bit cap for --backend enum (default 24)");
    app.add_option("--max-states", opt.max_states, "stored-state cap (default 10^6)");
    app.add_option("--order", opt.order, "search order")->check(CLI::IsMember({"bfs", "dfs"}));
    app.add_option("--bench", opt.bench_dir, "run every .cir program under a directory");
    app.add_flag("--all-configs", opt.all_configs,
                 "bench mode: run all four store x cache configurations");
    app.add_option("--format", opt.format, "report format")
        ->check(CLI::IsMember({"json", "text"}));
    app.add_option("program", opt.program_path, "program file (.cir)");

    try {
        app.parse(argc, argv);
        ceds::ReportFormat format =
            opt.format == "text" ? ceds::ReportFormat::Text : ceds::ReportFormat::Json;
        if (!opt.bench_dir.empty())
            return run_bench(opt, format);
        if (opt.program_path.empty())
            throw CLI::ValidationError("a program file is required outside bench mode");
        return run_one(opt.program_path, config_from(opt), format, nullptr);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help
        app.exit(e);
        return kExitUsage;
    } catch (const ceds::ParseError& e) {
        std::cerr << "error: " << e.what() << "\nrun with --help for usage\n";
        return kExitUsage;
    } catch (const ceds::SolverFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const ceds::SpawnFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const ceds::DomainTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const ceds::InvariantError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\nrun with --help for usage\n";
        return kExitUsage;
    }
}
