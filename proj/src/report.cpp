#include "ceds/report.hpp"

#include <json.hpp>

#include <sstream>

namespace ceds {

const char* store_name(StoreKind store) {
    return store == StoreKind::Monolithic ? "smt" : "partial";
}

const char* verdict_name(Verdict::Kind verdict) {
    switch (verdict) {
    case Verdict::Kind::Safe: return "safe";
    case Verdict::Kind::AssertFail: return "assert_fail";
    case Verdict::Kind::Exhausted: return "exhausted";
    }
    return "?";
}

int exit_code_for(Verdict::Kind verdict) {
    switch (verdict) {
    case Verdict::Kind::Safe: return 0;
    case Verdict::Kind::AssertFail: return 1;
    case Verdict::Kind::Exhausted: return 2;
    }
    return 4;
}

RunReport make_report(const std::string& program_path, const ExploreConfig& cfg,
                      const ExploreResult& result) {
    RunReport r;
    r.program = program_path;
    r.store = cfg.store;
    r.cache_enabled = cfg.cache_enabled;
    r.backend = cfg.backend.kind == BackendConfig::Kind::Enumeration ? "enum" : "smtlib";
    r.verdict = result.verdict.kind;
    r.ledger = result.ledger;
    if (cfg.cache_enabled) {
        r.cache = result.cache;
        r.cache_entries = result.cache_entries;
    }
    return r;
}

std::string emit_report(const RunReport& r, ReportFormat format) {
    if (!r.ledger.conserved())
        throw InvariantError("ledger conservation violated: " +
                             std::to_string(r.ledger.equal_checks) + " equal checks vs " +
                             std::to_string(r.ledger.syntactic_equal) + " + " +
                             std::to_string(r.ledger.cache_hits) + " + " +
                             std::to_string(r.ledger.solver_calls));

    if (format == ReportFormat::Json) {
        nlohmann::ordered_json j;
        j["program"] = r.program;
        j["store"] = store_name(r.store);
        j["cache"] = r.cache_enabled ? "on" : "off";
        j["backend"] = r.backend;
        j["verdict"] = verdict_name(r.verdict);
        j["equal_checks"] = r.ledger.equal_checks;
        j["syntactic_equal"] = r.ledger.syntactic_equal;
        j["cache_hits"] = r.ledger.cache_hits;
        j["solver_calls"] = r.ledger.solver_calls;
        j["emptiness_checks"] = r.ledger.emptiness_checks;
        j["states_generated"] = r.ledger.states_generated;
        j["states_stored"] = r.ledger.states_stored;
        j["wall_time_ms"] = r.ledger.wall_time_ms;
        if (r.cache) {
            j["cache_stats"] = {{"hits", r.cache->hits},
                                {"misses", r.cache->misses},
                                {"entries", r.cache_entries}};
        }
        return j.dump();
    }

    std::ostringstream out;
    out << "program          store    cache  backend  verdict      "
        << "eq-checks  syntactic  cached  solver  emptiness  generated  stored  ms\n";
    out << r.program << "  " << store_name(r.store) << "  " << (r.cache_enabled ? "on" : "off")
        << "  " << r.backend << "  " << verdict_name(r.verdict) << "  "
        << r.ledger.equal_checks << "  " << r.ledger.syntactic_equal << "  "
        << r.ledger.cache_hits << "  " << r.ledger.solver_calls << "  "
        << r.ledger.emptiness_checks << "  " << r.ledger.states_generated << "  "
        << r.ledger.states_stored << "  " << r.ledger.wall_time_ms << "\n";
    return out.str();
}

} // namespace ceds
