#ifndef CEDS_REPORT_HPP
#define CEDS_REPORT_HPP

#include "ceds/explore.hpp"

#include <optional>
#include <string>

namespace ceds {

// One verification run flattened for output. The JSON key set is fixed:
// program, store, cache, backend, verdict, equal_checks, syntactic_equal,
// cache_hits, solver_calls, emptiness_checks, states_generated, states_stored,
// wall_time_ms, plus cache_stats {hits, misses, entries} when caching is on.
struct RunReport {
    std::string program;
    StoreKind store = StoreKind::Sliced;
    bool cache_enabled = true;
    std::string backend; // "smtlib" or "enum"
    Verdict::Kind verdict = Verdict::Kind::Safe;
    StatsLedger ledger;
    std::optional<CacheStats> cache;
    uint64_t cache_entries = 0;
};

RunReport make_report(const std::string& program_path, const ExploreConfig& cfg,
                      const ExploreResult& result);

enum class ReportFormat { Json, Text };

// Refuses to emit a ledger that violates equal-check conservation.
std::string emit_report(const RunReport& r, ReportFormat format);

// 0 safe, 1 assertion failure, 2 exhausted
int exit_code_for(Verdict::Kind verdict);

const char* store_name(StoreKind store);
const char* verdict_name(Verdict::Kind verdict);

} // namespace ceds

#endif
