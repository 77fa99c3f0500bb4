#ifndef CEDS_EQCHECK_HPP
#define CEDS_EQCHECK_HPP

#include "ceds/cache.hpp"
#include "ceds/solver.hpp"
#include "ceds/state.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ceds {

// A canonicalized one-sided inclusion refutation: satisfiable exactly when
// some valuation of the left state's variables has no counterpart on the
// right. The unit of caching and solving.
struct EqualityQuery {
    Conjunction left;                               // Left-tagged
    Conjunction right;                              // renamed apart to Right
    std::vector<std::pair<VarId, VarId>> diff_vars; // (x^p, y^p), one per in-scope variable
    std::vector<std::pair<VarId, Sort>> diff_sorts; // widths for the pairs above (left ids)
    std::string canonical;                          // key over (left, right, diff_vars)

    SatQuery sat_query() const;
    Term body() const { return sat_query().to_term(); }
};

// Whole-state inclusion query between monolithic states with the same
// explicit part. Untouched in-scope variables participate through vacuous
// equalities on both sides.
EqualityQuery build_notsubseteq(const MultiState& s1, const MultiState& s2);

// Per-slice inclusion query over matched component i; reversed swaps the
// direction to right-not-in-left.
EqualityQuery build_notsubseteq_slice(const MatchedParts& m, size_t i, bool reversed = false);

struct CheckOutcome {
    enum class Result { Equal, NotEqual, Empty, NonEmpty };
    enum class Method { Syntactic, Cache, Solver };
    Result result;
    Method decided_by = Method::Syntactic;
};

// Equality-pipeline counters; every counted check lands in exactly one of the
// three buckets, so equal_checks == syntactic_equal + cache_hits + solver_calls.
struct PipelineStats {
    uint64_t equal_checks = 0;
    uint64_t syntactic_equal = 0;
    uint64_t cache_hits = 0;
    uint64_t solver_calls = 0;
    uint64_t emptiness_checks = 0;

    bool conserved() const {
        return equal_checks == syntactic_equal + cache_hits + solver_calls;
    }
};

struct PipelineConfig {
    bool use_syntactic = true;
    bool use_cache = true;
    // test hook: re-run the backend on every Nth cache hit and cross-check
    uint32_t revalidate_every = 0;
};

// One equality-pipeline decision, for test observers.
struct QueryEvent {
    std::vector<ProgVar> vars; // in-scope variables of the compared component
    CheckOutcome::Method method;
};

// The layered decision procedure: syntactic fast path, then verdict cache,
// then satisfiability backend. Owns the ledger; serializes access to one
// backend and one cache.
class EqualityPipeline {
public:
    EqualityPipeline(SatBackend& backend, QueryCache* cache, PipelineConfig cfg = {})
        : backend_(backend), cache_(cache), cfg_(cfg) {}

    // Monolithic: one satisfiability query; sliced: one per part, satisfiable
    // parts short-circuit nothing but an unsatisfiable one decides emptiness.
    bool is_empty(const MultiState& s);

    // Match, then per part and direction: syntactic skip, cache, solver.
    // NotEqual on the first satisfiable query, Equal when all are
    // unsatisfiable. Throws ShapeMismatch on different explicit parts and
    // SolverFailure on an undecided backend answer.
    CheckOutcome equal_states(const MultiState& a, const MultiState& b);

    const PipelineStats& stats() const { return stats_; }

    std::function<void(const QueryEvent&)> observer;

private:
    SatResult decide(QueryKind kind, const std::string& canonical, const SatQuery& q,
                     bool& from_cache);

    SatBackend& backend_;
    QueryCache* cache_;
    PipelineConfig cfg_;
    PipelineStats stats_;
    uint64_t hit_counter_ = 0;
};

} // namespace ceds

#endif
