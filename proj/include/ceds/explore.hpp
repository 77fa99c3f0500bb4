#ifndef CEDS_EXPLORE_HPP
#define CEDS_EXPLORE_HPP

#include "ceds/eqcheck.hpp"

#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ceds {

enum class StoreKind { Monolithic, Sliced }; // smt store / partial store
enum class SearchOrder { BFS, DFS };

struct ExploreConfig {
    StoreKind store = StoreKind::Sliced;
    bool cache_enabled = true;
    BackendConfig backend;
    size_t max_states = 1'000'000;
    SearchOrder order = SearchOrder::BFS;
    uint32_t revalidate_every = 0; // forwarded to the pipeline (test hook)
};

struct TraceStep {
    uint32_t thread = 0;
    uint32_t instr = 0; // pc executed
    uint32_t succ = 0;  // which successor of that instruction was taken
};

struct Verdict {
    enum class Kind { Safe, AssertFail, Exhausted };
    Kind kind = Kind::Safe;
    std::vector<TraceStep> trace; // AssertFail only
};

struct StatsLedger {
    uint64_t equal_checks = 0;
    uint64_t syntactic_equal = 0;
    uint64_t cache_hits = 0;
    uint64_t solver_calls = 0;
    uint64_t emptiness_checks = 0;
    uint64_t states_generated = 0;
    uint64_t states_stored = 0;
    uint64_t states_deduplicated = 0;
    uint64_t wall_time_ms = 0;

    bool conserved() const {
        return equal_checks == syntactic_equal + cache_hits + solver_calls;
    }
};

struct ExploreResult {
    Verdict verdict;
    StatsLedger ledger;
    CacheStats cache;
    uint64_t cache_entries = 0;
    std::vector<MultiState> states; // stored states in insertion order
};

// Dedup store keyed by the explicit part: candidates are exactly the stored
// states with an identical control part and memory shape.
class SeenIndex {
public:
    void put(const std::string& explicit_key, size_t state_idx) {
        buckets_[explicit_key].push_back(state_idx);
    }
    const std::vector<size_t>& candidates(const std::string& explicit_key) const {
        auto it = buckets_.find(explicit_key);
        return it == buckets_.end() ? empty_ : it->second;
    }

private:
    std::unordered_map<std::string, std::vector<size_t>> buckets_;
    inline static const std::vector<size_t> empty_{};
};

struct ExploreHooks {
    std::function<void(const QueryEvent&)> query_observer;
    // dropped successor and the stored state it merged into
    std::function<void(const MultiState& dropped, const MultiState& kept)> on_dedup;
};

// Worklist reachability: expand every enabled step of every popped state,
// filter empty successors, report the first reachable error state, and drop
// successors equal to an already stored state at the same explicit part.
ExploreResult explore(const Program& p, const ExploreConfig& cfg, const ExploreHooks& hooks = {});

// Re-drive a counterexample trace from the initial state; returns the final
// (error) state. Throws InvariantError when the trace does not replay.
MultiState replay_trace(const Program& p, const ExploreConfig& cfg,
                        const std::vector<TraceStep>& trace);

} // namespace ceds

#endif
