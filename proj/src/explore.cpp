#include "ceds/explore.hpp"

#include <chrono>

namespace ceds {

namespace {

struct StoredState {
    MultiState state;
    size_t parent = SIZE_MAX;
    TraceStep step; // how the parent reached this state
};

std::vector<TraceStep> trace_to(const std::vector<StoredState>& stored, size_t idx,
                                const TraceStep& last) {
    std::vector<TraceStep> trace{last};
    while (idx != SIZE_MAX && stored[idx].parent != SIZE_MAX) {
        trace.push_back(stored[idx].step);
        idx = stored[idx].parent;
    }
    std::reverse(trace.begin(), trace.end());
    return trace;
}

} // namespace

ExploreResult explore(const Program& p, const ExploreConfig& cfg, const ExploreHooks& hooks) {
    auto t0 = std::chrono::steady_clock::now();

    std::unique_ptr<SatBackend> backend = make_backend(cfg.backend);
    QueryCache cache;
    PipelineConfig pipe_cfg;
    pipe_cfg.use_cache = cfg.cache_enabled;
    pipe_cfg.revalidate_every = cfg.revalidate_every;
    EqualityPipeline pipeline(*backend, cfg.cache_enabled ? &cache : nullptr, pipe_cfg);
    pipeline.observer = hooks.query_observer;

    std::vector<StoredState> stored;

    ExploreResult result;
    auto finish = [&](Verdict v) {
        result.verdict = std::move(v);
        result.states.reserve(stored.size());
        for (const auto& st : stored)
            result.states.push_back(st.state);
        const PipelineStats& ps = pipeline.stats();
        result.ledger.equal_checks = ps.equal_checks;
        result.ledger.syntactic_equal = ps.syntactic_equal;
        result.ledger.cache_hits = ps.cache_hits;
        result.ledger.solver_calls = ps.solver_calls;
        result.ledger.emptiness_checks = ps.emptiness_checks;
        result.cache = cache.stats();
        result.cache_entries = cache.entries();
        result.ledger.wall_time_ms = static_cast<uint64_t>(
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count());
        return result;
    };

    SeenIndex seen;
    std::deque<size_t> worklist;

    stored.push_back({initial_state(p, cfg.store == StoreKind::Sliced), SIZE_MAX, {}});
    result.ledger.states_stored = 1;
    seen.put(stored[0].state.explicit_key(), 0);
    worklist.push_back(0);

    while (!worklist.empty()) {
        size_t idx;
        if (cfg.order == SearchOrder::BFS) {
            idx = worklist.front();
            worklist.pop_front();
        } else {
            idx = worklist.back();
            worklist.pop_back();
        }
        MultiState state = stored[idx].state;

        for (const auto& [thread, ins] : enabled_steps(p, state)) {
            uint32_t pc = state.control.threads[thread].frames.back().pc;
            std::vector<MultiState> succs = apply_instruction(p, state, thread);
            for (uint32_t si = 0; si < succs.size(); ++si) {
                MultiState& succ = succs[si];
                ++result.ledger.states_generated;
                if (pipeline.is_empty(succ))
                    continue;
                TraceStep step{thread, pc, si};
                if (succ.error)
                    return finish({Verdict::Kind::AssertFail, trace_to(stored, idx, step)});

                bool duplicate = false;
                for (size_t cand : seen.candidates(succ.explicit_key())) {
                    if (pipeline.equal_states(succ, stored[cand].state).result ==
                        CheckOutcome::Result::Equal) {
                        if (hooks.on_dedup)
                            hooks.on_dedup(succ, stored[cand].state);
                        duplicate = true;
                        break;
                    }
                }
                if (duplicate) {
                    ++result.ledger.states_deduplicated;
                    continue;
                }
                if (stored.size() >= cfg.max_states)
                    return finish({Verdict::Kind::Exhausted, {}});
                size_t new_idx = stored.size();
                stored.push_back({std::move(succ), idx, step});
                ++result.ledger.states_stored;
                seen.put(stored[new_idx].state.explicit_key(), new_idx);
                worklist.push_back(new_idx);
            }
        }
    }
    return finish({Verdict::Kind::Safe, {}});
}

MultiState replay_trace(const Program& p, const ExploreConfig& cfg,
                        const std::vector<TraceStep>& trace) {
    MultiState cur = initial_state(p, cfg.store == StoreKind::Sliced);
    for (const TraceStep& step : trace) {
        if (step.thread >= cur.control.threads.size() ||
            cur.control.threads[step.thread].halted())
            throw InvariantError("trace step names a dead thread");
        if (cur.control.threads[step.thread].frames.back().pc != step.instr)
            throw InvariantError("trace step does not match the thread's pc");
        std::vector<MultiState> succs = apply_instruction(p, cur, step.thread);
        if (step.succ >= succs.size())
            throw InvariantError("trace step picks a missing successor");
        cur = succs[step.succ];
    }
    return cur;
}

} // namespace ceds
