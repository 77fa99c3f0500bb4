#ifndef CEDS_TESTS_SUPPORT_HPP
#define CEDS_TESTS_SUPPORT_HPP

#include "ceds/bv.hpp"
#include "ceds/solver.hpp"
#include "ceds/state.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <vector>

namespace ceds::test {

// Dumb-as-possible satisfiability oracle: odometer over every free variable,
// evaluate() per assignment. Validates the pruning backend on small inputs.
inline bool naive_sat(const Term& t) {
    const auto& vars = t->free_vars();
    Assignment mu;
    for (const auto& [v, s] : vars)
        mu.set(v, s, 0);
    while (true) {
        if (evaluate(t, mu))
            return true;
        size_t i = 0;
        for (; i < vars.size(); ++i) {
            uint64_t limit = width_mask(vars[i].second.bits());
            uint64_t cur = mu.get(vars[i].first);
            if (cur < limit) {
                mu.set(vars[i].first, vars[i].second, cur + 1);
                break;
            }
            mu.set(vars[i].first, vars[i].second, 0);
        }
        if (i == vars.size())
            return false;
    }
}

// All satisfying assignments of a conjunction projected onto the given
// variables, as sorted value tuples. The semantic ground truth for state
// equality at small widths.
inline std::set<std::vector<uint64_t>> solution_set(const Conjunction& c,
                                                    const std::vector<BoundVar>& projection) {
    std::set<std::vector<uint64_t>> out;
    std::vector<BoundVar> vars = c.free_vars();
    for (const auto& p : projection)
        vars = merge_free_vars(vars, {p});
    Term t = c.term();
    Assignment mu;
    for (const auto& [v, s] : vars)
        mu.set(v, s, 0);
    while (true) {
        if (evaluate(t, mu)) {
            std::vector<uint64_t> tuple;
            tuple.reserve(projection.size());
            for (const auto& [v, s] : projection)
                tuple.push_back(mu.get(v));
            out.insert(std::move(tuple));
        }
        size_t i = 0;
        for (; i < vars.size(); ++i) {
            uint64_t limit = width_mask(vars[i].second.bits());
            uint64_t cur = mu.get(vars[i].first);
            if (cur < limit) {
                mu.set(vars[i].first, vars[i].second, cur + 1);
                break;
            }
            mu.set(vars[i].first, vars[i].second, 0);
        }
        if (i == vars.size())
            return out;
    }
}

// Random well-sorted terms over a fixed variable pool.
class TermGen {
public:
    TermGen(uint64_t seed, std::vector<BoundVar> pool) : rng_(seed), pool_(std::move(pool)) {}

    std::mt19937_64& rng() { return rng_; }

    uint64_t pick(uint64_t n) { return rng_() % n; }

    Term bitvec_term(uint32_t width, int depth) {
        std::vector<const BoundVar*> fitting;
        for (const auto& v : pool_)
            if (v.second.width == width)
                fitting.push_back(&v);
        if (depth <= 0 || pick(4) == 0) {
            if (!fitting.empty() && pick(3) != 0) {
                const BoundVar* v = fitting[pick(fitting.size())];
                return mk_var(v->first, v->second);
            }
            return mk_const(rng_() & width_mask(width), width);
        }
        Term a = bitvec_term(width, depth - 1);
        Term b = bitvec_term(width, depth - 1);
        switch (pick(8)) {
        case 0: return mk_add(a, b);
        case 1: return mk_mul(a, b);
        case 2: return mk_udiv(a, b);
        case 3: return mk_bvand(a, b);
        case 4: return mk_bvor(a, b);
        case 5: return mk_bvxor(a, b);
        case 6: return mk_shl(a, b);
        default: return mk_lshr(a, b);
        }
    }

    Term clause(int depth = 2) {
        uint32_t width = pool_.empty() ? 2 : pool_[pick(pool_.size())].second.width;
        Term a = bitvec_term(width, depth);
        Term b = bitvec_term(width, depth);
        Term cmp;
        switch (pick(3)) {
        case 0: cmp = mk_eq(a, b); break;
        case 1: cmp = mk_ule(a, b); break;
        default: cmp = mk_sle(a, b); break;
        }
        if (pick(4) == 0)
            cmp = mk_not(cmp);
        return cmp;
    }

    Conjunction conjunction(size_t n_clauses, int depth = 2) {
        std::vector<Term> clauses;
        for (size_t i = 0; i < n_clauses; ++i)
            clauses.push_back(clause(depth));
        return Conjunction(std::move(clauses));
    }

private:
    std::mt19937_64 rng_;
    std::vector<BoundVar> pool_;
};

inline std::vector<BoundVar> make_pool(uint32_t count, uint32_t seg, uint32_t width,
                                       uint32_t generations = 1) {
    std::vector<BoundVar> pool;
    for (uint32_t p = 0; p < count; ++p)
        for (uint32_t g = 1; g <= generations; ++g)
            pool.push_back({VarId{seg, p, g, Side::Left}, Sort::bitvec(width)});
    return pool;
}

// Two random non-empty states over one shared memory shape, carried both as
// monolithic and as sliced symbolic parts. The raw material for the
// decomposition and full-pipeline oracles.
struct StatePair {
    MultiState mono_a, mono_b, sliced_a, sliced_b;
    uint32_t width = 0;
    uint32_t n_vars = 0;
};

inline MultiState assemble_state(uint32_t n_vars, uint32_t width,
                                 const std::vector<Term>& clauses, bool sliced) {
    MultiState st;
    Segment seg;
    seg.id = 0;
    for (uint32_t i = 0; i < n_vars; ++i)
        seg.vars.push_back({"v" + std::to_string(i), width, Mark::Symbolic, 0});
    st.shape.add_segment(seg);
    ThreadStack th;
    th.frames.push_back(Frame{0, 0, 0, -1});
    st.control.threads.push_back(th);
    st.next_segment = 1;
    st.sym = sliced ? SymbolicPart::sliced_top() : SymbolicPart::monolithic_top();
    for (const auto& cl : clauses)
        st.sym = st.sym.conjoined(cl);
    for (const auto& part : st.sym.parts())
        for (const auto& [v, sort] : part->free_vars()) {
            ProgVar pv = prog_var_of(v);
            if (st.gens.last(pv) < v.generation)
                st.gens.set(pv, v.generation);
        }
    return st;
}

// nullopt when a sampled side is empty (caller picks another seed)
inline std::optional<StatePair> random_state_pair(uint64_t seed) {
    std::mt19937_64 rng(seed);
    uint32_t width = 1 + rng() % 3;
    uint32_t n_vars = 2 + rng() % 3;
    uint32_t generations = width <= 2 ? 2 : 1;
    while (n_vars * generations * width > 10)
        n_vars > 2 ? --n_vars : --generations;

    auto clauses_for = [&](uint64_t salt) {
        TermGen gen(seed * 977 + salt, make_pool(n_vars, 0, width, generations));
        size_t n = 2 + gen.pick(4);
        std::vector<Term> out;
        for (size_t i = 0; i < n; ++i)
            out.push_back(gen.clause(1));
        return out;
    };
    std::vector<Term> ca = clauses_for(1);
    std::vector<Term> cb = clauses_for(2);

    EnumerationBackend be(30);
    if (!be.check(SatQuery{ca, false, {}, {}, {}}).is_sat())
        return std::nullopt;
    if (!be.check(SatQuery{cb, false, {}, {}, {}}).is_sat())
        return std::nullopt;

    StatePair sp;
    sp.width = width;
    sp.n_vars = n_vars;
    sp.mono_a = assemble_state(n_vars, width, ca, false);
    sp.mono_b = assemble_state(n_vars, width, cb, false);
    sp.sliced_a = assemble_state(n_vars, width, ca, true);
    sp.sliced_b = assemble_state(n_vars, width, cb, true);
    return sp;
}

// Random equality-shaped quantified query: left conjunction over one pool, a
// universally bound right conjunction over a second pool, disequalities
// pairing the pools positionally.
inline SatQuery random_equality_query(uint64_t seed) {
    std::mt19937_64 rng(seed);
    uint32_t width = 1 + rng() % 3;
    uint32_t n_vars = 2 + rng() % 2;
    TermGen lgen(seed * 2 + 1, make_pool(n_vars, 0, width));
    auto rpool = make_pool(n_vars, 0, width);
    for (auto& v : rpool)
        v.first.side = Side::Right;
    TermGen rgen(seed * 2 + 2, rpool);

    SatQuery q;
    q.prefix = lgen.conjunction(1 + lgen.pick(3), 1).clauses();
    Conjunction right = rgen.conjunction(1 + rgen.pick(3), 1);
    q.has_forall = true;
    q.hyp = right.clauses();
    q.bound = right.free_vars();
    for (uint32_t p = 0; p < n_vars; ++p) {
        if (lgen.pick(2) == 0)
            continue;
        VarId xl{0, p, 1, Side::Left};
        VarId yr{0, p, 1, Side::Right};
        q.diffs.emplace_back(mk_var(xl, Sort::bitvec(width)), mk_var(yr, Sort::bitvec(width)));
        q.bound = merge_free_vars(q.bound, {{yr, Sort::bitvec(width)}});
    }
    return q;
}

// Solution set of a state projected onto the last generations of its in-scope
// variables: the exact semantic content at small widths.
inline std::set<std::vector<uint64_t>> state_solutions(const MultiState& s) {
    std::vector<BoundVar> projection;
    for (const auto& [pv, width] : s.scope()) {
        uint32_t g = std::max(s.gens.last(pv), 1u);
        projection.push_back({VarId{pv.segment, pv.position, g, Side::Left},
                              Sort::bitvec(width)});
    }
    return solution_set(s.sym.to_monolithic(), projection);
}

} // namespace ceds::test

#endif
