#include "ceds/eqcheck.hpp"

#include <algorithm>

namespace ceds {

namespace {

void put_u32(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v >> 24));
    out.push_back(static_cast<char>(v >> 16));
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v));
}

void put_var(std::string& out, const VarId& v) {
    out.push_back(static_cast<char>(v.side));
    put_u32(out, v.segment);
    put_u32(out, v.position);
    put_u32(out, v.generation);
}

EqualityQuery from_conjunctions(const Conjunction& left_raw, const Conjunction& right_raw,
                                const std::vector<DiffVar>& diffs, bool reversed) {
    EqualityQuery q;
    q.left = reversed ? right_raw : left_raw;
    std::vector<Term> retagged;
    const Conjunction& right_side = reversed ? left_raw : right_raw;
    retagged.reserve(right_side.size());
    for (const auto& cl : right_side.clauses())
        retagged.push_back(retag_side(cl, Side::Right));
    q.right = Conjunction(std::move(retagged));

    for (const auto& d : diffs) {
        uint32_t gen_l = reversed ? d.gen_right : d.gen_left;
        uint32_t gen_r = reversed ? d.gen_left : d.gen_right;
        VarId x{d.pv.segment, d.pv.position, gen_l, Side::Left};
        VarId y{d.pv.segment, d.pv.position, gen_r, Side::Right};
        q.diff_vars.emplace_back(x, y);
        q.diff_sorts.emplace_back(x, Sort::bitvec(d.width));
    }

    const std::string& lk = q.left.canonical_key();
    const std::string& rk = q.right.canonical_key();
    q.canonical.reserve(lk.size() + rk.size() + q.diff_vars.size() * 32 + 16);
    put_u32(q.canonical, static_cast<uint32_t>(lk.size()));
    q.canonical += lk;
    put_u32(q.canonical, static_cast<uint32_t>(rk.size()));
    q.canonical += rk;
    put_u32(q.canonical, static_cast<uint32_t>(q.diff_vars.size()));
    for (size_t i = 0; i < q.diff_vars.size(); ++i) {
        put_var(q.canonical, q.diff_vars[i].first);
        put_var(q.canonical, q.diff_vars[i].second);
        put_u32(q.canonical, q.diff_sorts[i].second.width);
    }
    return q;
}

// state's conjunction plus vacuous equalities for every untouched in-scope
// variable, with the diff list over the whole scope
std::pair<Conjunction, std::vector<DiffVar>> materialized_monolithic(const MultiState& s,
                                                                     const MultiState& other) {
    std::vector<Term> clauses;
    for (const auto& part : s.sym.parts())
        for (const auto& cl : part->clauses())
            clauses.push_back(cl);
    std::vector<DiffVar> diffs;
    for (const auto& [pv, width] : s.scope()) {
        if (s.gens.last(pv) == 0)
            clauses.push_back(vacuous_equality(pv, 1, width));
        DiffVar d;
        d.pv = pv;
        d.width = width;
        d.gen_left = std::max(s.gens.last(pv), 1u);
        d.gen_right = std::max(other.gens.last(pv), 1u);
        diffs.push_back(d);
    }
    return {Conjunction(std::move(clauses)), std::move(diffs)};
}

} // namespace

SatQuery EqualityQuery::sat_query() const {
    SatQuery q;
    q.prefix = left.clauses();
    q.has_forall = true;
    q.hyp = right.clauses();
    q.bound = right.free_vars();
    for (size_t i = 0; i < diff_vars.size(); ++i) {
        Sort s = diff_sorts[i].second;
        Term x = mk_var(diff_vars[i].first, s);
        Term y = mk_var(diff_vars[i].second, s);
        q.diffs.emplace_back(x, y);
        q.bound = merge_free_vars(q.bound, {{diff_vars[i].second, s}});
    }
    return q;
}

EqualityQuery build_notsubseteq(const MultiState& s1, const MultiState& s2) {
    if (s1.explicit_key() != s2.explicit_key())
        throw ShapeMismatch("inclusion query requires identical explicit parts");
    auto [left, diffs] = materialized_monolithic(s1, s2);
    auto [right, diffs_unused] = materialized_monolithic(s2, s1);
    return from_conjunctions(left, right, diffs, false);
}

EqualityQuery build_notsubseteq_slice(const MatchedParts& m, size_t i, bool reversed) {
    if (i >= m.left.size())
        throw NotMatched("slice index out of range");
    // alignment sanity: the paired parts must cover each compared variable
    auto covers = [](const Conjunction& c, ProgVar pv) {
        std::vector<ProgVar> pvs = prog_vars(c);
        return std::binary_search(pvs.begin(), pvs.end(), pv);
    };
    for (const auto& d : m.diff_vars[i])
        if (!covers(*m.left[i], d.pv) || !covers(*m.right[i], d.pv))
            throw NotMatched("paired parts do not cover the compared variable set");
    return from_conjunctions(*m.left[i], *m.right[i], m.diff_vars[i], reversed);
}

SatResult EqualityPipeline::decide(QueryKind kind, const std::string& canonical,
                                   const SatQuery& q, bool& from_cache) {
    from_cache = false;
    if (cfg_.use_cache && cache_) {
        auto hit = cache_->lookup(kind, canonical);
        if (hit) {
            from_cache = true;
            if (cfg_.revalidate_every && ++hit_counter_ % cfg_.revalidate_every == 0) {
                SatResult again = backend_.check(q);
                if (again.kind != *hit)
                    throw InvariantError("cached verdict diverged from the backend");
            }
            return SatResult{*hit, {}};
        }
    }
    SatResult r = backend_.check(q);
    if (!r.decided())
        throw SolverFailure("backend could not decide a query: " + r.message);
    if (cfg_.use_cache && cache_)
        cache_->insert(kind, canonical, r.kind);
    return r;
}

bool EqualityPipeline::is_empty(const MultiState& s) {
    for (const auto& part : s.sym.parts()) {
        if (part->empty())
            continue; // tautological part, trivially satisfiable
        ++stats_.emptiness_checks;
        bool from_cache = false;
        SatResult r = decide(QueryKind::Emptiness, part->canonical_key(), SatQuery::of(*part),
                             from_cache);
        if (r.is_unsat())
            return true; // one empty factor empties the whole product
    }
    return false;
}

CheckOutcome EqualityPipeline::equal_states(const MultiState& a, const MultiState& b) {
    if (a.explicit_key() != b.explicit_key())
        throw ShapeMismatch("equality requires identical explicit parts");

    MatchedParts m;
    if (!a.sym.sliced() && !b.sym.sliced()) {
        auto [left, diffs] = materialized_monolithic(a, b);
        auto [right, diffs_unused] = materialized_monolithic(b, a);
        m.left = {std::make_shared<Conjunction>(left)};
        m.right = {std::make_shared<Conjunction>(right)};
        m.diff_vars = {std::move(diffs)};
    } else {
        m = match_states(a.sym, a.gens, a.scope(), b.sym, b.gens, b.scope());
    }

    CheckOutcome::Method worst = CheckOutcome::Method::Syntactic;
    auto notify = [&](const std::vector<DiffVar>& diffs, CheckOutcome::Method method) {
        if (method > worst)
            worst = method;
        if (observer) {
            QueryEvent ev;
            for (const auto& d : diffs)
                ev.vars.push_back(d.pv);
            ev.method = method;
            observer(ev);
        }
    };

    for (size_t i = 0; i < m.left.size(); ++i) {
        if (m.diff_vars[i].empty())
            continue; // dead baggage distinguishes nothing between non-empty states
        if (cfg_.use_syntactic &&
            m.left[i]->canonical_key() == m.right[i]->canonical_key()) {
            ++stats_.equal_checks;
            ++stats_.syntactic_equal;
            notify(m.diff_vars[i], CheckOutcome::Method::Syntactic);
            continue;
        }
        for (int dir = 0; dir < 2; ++dir) {
            EqualityQuery q = build_notsubseteq_slice(m, i, dir == 1);
            bool from_cache = false;
            SatResult r = decide(QueryKind::NotSubseteq, q.canonical, q.sat_query(), from_cache);
            ++stats_.equal_checks;
            if (from_cache) {
                ++stats_.cache_hits;
                notify(m.diff_vars[i], CheckOutcome::Method::Cache);
            } else {
                ++stats_.solver_calls;
                notify(m.diff_vars[i], CheckOutcome::Method::Solver);
            }
            if (r.is_sat())
                return {CheckOutcome::Result::NotEqual, worst};
        }
    }
    return {CheckOutcome::Result::Equal, worst};
}

} // namespace ceds
