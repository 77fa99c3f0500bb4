#include "ceds/state.hpp"

#include <algorithm>
#include <set>

namespace ceds {

// --- memory shape ------------------------------------------------------------------

const Segment* MemoryShape::find(uint32_t id) const {
    for (const auto& s : segments)
        if (s.id == id)
            return &s;
    return nullptr;
}

bool MemoryShape::has(ProgVar pv) const {
    const Segment* s = find(pv.segment);
    return s && pv.position < s->vars.size();
}

const VariableDescriptor& MemoryShape::var(ProgVar pv) const {
    const Segment* s = find(pv.segment);
    if (!s || pv.position >= s->vars.size())
        throw InvariantError("variable (" + std::to_string(pv.segment) + "," +
                             std::to_string(pv.position) + ") is not in the memory shape");
    return s->vars[pv.position];
}

void MemoryShape::add_segment(Segment s) {
    auto it = std::lower_bound(segments.begin(), segments.end(), s.id,
                               [](const Segment& a, uint32_t id) { return a.id < id; });
    segments.insert(it, std::move(s));
}

void MemoryShape::drop_segment(uint32_t id) {
    for (auto it = segments.begin(); it != segments.end(); ++it)
        if (it->id == id) {
            segments.erase(it);
            return;
        }
}

// --- symbolic parts ------------------------------------------------------------------

std::vector<ProgVar> prog_vars(const Conjunction& c) {
    std::vector<ProgVar> out;
    for (const auto& [v, s] : c.free_vars()) {
        ProgVar pv = prog_var_of(v);
        if (out.empty() || out.back() != pv)
            out.push_back(pv);
    }
    return out;
}

namespace {

std::vector<ProgVar> prog_vars_of_term(const Term& t) {
    std::vector<ProgVar> out;
    for (const auto& [v, s] : t->free_vars()) {
        ProgVar pv = prog_var_of(v);
        if (out.empty() || out.back() != pv)
            out.push_back(pv);
    }
    return out;
}

bool intersects(const std::vector<ProgVar>& a, const std::vector<ProgVar>& b) {
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j])
            ++i;
        else if (b[j] < a[i])
            ++j;
        else
            return true;
    }
    return false;
}

bool is_vacuous_equality(const Term& t, VarId* var_out = nullptr) {
    if (t->op() != Op::Eq)
        return false;
    const auto& k = t->kids();
    if (k[0]->op() != Op::Var || k[1]->op() != Op::Var)
        return false;
    if (!(k[0]->var() == k[1]->var()))
        return false;
    if (var_out)
        *var_out = k[0]->var();
    return true;
}

// remove vacuous self-equalities superseded by a clause over these variables
void drop_superseded(std::vector<Term>& clauses, const std::vector<ProgVar>& new_pvs) {
    std::erase_if(clauses, [&](const Term& t) {
        VarId v;
        if (!is_vacuous_equality(t, &v))
            return false;
        return std::binary_search(new_pvs.begin(), new_pvs.end(), prog_var_of(v));
    });
}

} // namespace

Term vacuous_equality(ProgVar pv, uint32_t gen, uint32_t width) {
    Term v = mk_var(VarId{pv.segment, pv.position, gen, Side::Left}, Sort::bitvec(width));
    return mk_eq(v, v);
}

std::vector<Conjunction> slice(const Conjunction& c) {
    const auto& clauses = c.clauses();
    size_t n = clauses.size();
    std::vector<std::vector<ProgVar>> pvs(n);
    for (size_t i = 0; i < n; ++i)
        pvs[i] = prog_vars_of_term(clauses[i]);

    // union-find over clause indices
    std::vector<size_t> parent(n);
    for (size_t i = 0; i < n; ++i)
        parent[i] = i;
    auto find = [&](size_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    std::map<ProgVar, size_t> seen;
    for (size_t i = 0; i < n; ++i)
        for (const ProgVar& pv : pvs[i]) {
            auto [it, fresh] = seen.try_emplace(pv, i);
            if (!fresh) {
                size_t r1 = find(i);
                size_t r2 = find(it->second);
                if (r1 != r2)
                    parent[r1] = r2;
            }
        }

    std::map<size_t, size_t> component_index; // root -> position in the output
    std::vector<std::vector<Term>> grouped;
    for (size_t i = 0; i < n; ++i) {
        size_t root = find(i);
        auto [it, fresh] = component_index.try_emplace(root, grouped.size());
        if (fresh)
            grouped.emplace_back();
        grouped[it->second].push_back(clauses[i]);
    }
    std::vector<Conjunction> out;
    out.reserve(grouped.size());
    for (auto& g : grouped)
        out.emplace_back(std::move(g));
    return out;
}

SymbolicPart SymbolicPart::monolithic_top() {
    SymbolicPart sp;
    sp.sliced_ = false;
    sp.parts_ = {std::make_shared<Conjunction>()};
    return sp;
}

SymbolicPart SymbolicPart::sliced_top() {
    SymbolicPart sp;
    sp.sliced_ = true;
    return sp;
}

SymbolicPart SymbolicPart::sliced_from_parts(std::vector<ConjunctionPtr> parts) {
    SymbolicPart sp;
    sp.sliced_ = true;
    sp.parts_ = std::move(parts);
    for (size_t i = 0; i < sp.parts_.size(); ++i)
        for (size_t j = i + 1; j < sp.parts_.size(); ++j)
            if (!independent(*sp.parts_[i], *sp.parts_[j]))
                throw InvariantError("ad-hoc sliced parts share a formula variable");
    return sp;
}

SymbolicPart SymbolicPart::conjoined(const Term& clause) const {
    std::vector<ProgVar> cpv = prog_vars_of_term(clause);
    SymbolicPart out;
    out.sliced_ = sliced_;

    if (!sliced_) {
        std::vector<Term> clauses = parts_[0]->clauses();
        drop_superseded(clauses, cpv);
        clauses.push_back(clause);
        out.parts_ = {std::make_shared<Conjunction>(std::move(clauses))};
        return out;
    }

    std::vector<Term> merged;
    size_t first_merged = parts_.size();
    for (size_t i = 0; i < parts_.size(); ++i) {
        if (intersects(prog_vars(*parts_[i]), cpv)) {
            if (first_merged == parts_.size())
                first_merged = i;
            for (const auto& cl : parts_[i]->clauses())
                merged.push_back(cl);
        }
    }
    if (first_merged == parts_.size()) {
        // independent of everything stored: a fresh part at the end
        out.parts_ = parts_;
        out.parts_.push_back(std::make_shared<Conjunction>(std::vector<Term>{clause}));
        return out;
    }
    drop_superseded(merged, cpv);
    merged.push_back(clause);
    ConjunctionPtr merged_part = std::make_shared<Conjunction>(std::move(merged));
    for (size_t i = 0; i < parts_.size(); ++i) {
        if (i == first_merged)
            out.parts_.push_back(merged_part);
        else if (!intersects(prog_vars(*parts_[i]), cpv))
            out.parts_.push_back(parts_[i]);
    }
    return out;
}

Conjunction SymbolicPart::to_monolithic() const {
    std::vector<Term> clauses;
    for (const auto& p : parts_)
        for (const auto& cl : p->clauses())
            clauses.push_back(cl);
    return Conjunction(std::move(clauses));
}

int SymbolicPart::owner_of(ProgVar pv) const {
    for (size_t i = 0; i < parts_.size(); ++i) {
        std::vector<ProgVar> pvs = prog_vars(*parts_[i]);
        if (std::binary_search(pvs.begin(), pvs.end(), pv))
            return static_cast<int>(i);
    }
    return -1;
}

void SymbolicPart::check_invariants() const {
    if (!sliced_) {
        if (parts_.size() != 1)
            throw InvariantError("monolithic symbolic part must hold exactly one conjunction");
        return;
    }
    for (size_t i = 0; i < parts_.size(); ++i) {
        if (parts_[i]->empty())
            throw InvariantError("sliced part " + std::to_string(i) + " is empty");
        for (size_t j = i + 1; j < parts_.size(); ++j) {
            if (!independent(*parts_[i], *parts_[j]))
                throw InvariantError("sliced parts share a formula variable");
            if (intersects(prog_vars(*parts_[i]), prog_vars(*parts_[j])))
                throw InvariantError("sliced parts share a program variable");
        }
    }
}

// --- multi-states -------------------------------------------------------------------

namespace {

void put_u32(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v >> 24));
    out.push_back(static_cast<char>(v >> 16));
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v));
}

void put_u64(std::string& out, uint64_t v) {
    put_u32(out, static_cast<uint32_t>(v >> 32));
    put_u32(out, static_cast<uint32_t>(v));
}

} // namespace

std::string MultiState::explicit_key() const {
    std::string key;
    put_u32(key, static_cast<uint32_t>(control.threads.size()));
    for (const auto& th : control.threads) {
        put_u32(key, static_cast<uint32_t>(th.frames.size()));
        for (const auto& fr : th.frames) {
            put_u32(key, fr.function);
            put_u32(key, fr.pc);
            put_u32(key, fr.segment);
            put_u32(key, static_cast<uint32_t>(fr.ret_dst));
        }
    }
    put_u32(key, static_cast<uint32_t>(shape.segments.size()));
    for (const auto& seg : shape.segments) {
        put_u32(key, seg.id);
        put_u32(key, static_cast<uint32_t>(seg.vars.size()));
        for (const auto& v : seg.vars) {
            put_u32(key, v.width);
            key.push_back(v.mark == Mark::Explicit ? 1 : 0);
            put_u64(key, v.mark == Mark::Explicit ? v.explicit_value : 0);
        }
    }
    key.push_back(error ? 1 : 0);
    return key;
}

std::vector<std::pair<ProgVar, uint32_t>> MultiState::scope() const {
    std::vector<std::pair<ProgVar, uint32_t>> out;
    for (const auto& seg : shape.segments)
        for (uint32_t p = 0; p < seg.vars.size(); ++p)
            if (seg.vars[p].mark == Mark::Symbolic)
                out.emplace_back(ProgVar{seg.id, p}, seg.vars[p].width);
    return out;
}

namespace {

Segment segment_for(const Function& fn, uint32_t id) {
    Segment seg;
    seg.id = id;
    seg.vars.reserve(fn.vars.size());
    for (const auto& v : fn.vars)
        seg.vars.push_back({v.name, v.width, Mark::Symbolic, 0});
    return seg;
}

} // namespace

MultiState initial_state(const Program& p, bool sliced_store) {
    MultiState s;
    s.next_segment = 0;
    uint32_t seg = s.next_segment++;
    s.shape.add_segment(segment_for(p.main(), seg));
    ThreadStack main_thread;
    main_thread.frames.push_back(Frame{static_cast<uint32_t>(p.entry), 0, seg, -1});
    s.control.threads.push_back(std::move(main_thread));
    s.sym = sliced_store ? SymbolicPart::sliced_top() : SymbolicPart::monolithic_top();
    return s;
}

std::vector<std::pair<uint32_t, const Instr*>> enabled_steps(const Program& p,
                                                             const MultiState& s) {
    std::vector<std::pair<uint32_t, const Instr*>> out;
    for (uint32_t t = 0; t < s.control.threads.size(); ++t) {
        const ThreadStack& th = s.control.threads[t];
        if (th.halted())
            continue;
        const Frame& fr = th.frames.back();
        const Instr& ins = p.functions[fr.function].body[fr.pc];
        if (ins.kind == Instr::Kind::Join) {
            bool others_done = true;
            for (uint32_t o = 0; o < s.control.threads.size(); ++o)
                if (o != t && !s.control.threads[o].halted()) {
                    others_done = false;
                    break;
                }
            if (!others_done)
                continue;
        }
        out.emplace_back(t, &ins);
    }
    return out;
}

namespace {

struct LowerCtx {
    const MemoryShape& shape;
    uint32_t segment;
    GenTable& gens; // reads of untouched variables spring generation 1
};

Term lower_expr(const Expr& e, LowerCtx& ctx) {
    switch (e.kind) {
    case Expr::Kind::Var: {
        ProgVar pv{ctx.segment, static_cast<uint32_t>(e.var)};
        const VariableDescriptor& d = ctx.shape.var(pv);
        if (d.mark == Mark::Explicit)
            return mk_const(d.explicit_value, d.width);
        uint32_t g = ctx.gens.last(pv);
        if (g == 0) {
            g = 1;
            ctx.gens.set(pv, 1);
        }
        return mk_var(VarId{pv.segment, pv.position, g, Side::Left}, Sort::bitvec(d.width));
    }
    case Expr::Kind::Literal:
        return mk_const(e.literal, e.width);
    case Expr::Kind::Extract:
        return mk_extract(lower_expr(*e.a, ctx), e.ex_n, e.ex_p);
    case Expr::Kind::Not:
        return mk_not(lower_expr(*e.a, ctx));
    default:
        break;
    }
    Term a = lower_expr(*e.a, ctx);
    Term b = lower_expr(*e.b, ctx);
    switch (e.kind) {
    case Expr::Kind::Add: return mk_add(a, b);
    case Expr::Kind::Mul: return mk_mul(a, b);
    case Expr::Kind::UDiv: return mk_udiv(a, b);
    case Expr::Kind::Mod: return mk_mod(a, b);
    case Expr::Kind::BitAnd: return mk_bvand(a, b);
    case Expr::Kind::BitOr: return mk_bvor(a, b);
    case Expr::Kind::BitXor: return mk_bvxor(a, b);
    case Expr::Kind::Shl: return mk_shl(a, b);
    case Expr::Kind::LShr: return mk_lshr(a, b);
    case Expr::Kind::Concat: return mk_concat(a, b);
    case Expr::Kind::Eq: return mk_eq(a, b);
    case Expr::Kind::Ule: return mk_ule(a, b);
    case Expr::Kind::Sle: return mk_sle(a, b);
    case Expr::Kind::LAnd: return mk_and(a, b);
    case Expr::Kind::LOr: return mk_or(a, b);
    default:
        throw InvariantError("unhandled expression kind in lowering");
    }
}

Frame& top_frame(MultiState& s, uint32_t t) { return s.control.threads[t].frames.back(); }

// next-generation defining equality dst := rhs
void conjoin_definition(MultiState& s, ProgVar dst, uint32_t width, const Term& rhs) {
    uint32_t g = s.gens.last(dst) + 1;
    s.gens.set(dst, g);
    Term lhs = mk_var(VarId{dst.segment, dst.position, g, Side::Left}, Sort::bitvec(width));
    s.sym = s.sym.conjoined(mk_eq(lhs, rhs));
}

} // namespace

std::vector<MultiState> apply_instruction(const Program& p, const MultiState& s,
                                          uint32_t thread_idx) {
    const Frame& fr0 = s.control.threads[thread_idx].frames.back();
    const Function& fn = p.functions[fr0.function];
    const Instr& ins = fn.body[fr0.pc];

    switch (ins.kind) {
    case Instr::Kind::Assign: {
        MultiState n = s;
        Frame& fr = top_frame(n, thread_idx);
        LowerCtx ctx{n.shape, fr.segment, n.gens};
        Term rhs = lower_expr(*ins.expr, ctx);
        ProgVar dst{fr.segment, static_cast<uint32_t>(ins.dst)};
        conjoin_definition(n, dst, n.shape.var(dst).width, rhs);
        ++fr.pc;
        return {std::move(n)};
    }
    case Instr::Kind::Input: {
        // a fresh unconstrained generation, present via a vacuous equality
        MultiState n = s;
        Frame& fr = top_frame(n, thread_idx);
        ProgVar dst{fr.segment, static_cast<uint32_t>(ins.dst)};
        uint32_t g = n.gens.last(dst) + 1;
        n.gens.set(dst, g);
        n.sym = n.sym.conjoined(vacuous_equality(dst, g, n.shape.var(dst).width));
        ++fr.pc;
        return {std::move(n)};
    }
    case Instr::Kind::Branch: {
        if (ins.target_true == ins.target_false) {
            // a pure jump prunes nothing
            MultiState n = s;
            top_frame(n, thread_idx).pc = static_cast<uint32_t>(ins.target_true);
            return {std::move(n)};
        }
        MultiState proto = s;
        {
            Frame& fr = top_frame(proto, thread_idx);
            LowerCtx ctx{proto.shape, fr.segment, proto.gens};
            Term cond = lower_expr(*ins.expr, ctx);

            MultiState taken = proto;
            taken.sym = taken.sym.conjoined(cond);
            top_frame(taken, thread_idx).pc = static_cast<uint32_t>(ins.target_true);

            MultiState skipped = std::move(proto);
            skipped.sym = skipped.sym.conjoined(mk_not(cond));
            top_frame(skipped, thread_idx).pc = static_cast<uint32_t>(ins.target_false);
            return {std::move(taken), std::move(skipped)};
        }
    }
    case Instr::Kind::Assert: {
        // a branch whose false side is the error sink
        MultiState proto = s;
        Frame& fr = top_frame(proto, thread_idx);
        LowerCtx ctx{proto.shape, fr.segment, proto.gens};
        Term cond = lower_expr(*ins.expr, ctx);

        MultiState pass = proto;
        pass.sym = pass.sym.conjoined(cond);
        ++top_frame(pass, thread_idx).pc;

        MultiState fail = std::move(proto);
        fail.sym = fail.sym.conjoined(mk_not(cond));
        fail.error = true;
        ++top_frame(fail, thread_idx).pc;
        return {std::move(pass), std::move(fail)};
    }
    case Instr::Kind::Call: {
        MultiState n = s;
        const Function& callee = p.functions[static_cast<size_t>(ins.callee)];
        std::vector<Term> arg_terms;
        {
            Frame& fr = top_frame(n, thread_idx);
            LowerCtx ctx{n.shape, fr.segment, n.gens};
            for (const auto& a : ins.args)
                arg_terms.push_back(lower_expr(*a, ctx));
            ++fr.pc; // resume point after return
        }
        uint32_t seg = n.next_segment++;
        n.shape.add_segment(segment_for(callee, seg));
        n.control.threads[thread_idx].frames.push_back(
            Frame{static_cast<uint32_t>(ins.callee), 0, seg, ins.dst});
        for (uint32_t i = 0; i < callee.n_params; ++i)
            conjoin_definition(n, ProgVar{seg, i}, callee.vars[i].width, arg_terms[i]);
        return {std::move(n)};
    }
    case Instr::Kind::Return: {
        MultiState n = s;
        ThreadStack& th = n.control.threads[thread_idx];
        Frame callee_fr = th.frames.back();
        if (ins.expr && callee_fr.ret_dst >= 0) {
            LowerCtx ctx{n.shape, callee_fr.segment, n.gens};
            Term val = lower_expr(*ins.expr, ctx);
            const Frame& caller = th.frames[th.frames.size() - 2];
            ProgVar dst{caller.segment, static_cast<uint32_t>(callee_fr.ret_dst)};
            conjoin_definition(n, dst, n.shape.var(dst).width, val);
        }
        th.frames.pop_back();
        n.shape.drop_segment(callee_fr.segment);
        return {std::move(n)};
    }
    case Instr::Kind::Spawn: {
        MultiState n = s;
        ++top_frame(n, thread_idx).pc;
        uint32_t seg = n.next_segment++;
        n.shape.add_segment(segment_for(p.functions[static_cast<size_t>(ins.callee)], seg));
        ThreadStack worker;
        worker.frames.push_back(Frame{static_cast<uint32_t>(ins.callee), 0, seg, -1});
        n.control.threads.push_back(std::move(worker));
        return {std::move(n)};
    }
    case Instr::Kind::Join: {
        MultiState n = s;
        ++top_frame(n, thread_idx).pc;
        return {std::move(n)};
    }
    case Instr::Kind::Halt: {
        MultiState n = s;
        ThreadStack& th = n.control.threads[thread_idx];
        for (const auto& f : th.frames)
            n.shape.drop_segment(f.segment);
        th.frames.clear();
        return {std::move(n)};
    }
    }
    throw InvariantError("unhandled instruction");
}

void validate_state(const Program& p, const MultiState& s) {
    if (s.control.threads.empty())
        throw InvariantError("state has no threads");
    for (const auto& th : s.control.threads)
        for (const auto& fr : th.frames) {
            if (fr.function >= p.functions.size())
                throw InvariantError("frame references an unknown function");
            if (fr.pc >= p.functions[fr.function].body.size())
                throw InvariantError("frame pc out of range");
            if (!s.shape.find(fr.segment))
                throw InvariantError("frame references a dropped segment");
        }
    s.sym.check_invariants();
    // generation table must agree with the maximal generation per variable
    std::map<ProgVar, uint32_t> max_gen;
    for (const auto& part : s.sym.parts())
        for (const auto& [v, sort] : part->free_vars()) {
            if (v.side != Side::Left)
                throw InvariantError("state formula contains a right-side variable");
            uint32_t& slot = max_gen[prog_var_of(v)];
            slot = std::max(slot, v.generation);
        }
    for (const auto& [pv, g] : max_gen)
        if (s.gens.last(pv) != g)
            throw InvariantError("generation table out of sync with the symbolic part");
}

// --- matching -------------------------------------------------------------------------

MatchedParts match_states(const SymbolicPart& a, const GenTable& ga,
                          const std::vector<std::pair<ProgVar, uint32_t>>& scope_a,
                          const SymbolicPart& b, const GenTable& gb,
                          const std::vector<std::pair<ProgVar, uint32_t>>& scope_b) {
    if (scope_a != scope_b)
        throw ShapeMismatch("matching requires identical defined program variables");
    const auto& scope = scope_a;

    std::map<ProgVar, uint32_t> width_of;
    for (const auto& [pv, w] : scope)
        width_of[pv] = w;

    // the shared universe: everything either side mentions, plus the scope
    std::set<ProgVar> universe;
    auto collect = [&universe](const SymbolicPart& sp) {
        for (const auto& part : sp.parts())
            for (const ProgVar& pv : prog_vars(*part))
                universe.insert(pv);
    };
    collect(a);
    collect(b);
    for (const auto& [pv, w] : scope)
        universe.insert(pv);

    std::vector<ProgVar> vars(universe.begin(), universe.end());
    std::map<ProgVar, size_t> index;
    for (size_t i = 0; i < vars.size(); ++i)
        index[vars[i]] = i;

    // union of both sides' groupings
    std::vector<size_t> parent(vars.size());
    for (size_t i = 0; i < parent.size(); ++i)
        parent[i] = i;
    auto find = [&](size_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    auto join_group = [&](const std::vector<ProgVar>& group) {
        for (size_t k = 1; k < group.size(); ++k) {
            size_t r1 = find(index.at(group[0]));
            size_t r2 = find(index.at(group[k]));
            if (r1 != r2)
                parent[r2] = r1;
        }
    };
    for (const auto& part : a.parts())
        join_group(prog_vars(*part));
    for (const auto& part : b.parts())
        join_group(prog_vars(*part));

    // components in min-variable order (vars are sorted already)
    std::map<size_t, size_t> component_of_root;
    size_t n_components = 0;
    std::vector<std::vector<ProgVar>> component_vars;
    for (size_t i = 0; i < vars.size(); ++i) {
        size_t root = find(i);
        auto [it, fresh] = component_of_root.try_emplace(root, n_components);
        if (fresh) {
            ++n_components;
            component_vars.emplace_back();
        }
        component_vars[it->second].push_back(vars[i]);
    }

    // variable-free parts (constant clauses) gather in one extra component
    bool has_constant_parts = false;
    for (const auto& part : a.parts())
        has_constant_parts = has_constant_parts || prog_vars(*part).empty();
    for (const auto& part : b.parts())
        has_constant_parts = has_constant_parts || prog_vars(*part).empty();
    size_t total_components = n_components + (has_constant_parts ? 1 : 0);

    auto side = [&](const SymbolicPart& sp, const GenTable& gens) {
        std::vector<ConjunctionPtr> merged(total_components);
        std::vector<std::vector<Term>> clauses(total_components);
        for (const auto& part : sp.parts()) {
            std::vector<ProgVar> pvs = prog_vars(*part);
            size_t comp = pvs.empty() ? n_components
                                      : component_of_root.at(find(index.at(pvs[0])));
            for (const auto& cl : part->clauses())
                clauses[comp].push_back(cl);
        }
        // untouched in-scope variables materialize as vacuous equalities
        for (size_t c = 0; c < n_components; ++c)
            for (const ProgVar& pv : component_vars[c])
                if (width_of.count(pv) && gens.last(pv) == 0)
                    clauses[c].push_back(vacuous_equality(pv, 1, width_of[pv]));
        for (size_t c = 0; c < total_components; ++c)
            merged[c] = std::make_shared<Conjunction>(std::move(clauses[c]));
        return merged;
    };

    MatchedParts out;
    out.left = side(a, ga);
    out.right = side(b, gb);
    out.diff_vars.resize(total_components);
    for (size_t c = 0; c < n_components; ++c)
        for (const ProgVar& pv : component_vars[c]) {
            auto w = width_of.find(pv);
            if (w == width_of.end())
                continue; // dead baggage: never compared
            DiffVar dv;
            dv.pv = pv;
            dv.width = w->second;
            dv.gen_left = std::max(ga.last(pv), 1u);
            dv.gen_right = std::max(gb.last(pv), 1u);
            out.diff_vars[c].push_back(dv);
        }
    return out;
}

bool syntactically_equal(const MultiState& a, const MultiState& b) {
    if (a.explicit_key() != b.explicit_key())
        return false;
    if (a.sym.sliced() != b.sym.sliced())
        return false;
    if (!a.sym.sliced())
        return a.sym.parts()[0]->canonical_key() == b.sym.parts()[0]->canonical_key();
    MatchedParts m = match_states(a.sym, a.gens, a.scope(), b.sym, b.gens, b.scope());
    for (size_t c = 0; c < m.left.size(); ++c)
        if (m.left[c]->canonical_key() != m.right[c]->canonical_key())
            return false;
    return true;
}

// --- dumps -----------------------------------------------------------------------------

std::string dump_conjunction(const Conjunction& c, const MemoryShape& shape) {
    auto name = [&shape](const VarId& v) -> std::string {
        std::string side = v.side == Side::Right ? "R." : "";
        ProgVar pv = prog_var_of(v);
        if (shape.has(pv)) {
            std::string qualifier =
                shape.segments.size() > 1 ? "s" + std::to_string(pv.segment) + "." : "";
            return side + qualifier + shape.var(pv).name;
        }
        return side + "s" + std::to_string(pv.segment) + "p" + std::to_string(pv.position);
    };
    std::vector<const Term*> sorted;
    for (const auto& cl : c.clauses())
        sorted.push_back(&cl);
    std::sort(sorted.begin(), sorted.end(),
              [](const Term* x, const Term* y) { return (*x)->key() < (*y)->key(); });
    if (sorted.empty())
        return "true";
    std::string out;
    for (size_t i = 0; i < sorted.size(); ++i) {
        if (i)
            out += " ∧ ";
        out += render_term(*sorted[i], name);
    }
    return out;
}

std::string dump_symbolic(const MultiState& s) {
    std::string out;
    const auto& parts = s.sym.parts();
    if (parts.empty())
        return "part 0: true\n";
    for (size_t i = 0; i < parts.size(); ++i)
        out += "part " + std::to_string(i) + ": " + dump_conjunction(*parts[i], s.shape) + "\n";
    return out;
}

} // namespace ceds
