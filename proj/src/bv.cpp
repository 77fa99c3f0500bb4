#include "ceds/bv.hpp"

#include <algorithm>
#include <cassert>

namespace ceds {

Sort Sort::bitvec(uint32_t w) {
    if (w < 1 || w > 64)
        throw SortError("bit-vector width must be in [1, 64], got " + std::to_string(w));
    return Sort{w};
}

VarId with_side(VarId v, Side s) {
    v.side = s;
    return v;
}

uint64_t width_mask(uint32_t width) {
    return width >= 64 ? ~0ull : ((1ull << width) - 1);
}

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

void put_var(std::string& out, const VarId& v) {
    out.push_back(static_cast<char>(v.side));
    put_u32(out, v.segment);
    put_u32(out, v.position);
    put_u32(out, v.generation);
}

std::string op_name(Op op) {
    switch (op) {
    case Op::Var: return "var";
    case Op::Const: return "const";
    case Op::BoolConst: return "bool";
    case Op::Eq: return "=";
    case Op::Ule: return "<=u";
    case Op::Sle: return "<=s";
    case Op::Add: return "+";
    case Op::Mul: return "*";
    case Op::UDiv: return "/u";
    case Op::BvAnd: return "&";
    case Op::BvOr: return "|";
    case Op::BvXor: return "^";
    case Op::Shl: return "<<";
    case Op::LShr: return ">>u";
    case Op::Concat: return "++";
    case Op::Extract: return "extract";
    case Op::Not: return "!";
    case Op::And: return "&&";
    case Op::Or: return "||";
    case Op::Implies: return "=>";
    case Op::Forall: return "forall";
    }
    return "?";
}

} // namespace

std::vector<BoundVar> merge_free_vars(const std::vector<BoundVar>& a, const std::vector<BoundVar>& b) {
    std::vector<BoundVar> out;
    out.reserve(a.size() + b.size());
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        const BoundVar* next;
        if (j >= b.size() || (i < a.size() && a[i].first <= b[j].first)) {
            next = &a[i++];
            if (j < b.size() && next->first == b[j].first) {
                if (next->second != b[j].second)
                    throw SortError("variable used at two different sorts");
                ++j;
            }
        } else {
            next = &b[j++];
        }
        if (!out.empty() && out.back().first == next->first) {
            if (out.back().second != next->second)
                throw SortError("variable used at two different sorts");
            continue;
        }
        out.push_back(*next);
    }
    return out;
}

class TermFactory {
public:
    static Term make(Op op, Sort sort, uint64_t value, VarId var, std::vector<Term> kids,
                     std::vector<BoundVar> bound) {
        auto node = std::shared_ptr<TermNode>(new TermNode());
        node->op_ = op;
        node->sort_ = sort;
        node->value_ = value;
        node->var_ = var;
        node->kids_ = std::move(kids);
        node->bound_ = std::move(bound);

        // free variables
        if (op == Op::Var) {
            node->free_ = {{var, sort}};
        } else {
            std::vector<BoundVar> free;
            for (const auto& k : node->kids_) {
                free = merge_free_vars(free, k->free_vars());
                node->has_forall_ = node->has_forall_ || k->has_forall();
            }
            if (op == Op::Forall) {
                node->has_forall_ = true;
                std::vector<BoundVar> kept;
                for (const auto& fv : free) {
                    bool is_bound = false;
                    for (const auto& bv : node->bound_)
                        if (bv.first == fv.first) {
                            is_bound = true;
                            break;
                        }
                    if (!is_bound)
                        kept.push_back(fv);
                }
                free = std::move(kept);
            }
            node->free_ = std::move(free);
        }

        // canonical key
        std::string key;
        key.push_back(static_cast<char>(op));
        put_u32(key, sort.width);
        switch (op) {
        case Op::Var:
            put_var(key, var);
            break;
        case Op::Const:
            put_u64(key, value);
            break;
        case Op::BoolConst:
            key.push_back(static_cast<char>(value));
            break;
        case Op::Extract:
            put_u32(key, static_cast<uint32_t>(value));
            break;
        case Op::Forall:
            put_u32(key, static_cast<uint32_t>(node->bound_.size()));
            for (const auto& bv : node->bound_) {
                put_var(key, bv.first);
                put_u32(key, bv.second.width);
            }
            break;
        default:
            break;
        }
        for (const auto& k : node->kids_)
            key += k->key();
        node->key_ = std::move(key);
        return node;
    }
};

namespace {

Sort require_bitvec(const Term& t, const char* who) {
    if (!t || !t->sort().is_bitvec())
        throw SortError(std::string(who) + ": operand must be a bit-vector");
    return t->sort();
}

void require_bool(const Term& t, const char* who) {
    if (!t || !t->sort().is_bool())
        throw SortError(std::string(who) + ": operand must be Boolean");
}

Term binop_same_width(Op op, Sort result, Term a, Term b, const char* who) {
    Sort sa = require_bitvec(a, who);
    Sort sb = require_bitvec(b, who);
    if (sa != sb)
        throw SortError(std::string(who) + ": operand widths differ (" + std::to_string(sa.width) +
                        " vs " + std::to_string(sb.width) + ")");
    return TermFactory::make(op, result, 0, {}, {std::move(a), std::move(b)}, {});
}

} // namespace

Term mk_var(VarId v, Sort s) {
    if (v.generation < 1)
        throw SortError("variable generation must be >= 1");
    return TermFactory::make(Op::Var, s, 0, v, {}, {});
}

Term mk_const(uint64_t value, uint32_t width) {
    Sort s = Sort::bitvec(width);
    if (value > width_mask(width))
        throw SortError("constant " + std::to_string(value) + " does not fit width " +
                        std::to_string(width));
    return TermFactory::make(Op::Const, s, value, {}, {}, {});
}

Term mk_bool(bool b) {
    return TermFactory::make(Op::BoolConst, Sort::boolean(), b ? 1 : 0, {}, {}, {});
}

Term mk_eq(Term a, Term b) { return binop_same_width(Op::Eq, Sort::boolean(), std::move(a), std::move(b), "="); }
Term mk_ule(Term a, Term b) { return binop_same_width(Op::Ule, Sort::boolean(), std::move(a), std::move(b), "<=u"); }
Term mk_sle(Term a, Term b) { return binop_same_width(Op::Sle, Sort::boolean(), std::move(a), std::move(b), "<=s"); }

Term mk_add(Term a, Term b) { Sort s = require_bitvec(a, "+"); return binop_same_width(Op::Add, s, std::move(a), std::move(b), "+"); }
Term mk_mul(Term a, Term b) { Sort s = require_bitvec(a, "*"); return binop_same_width(Op::Mul, s, std::move(a), std::move(b), "*"); }
Term mk_udiv(Term a, Term b) { Sort s = require_bitvec(a, "/u"); return binop_same_width(Op::UDiv, s, std::move(a), std::move(b), "/u"); }
Term mk_bvand(Term a, Term b) { Sort s = require_bitvec(a, "&"); return binop_same_width(Op::BvAnd, s, std::move(a), std::move(b), "&"); }
Term mk_bvor(Term a, Term b) { Sort s = require_bitvec(a, "|"); return binop_same_width(Op::BvOr, s, std::move(a), std::move(b), "|"); }
Term mk_bvxor(Term a, Term b) { Sort s = require_bitvec(a, "^"); return binop_same_width(Op::BvXor, s, std::move(a), std::move(b), "^"); }
Term mk_shl(Term a, Term b) { Sort s = require_bitvec(a, "<<"); return binop_same_width(Op::Shl, s, std::move(a), std::move(b), "<<"); }
Term mk_lshr(Term a, Term b) { Sort s = require_bitvec(a, ">>u"); return binop_same_width(Op::LShr, s, std::move(a), std::move(b), ">>u"); }

Term mk_concat(Term hi, Term lo) {
    Sort sh = require_bitvec(hi, "++");
    Sort sl = require_bitvec(lo, "++");
    if (sh.width + sl.width > 64)
        throw SortError("concat result exceeds the 64-bit width cap");
    Sort s = Sort::bitvec(sh.width + sl.width);
    return TermFactory::make(Op::Concat, s, 0, {}, {std::move(hi), std::move(lo)}, {});
}

Term mk_extract(Term t, uint32_t n, uint32_t p) {
    Sort st = require_bitvec(t, "extract");
    if (n < 1 || p + n > st.width)
        throw SortError("extract(" + std::to_string(n) + ", " + std::to_string(p) +
                        ") out of range for width " + std::to_string(st.width));
    return TermFactory::make(Op::Extract, Sort::bitvec(n), p, {}, {std::move(t)}, {});
}

Term mk_not(Term a) {
    require_bool(a, "!");
    return TermFactory::make(Op::Not, Sort::boolean(), 0, {}, {std::move(a)}, {});
}

Term mk_and(Term a, Term b) {
    require_bool(a, "&&");
    require_bool(b, "&&");
    return TermFactory::make(Op::And, Sort::boolean(), 0, {}, {std::move(a), std::move(b)}, {});
}

Term mk_or(Term a, Term b) {
    require_bool(a, "||");
    require_bool(b, "||");
    return TermFactory::make(Op::Or, Sort::boolean(), 0, {}, {std::move(a), std::move(b)}, {});
}

Term mk_implies(Term a, Term b) {
    require_bool(a, "=>");
    require_bool(b, "=>");
    return TermFactory::make(Op::Implies, Sort::boolean(), 0, {}, {std::move(a), std::move(b)}, {});
}

Term mk_forall(std::vector<BoundVar> bound, Term body) {
    require_bool(body, "forall");
    std::sort(bound.begin(), bound.end(),
              [](const BoundVar& x, const BoundVar& y) { return x.first < y.first; });
    return TermFactory::make(Op::Forall, Sort::boolean(), 0, {}, {std::move(body)}, std::move(bound));
}

Term mk_neg(Term a) {
    Sort s = require_bitvec(a, "neg");
    Term ones = mk_const(width_mask(s.width), s.width);
    return mk_add(mk_bvxor(std::move(a), ones), mk_const(1, s.width));
}

Term mk_sub(Term a, Term b) { return mk_add(std::move(a), mk_neg(std::move(b))); }

Term mk_mod(Term a, Term b) {
    // x mod k = x - (x /u k) * k; agrees with bvurem including k = 0.
    Term quotient_times = mk_mul(mk_udiv(a, b), b);
    return mk_sub(std::move(a), std::move(quotient_times));
}

Term mk_ne(Term a, Term b) { return mk_not(mk_eq(std::move(a), std::move(b))); }

Term mk_conj_term(std::span<const Term> clauses) {
    if (clauses.empty())
        return mk_bool(true);
    Term acc = clauses[0];
    for (size_t i = 1; i < clauses.size(); ++i)
        acc = mk_and(acc, clauses[i]);
    return acc;
}

Term retag_side(const Term& t, Side s) {
    switch (t->op()) {
    case Op::Var: {
        VarId v = t->var();
        v.side = s;
        return mk_var(v, t->sort());
    }
    case Op::Const:
    case Op::BoolConst:
        return t;
    case Op::Forall: {
        std::vector<BoundVar> bound = t->bound();
        for (auto& bv : bound)
            bv.first.side = s;
        return mk_forall(std::move(bound), retag_side(t->kids()[0], s));
    }
    default: {
        std::vector<Term> kids;
        kids.reserve(t->kids().size());
        for (const auto& k : t->kids())
            kids.push_back(retag_side(k, s));
        return TermFactory::make(t->op(), t->sort(), t->value(), t->var(), std::move(kids), {});
    }
    }
}

// --- evaluation --------------------------------------------------------------

void Assignment::set(VarId v, Sort s, uint64_t value) {
    uint64_t limit = s.is_bool() ? 1 : width_mask(s.width);
    if (value > limit)
        throw EvalError("assignment value out of range for the variable's sort");
    values_[v] = value;
}

uint64_t Assignment::get(VarId v) const {
    auto it = values_.find(v);
    if (it == values_.end())
        throw EvalError("unassigned variable in evaluation");
    return it->second;
}

namespace {

struct EvalCtx {
    const Assignment& base;
    // bound-variable shadow stack, innermost last
    std::vector<std::pair<VarId, uint64_t>> overrides;

    uint64_t lookup(const VarId& v) const {
        for (auto it = overrides.rbegin(); it != overrides.rend(); ++it)
            if (it->first == v)
                return it->second;
        return base.get(v);
    }
};

int64_t sign_extend(uint64_t v, uint32_t w) {
    if (w >= 64)
        return static_cast<int64_t>(v);
    uint64_t shifted = v << (64 - w);
    return static_cast<int64_t>(shifted) >> (64 - w);
}

uint64_t eval_rec(const TermNode* t, EvalCtx& ctx) {
    switch (t->op()) {
    case Op::Var:
        return ctx.lookup(t->var());
    case Op::Const:
    case Op::BoolConst:
        return t->value();
    default:
        break;
    }
    uint32_t w = t->sort().width;
    uint64_t mask = width_mask(w);
    const auto& kids = t->kids();
    switch (t->op()) {
    case Op::Eq:
        return eval_rec(kids[0].get(), ctx) == eval_rec(kids[1].get(), ctx);
    case Op::Ule:
        return eval_rec(kids[0].get(), ctx) <= eval_rec(kids[1].get(), ctx);
    case Op::Sle: {
        uint32_t ow = kids[0]->sort().width;
        return sign_extend(eval_rec(kids[0].get(), ctx), ow) <=
               sign_extend(eval_rec(kids[1].get(), ctx), ow);
    }
    case Op::Add:
        return (eval_rec(kids[0].get(), ctx) + eval_rec(kids[1].get(), ctx)) & mask;
    case Op::Mul:
        return (eval_rec(kids[0].get(), ctx) * eval_rec(kids[1].get(), ctx)) & mask;
    case Op::UDiv: {
        uint64_t a = eval_rec(kids[0].get(), ctx);
        uint64_t b = eval_rec(kids[1].get(), ctx);
        return b == 0 ? mask : a / b;
    }
    case Op::BvAnd:
        return eval_rec(kids[0].get(), ctx) & eval_rec(kids[1].get(), ctx);
    case Op::BvOr:
        return eval_rec(kids[0].get(), ctx) | eval_rec(kids[1].get(), ctx);
    case Op::BvXor:
        return eval_rec(kids[0].get(), ctx) ^ eval_rec(kids[1].get(), ctx);
    case Op::Shl: {
        uint64_t a = eval_rec(kids[0].get(), ctx);
        uint64_t b = eval_rec(kids[1].get(), ctx);
        return b >= w ? 0 : (a << b) & mask;
    }
    case Op::LShr: {
        uint64_t a = eval_rec(kids[0].get(), ctx);
        uint64_t b = eval_rec(kids[1].get(), ctx);
        return b >= w ? 0 : a >> b;
    }
    case Op::Concat: {
        uint64_t hi = eval_rec(kids[0].get(), ctx);
        uint64_t lo = eval_rec(kids[1].get(), ctx);
        return (hi << kids[1]->sort().width) | lo;
    }
    case Op::Extract:
        return (eval_rec(kids[0].get(), ctx) >> t->extract_start()) & mask;
    case Op::Not:
        return eval_rec(kids[0].get(), ctx) ? 0 : 1;
    case Op::And:
        return eval_rec(kids[0].get(), ctx) && eval_rec(kids[1].get(), ctx);
    case Op::Or:
        return eval_rec(kids[0].get(), ctx) || eval_rec(kids[1].get(), ctx);
    case Op::Implies:
        return !eval_rec(kids[0].get(), ctx) || eval_rec(kids[1].get(), ctx);
    case Op::Forall: {
        const auto& bound = t->bound();
        size_t base = ctx.overrides.size();
        for (const auto& bv : bound)
            ctx.overrides.emplace_back(bv.first, 0);
        // odometer over the bound domains
        bool all = true;
        while (true) {
            if (!eval_rec(kids[0].get(), ctx)) {
                all = false;
                break;
            }
            size_t i = 0;
            for (; i < bound.size(); ++i) {
                uint64_t limit = bound[i].second.is_bool() ? 1 : width_mask(bound[i].second.width);
                auto& slot = ctx.overrides[base + i].second;
                if (slot < limit) {
                    ++slot;
                    break;
                }
                slot = 0;
            }
            if (i == bound.size())
                break;
        }
        ctx.overrides.resize(base);
        return all;
    }
    default:
        throw EvalError("unhandled operator in evaluation");
    }
}

} // namespace

uint64_t evaluate(const Term& t, const Assignment& mu) {
    EvalCtx ctx{mu, {}};
    return eval_rec(t.get(), ctx);
}

// --- conjunctions -------------------------------------------------------------

Conjunction::Conjunction(std::vector<Term> clauses) : clauses_(std::move(clauses)) {
    std::vector<std::string> clause_keys;
    clause_keys.reserve(clauses_.size());
    for (const auto& c : clauses_) {
        if (!c->sort().is_bool())
            throw SortError("conjunction clause must be Boolean");
        if (c->has_forall())
            throw InvariantError("quantifier inside a conjunction clause");
        free_ = merge_free_vars(free_, c->free_vars());
        clause_keys.push_back(c->key());
    }
    std::sort(clause_keys.begin(), clause_keys.end());
    key_.reserve(clause_keys.size() * 16 + 8);
    put_u32(key_, static_cast<uint32_t>(clause_keys.size()));
    for (const auto& k : clause_keys) {
        put_u32(key_, static_cast<uint32_t>(k.size()));
        key_ += k;
    }
}

namespace {

bool disjoint_sorted(const std::vector<BoundVar>& a, const std::vector<BoundVar>& b) {
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first)
            ++i;
        else if (b[j].first < a[i].first)
            ++j;
        else
            return false;
    }
    return true;
}

} // namespace

bool independent(const Conjunction& a, const Conjunction& b) {
    return disjoint_sorted(a.free_vars(), b.free_vars());
}

bool independent(const Term& a, const Term& b) {
    return disjoint_sorted(a->free_vars(), b->free_vars());
}

// --- rendering -----------------------------------------------------------------

namespace {

std::string render_rec(const TermNode* t, const std::function<std::string(const VarId&)>& name) {
    switch (t->op()) {
    case Op::Var:
        return name(t->var()) + "^" + std::to_string(t->var().generation);
    case Op::Const:
        return std::to_string(t->value());
    case Op::BoolConst:
        return t->value() ? "true" : "false";
    case Op::Extract:
        return "extract(" + std::to_string(t->sort().width) + ", " +
               std::to_string(t->extract_start()) + ", " + render_rec(t->kids()[0].get(), name) + ")";
    case Op::Not:
        return "!" + render_rec(t->kids()[0].get(), name);
    case Op::Forall: {
        std::string out = "forall ";
        for (size_t i = 0; i < t->bound().size(); ++i) {
            if (i)
                out += " ";
            out += name(t->bound()[i].first) + "^" + std::to_string(t->bound()[i].first.generation);
        }
        return out + ". " + render_rec(t->kids()[0].get(), name);
    }
    default:
        return "(" + render_rec(t->kids()[0].get(), name) + " " + op_name(t->op()) + " " +
               render_rec(t->kids()[1].get(), name) + ")";
    }
}

} // namespace

std::string render_term(const Term& t, const std::function<std::string(const VarId&)>& name) {
    return render_rec(t.get(), name);
}

std::string render_term(const Term& t) {
    return render_term(t, [](const VarId& v) {
        std::string side = v.side == Side::Right ? "R." : "";
        return side + "s" + std::to_string(v.segment) + "p" + std::to_string(v.position);
    });
}

} // namespace ceds
