#ifndef CEDS_BV_HPP
#define CEDS_BV_HPP

#include "ceds/errors.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ceds {

// Sorts are fixed-size bit-vectors of width 1..64 plus a distinguished Boolean
// sort. Boolean is encoded as width 0 so a sort fits in one word.
struct Sort {
    uint32_t width = 0;

    static Sort boolean() { return Sort{0}; }
    static Sort bitvec(uint32_t w);

    bool is_bool() const { return width == 0; }
    bool is_bitvec() const { return width != 0; }
    uint32_t bits() const { return is_bool() ? 1u : width; }

    auto operator<=>(const Sort&) const = default;
};

enum class Side : uint8_t { Left = 0, Right = 1 };

// One occurrence of a program variable inside a formula: (segment, position)
// names the program variable, generation the assignment version. The side tag
// is Left everywhere except inside equality queries, where the right-hand
// state's variables are renamed apart.
struct VarId {
    uint32_t segment = 0;
    uint32_t position = 0;
    uint32_t generation = 1; // >= 1
    Side side = Side::Left;

    auto operator<=>(const VarId&) const = default;
};

VarId with_side(VarId v, Side s);

enum class Op : uint8_t {
    Var,
    Const,
    BoolConst,
    // predicates: BitVec x BitVec -> Bool
    Eq,
    Ule,
    Sle,
    // BitVec x BitVec -> BitVec (same width)
    Add,
    Mul,
    UDiv,
    BvAnd,
    BvOr,
    BvXor,
    Shl,
    LShr,
    // width-changing
    Concat,
    Extract,
    // Boolean connectives
    Not,
    And,
    Or,
    Implies,
    // quantifier; only at the outermost level of equality-query bodies
    Forall,
};

class TermNode;
using Term = std::shared_ptr<const TermNode>;

using BoundVar = std::pair<VarId, Sort>;

// Immutable, shareable term DAG node. Sort, free variables and the canonical
// structural key are computed once at construction.
class TermNode {
public:
    Op op() const { return op_; }
    Sort sort() const { return sort_; }
    uint64_t value() const { return value_; }          // Const payload / BoolConst 0-1
    uint32_t extract_start() const { return static_cast<uint32_t>(value_); }
    const VarId& var() const { return var_; }
    const std::vector<Term>& kids() const { return kids_; }
    const std::vector<BoundVar>& bound() const { return bound_; }

    // Free variables with their sorts, sorted by VarId, duplicates merged.
    const std::vector<BoundVar>& free_vars() const { return free_; }
    // Canonical structural key; lexicographic order on keys is the total term
    // order (op tag, width, payload, child keys).
    const std::string& key() const { return key_; }
    bool has_forall() const { return has_forall_; }

private:
    friend class TermFactory;
    TermNode() = default;

    Op op_ = Op::BoolConst;
    Sort sort_;
    uint64_t value_ = 0;
    VarId var_;
    std::vector<Term> kids_;
    std::vector<BoundVar> bound_;
    std::vector<BoundVar> free_;
    std::string key_;
    bool has_forall_ = false;
};

// --- construction -----------------------------------------------------------

Term mk_var(VarId v, Sort s);
Term mk_const(uint64_t value, uint32_t width);
Term mk_bool(bool b);
Term mk_eq(Term a, Term b);
Term mk_ule(Term a, Term b);
Term mk_sle(Term a, Term b);
Term mk_add(Term a, Term b);
Term mk_mul(Term a, Term b);
Term mk_udiv(Term a, Term b);
Term mk_bvand(Term a, Term b);
Term mk_bvor(Term a, Term b);
Term mk_bvxor(Term a, Term b);
Term mk_shl(Term a, Term b);
Term mk_lshr(Term a, Term b);
Term mk_concat(Term hi, Term lo);
Term mk_extract(Term t, uint32_t n, uint32_t p);
Term mk_not(Term a);
Term mk_and(Term a, Term b);
Term mk_or(Term a, Term b);
Term mk_implies(Term a, Term b);
Term mk_forall(std::vector<BoundVar> bound, Term body);

// Derived forms. The theory has no minus; negation is the two's-complement
// identity -x = (x ^ ones) + 1 and x mod k lowers to x - (x /u k) * k.
Term mk_neg(Term a);
Term mk_sub(Term a, Term b);
Term mk_mod(Term a, Term b);
Term mk_ne(Term a, Term b);

// Fold a clause list into a single Boolean term; empty list is true.
Term mk_conj_term(std::span<const Term> clauses);

// Structural recursion helper: rename all variables to a side (used when the
// right-hand state of an equality query is renamed apart).
Term retag_side(const Term& t, Side s);

// --- evaluation --------------------------------------------------------------

// Total map from variables to values; the evaluation oracle input.
class Assignment {
public:
    void set(VarId v, Sort s, uint64_t value);
    bool has(VarId v) const { return values_.count(v) != 0; }
    uint64_t get(VarId v) const;
    const std::map<VarId, uint64_t>& values() const { return values_; }

private:
    std::map<VarId, uint64_t> values_;
};

// Standard two's-complement / SMT-LIB semantics; x /u 0 is all-ones. Forall is
// expanded exhaustively over the bound domains. Booleans come back as 0/1.
uint64_t evaluate(const Term& t, const Assignment& mu);

uint64_t width_mask(uint32_t width);

// --- conjunctions -------------------------------------------------------------

// An ordered list of quantifier-free Boolean clauses with cached free
// variables and canonical key. Values are immutable once built.
class Conjunction {
public:
    Conjunction() = default;
    explicit Conjunction(std::vector<Term> clauses);

    const std::vector<Term>& clauses() const { return clauses_; }
    bool empty() const { return clauses_.empty(); }
    size_t size() const { return clauses_.size(); }

    const std::vector<BoundVar>& free_vars() const { return free_; }
    // Key is invariant under clause reordering: clauses are sorted by the
    // structural term order before framing. Stable across process runs.
    const std::string& canonical_key() const { return key_; }

    Term term() const { return mk_conj_term(clauses_); }

private:
    std::vector<Term> clauses_;
    std::vector<BoundVar> free_;
    std::string key_;
};

using ConjunctionPtr = std::shared_ptr<const Conjunction>;

// True iff the two sides share no free variable.
bool independent(const Conjunction& a, const Conjunction& b);
bool independent(const Term& a, const Term& b);

// Merge sorted free-variable lists, rejecting a VarId that appears at two
// different sorts.
std::vector<BoundVar> merge_free_vars(const std::vector<BoundVar>& a, const std::vector<BoundVar>& b);

// Render a term for debug dumps. `name` maps a variable to its display name
// without the generation suffix; the renderer appends ^gen itself.
std::string render_term(const Term& t, const std::function<std::string(const VarId&)>& name);
std::string render_term(const Term& t);

} // namespace ceds

#endif
