#ifndef CEDS_STATE_HPP
#define CEDS_STATE_HPP

#include "ceds/bv.hpp"
#include "ceds/prog.hpp"

#include <map>
#include <string>
#include <vector>

namespace ceds {

// A program variable: position inside a memory segment, generations abstracted
// away.
struct ProgVar {
    uint32_t segment = 0;
    uint32_t position = 0;
    auto operator<=>(const ProgVar&) const = default;
};

inline ProgVar prog_var_of(const VarId& v) { return ProgVar{v.segment, v.position}; }

enum class Mark : uint8_t { Symbolic, Explicit };

struct VariableDescriptor {
    std::string name;
    uint32_t width = 0;
    Mark mark = Mark::Symbolic;
    uint64_t explicit_value = 0; // meaningful iff mark == Explicit
};

struct Segment {
    uint32_t id = 0;
    std::vector<VariableDescriptor> vars;
};

// Live storage: one segment per active function activation. Segment ids are
// never reused within a run.
struct MemoryShape {
    std::vector<Segment> segments; // ascending id

    const Segment* find(uint32_t id) const;
    bool has(ProgVar pv) const;
    const VariableDescriptor& var(ProgVar pv) const;
    void add_segment(Segment s);
    void drop_segment(uint32_t id);
};

struct Frame {
    uint32_t function = 0;
    uint32_t pc = 0;
    uint32_t segment = 0;
    int ret_dst = -1; // caller variable receiving the return value
};

struct ThreadStack {
    std::vector<Frame> frames;
    bool halted() const { return frames.empty(); }
};

struct ControlPart {
    std::vector<ThreadStack> threads;
};

// Last generation per program variable; absent means the variable has never
// been touched and generation 1 springs into existence on first use.
class GenTable {
public:
    uint32_t last(ProgVar pv) const {
        auto it = gen_.find(pv);
        return it == gen_.end() ? 0 : it->second;
    }
    void set(ProgVar pv, uint32_t gen) { gen_[pv] = gen; }
    const std::map<ProgVar, uint32_t>& table() const { return gen_; }

private:
    std::map<ProgVar, uint32_t> gen_;
};

// --- symbolic parts ---------------------------------------------------------------

// Program variables mentioned by a conjunction, sorted.
std::vector<ProgVar> prog_vars(const Conjunction& c);

// The presence device: (s,p)^gen = (s,p)^gen constrains nothing but keeps the
// variable in the formula.
Term vacuous_equality(ProgVar pv, uint32_t gen, uint32_t width);

// Maximal decomposition: connected components of the clause graph whose edges
// join clauses sharing a program variable. Clause order is preserved and the
// components come out in first-clause order.
std::vector<Conjunction> slice(const Conjunction& c);

// Monolithic (one conjunction) or sliced (mutually independent conjunctions)
// set of constraints. Conjunctions are shared between states; conjoin returns
// a new value reusing untouched parts.
class SymbolicPart {
public:
    static SymbolicPart monolithic_top();
    static SymbolicPart sliced_top();
    // Ad-hoc sliced value from given parts. Parts must be pairwise
    // formula-variable independent; program-variable overlaps are allowed
    // here (matching resolves them).
    static SymbolicPart sliced_from_parts(std::vector<ConjunctionPtr> parts);

    bool sliced() const { return sliced_; }
    const std::vector<ConjunctionPtr>& parts() const { return parts_; }

    // Conjoin one clause. Sliced parts sharing a program variable with the
    // clause merge with it; a clause over fresh variables starts a new part.
    // Vacuous self-equalities superseded by the clause are dropped.
    SymbolicPart conjoined(const Term& clause) const;

    // All clauses as one conjunction, parts in stored order.
    Conjunction to_monolithic() const;

    // Index of the part mentioning pv, -1 if none. Monolithic: 0 when present.
    int owner_of(ProgVar pv) const;

    // Throws InvariantError when the pairwise-independence or ownership
    // invariants are broken (test and debug hook).
    void check_invariants() const;

private:
    bool sliced_ = false;
    std::vector<ConjunctionPtr> parts_;
};

// --- multi-states -------------------------------------------------------------------

struct MultiState {
    ControlPart control;
    MemoryShape shape;
    SymbolicPart sym;
    GenTable gens;
    uint32_t next_segment = 0;
    bool error = false; // assertion-failure sink

    // Deterministic byte key of control part + memory shape; states with equal
    // keys are dedup candidates.
    std::string explicit_key() const;

    // Variables defined at the current control location (live segments),
    // sorted, with widths.
    std::vector<std::pair<ProgVar, uint32_t>> scope() const;
};

// One thread, one frame at main's entry, one all-symbolic segment, empty
// (true) symbolic part.
MultiState initial_state(const Program& p, bool sliced_store);

// Live, unblocked threads in index order; join blocks until every other
// thread has halted. Empty on a fully halted program.
std::vector<std::pair<uint32_t, const Instr*>> enabled_steps(const Program& p,
                                                             const MultiState& s);

// Successors of executing the instruction at threadIdx's pc. Branch yields the
// pruned pair unless both targets agree (a pure jump); assert yields the pass
// successor plus an error-flagged one. Emptiness is not checked here.
std::vector<MultiState> apply_instruction(const Program& p, const MultiState& s,
                                          uint32_t thread_idx);

// Referential integrity + symbolic invariants (test hook).
void validate_state(const Program& p, const MultiState& s);

// --- matching ------------------------------------------------------------------------

struct DiffVar {
    ProgVar pv;
    uint32_t width = 0;
    uint32_t gen_left = 1;
    uint32_t gen_right = 1;
};

// Sliced parts of two states aligned part-by-part so that paired parts cover
// the same program variables: the finest common coarsening of both sides'
// groupings (components of the union graph), never coarser than needed.
// Variables touched on one side only get a vacuous self-equality part
// materialized on the other. diff_vars lists the in-scope variables of each
// component with their per-side last generations.
struct MatchedParts {
    std::vector<ConjunctionPtr> left;
    std::vector<ConjunctionPtr> right;
    std::vector<std::vector<DiffVar>> diff_vars;
};

MatchedParts match_states(const SymbolicPart& a, const GenTable& ga,
                          const std::vector<std::pair<ProgVar, uint32_t>>& scope_a,
                          const SymbolicPart& b, const GenTable& gb,
                          const std::vector<std::pair<ProgVar, uint32_t>>& scope_b);

// Sound syntactic fast path: canonical-key equality per matched part
// (monolithic: of the whole conjunction). True implies state equality.
bool syntactically_equal(const MultiState& a, const MultiState& b);

// Debug dump: one line per part, clauses in canonical order, variables
// rendered name^generation using the memory shape's names.
std::string dump_symbolic(const MultiState& s);
std::string dump_conjunction(const Conjunction& c, const MemoryShape& shape);

} // namespace ceds

#endif
