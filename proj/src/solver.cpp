#include "ceds/solver.hpp"

#include "ceds/smtlib.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <map>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace ceds {

Term SatQuery::to_term() const {
    Term left = mk_conj_term(prefix);
    if (!has_forall)
        return left;
    Term hyp_term = mk_conj_term(hyp);
    Term disj = mk_bool(false);
    for (size_t i = 0; i < diffs.size(); ++i) {
        Term ne = mk_ne(diffs[i].first, diffs[i].second);
        disj = i == 0 ? ne : mk_or(disj, ne);
    }
    Term body = mk_implies(hyp_term, disj);
    return mk_and(left, mk_forall(bound, body));
}

std::vector<Term> split_conjuncts(const Term& t) {
    std::vector<Term> out;
    std::vector<Term> work{t};
    while (!work.empty()) {
        Term cur = work.back();
        work.pop_back();
        if (cur->op() == Op::And) {
            // right child pushed first so the left one pops next
            work.push_back(cur->kids()[1]);
            work.push_back(cur->kids()[0]);
        } else {
            out.push_back(cur);
        }
    }
    return out;
}

// --- enumeration ---------------------------------------------------------------

namespace {

// Quantifier-free terms compiled to a postfix program over a flat slot array,
// so the DFS hot loop avoids shared_ptr traffic and map lookups.
struct Compiled {
    struct Ins {
        Op op;
        uint32_t a = 0;  // slot index / extract start
        uint32_t w = 0;  // mask width; operand width for comparisons; lo width for concat
        uint64_t imm = 0;
    };
    std::vector<Ins> code;
    bool compiled_ok = true;
    Term fallback; // interpreted path for terms containing quantifiers

    uint64_t run(const std::vector<uint64_t>& slots, std::vector<uint64_t>& stack) const {
        stack.clear();
        for (const Ins& ins : code) {
            switch (ins.op) {
            case Op::Var:
                stack.push_back(slots[ins.a]);
                break;
            case Op::Const:
            case Op::BoolConst:
                stack.push_back(ins.imm);
                break;
            case Op::Not:
                stack.back() = stack.back() ? 0 : 1;
                break;
            case Op::Extract: {
                uint64_t v = stack.back();
                stack.back() = (v >> ins.a) & width_mask(ins.w);
                break;
            }
            default: {
                uint64_t b = stack.back();
                stack.pop_back();
                uint64_t& a = stack.back();
                switch (ins.op) {
                case Op::Eq: a = a == b; break;
                case Op::Ule: a = a <= b; break;
                case Op::Sle: {
                    uint32_t sh = 64 - ins.w;
                    a = (static_cast<int64_t>(a << sh) >> sh) <=
                        (static_cast<int64_t>(b << sh) >> sh);
                    break;
                }
                case Op::Add: a = (a + b) & width_mask(ins.w); break;
                case Op::Mul: a = (a * b) & width_mask(ins.w); break;
                case Op::UDiv: a = b == 0 ? width_mask(ins.w) : a / b; break;
                case Op::BvAnd: a = a & b; break;
                case Op::BvOr: a = a | b; break;
                case Op::BvXor: a = a ^ b; break;
                case Op::Shl: a = b >= ins.w ? 0 : (a << b) & width_mask(ins.w); break;
                case Op::LShr: a = b >= ins.w ? 0 : a >> b; break;
                case Op::Concat: a = (a << ins.w) | b; break;
                case Op::And: a = a && b; break;
                case Op::Or: a = a || b; break;
                case Op::Implies: a = !a || b; break;
                default: break;
                }
                break;
            }
            }
        }
        return stack.back();
    }
};

using SlotMap = std::map<VarId, uint32_t>;

bool compile_rec(const TermNode* t, const SlotMap& slots, Compiled& out) {
    switch (t->op()) {
    case Op::Var: {
        auto it = slots.find(t->var());
        if (it == slots.end())
            return false;
        out.code.push_back({Op::Var, it->second, 0, 0});
        return true;
    }
    case Op::Const:
    case Op::BoolConst:
        out.code.push_back({t->op(), 0, 0, t->value()});
        return true;
    case Op::Forall:
        return false;
    case Op::Extract:
        if (!compile_rec(t->kids()[0].get(), slots, out))
            return false;
        out.code.push_back({Op::Extract, t->extract_start(), t->sort().width, 0});
        return true;
    default: {
        for (const auto& k : t->kids())
            if (!compile_rec(k.get(), slots, out))
                return false;
        uint32_t w = t->sort().width;
        if (t->op() == Op::Eq || t->op() == Op::Ule || t->op() == Op::Sle)
            w = t->kids()[0]->sort().width;
        else if (t->op() == Op::Concat)
            w = t->kids()[1]->sort().width;
        out.code.push_back({t->op(), 0, w, 0});
        return true;
    }
    }
}

Compiled compile_term(const Term& t, const SlotMap& slots) {
    Compiled c;
    if (!compile_rec(t.get(), slots, c)) {
        c.code.clear();
        c.compiled_ok = false;
        c.fallback = t;
    }
    return c;
}

struct ClauseCheck {
    Compiled body;
    int level; // last slot the clause depends on; -1 = constant
};

uint64_t eval_check(const ClauseCheck& c, const std::vector<uint64_t>& slots,
                    const std::vector<BoundVar>& slot_vars, std::vector<uint64_t>& stack) {
    if (c.body.compiled_ok)
        return c.body.run(slots, stack);
    // interpreted fallback: only hit by terms with nested quantifiers
    Assignment mu;
    for (size_t i = 0; i < slot_vars.size(); ++i)
        mu.set(slot_vars[i].first, slot_vars[i].second, slots[i]);
    return evaluate(c.body.fallback, mu);
}

int clause_level(const Term& t, const SlotMap& slots) {
    int level = -1;
    for (const auto& [v, sort] : t->free_vars()) {
        auto it = slots.find(v);
        if (it != slots.end())
            level = std::max(level, static_cast<int>(it->second));
    }
    return level;
}

uint64_t collect_nested_forall_bits(const Term& t) {
    if (!t->has_forall())
        return 0;
    uint64_t bits = 0;
    if (t->op() == Op::Forall)
        for (const auto& bv : t->bound())
            bits += bv.second.bits();
    for (const auto& k : t->kids())
        bits += collect_nested_forall_bits(k);
    return bits;
}

} // namespace

SatResult EnumerationBackend::check(const SatQuery& q) {
    Term whole = q.to_term();

    const std::vector<BoundVar>& outer = whole->free_vars();
    const std::vector<BoundVar>& inner = q.bound;

    uint64_t total_bits = 0;
    for (const auto& v : outer)
        total_bits += v.second.bits();
    for (const auto& v : inner)
        total_bits += v.second.bits();
    for (const auto& c : q.prefix)
        total_bits += collect_nested_forall_bits(c);
    if (total_bits > max_domain_bits_)
        throw DomainTooLarge("query needs " + std::to_string(total_bits) +
                             " assignment bits, cap is " + std::to_string(max_domain_bits_));

    // slots: outer variables first, then the universally bound ones
    SlotMap slot_of;
    std::vector<BoundVar> slot_vars;
    for (const auto& v : outer) {
        slot_of.emplace(v.first, static_cast<uint32_t>(slot_vars.size()));
        slot_vars.push_back(v);
    }
    size_t n_outer = slot_vars.size();
    for (const auto& v : inner) {
        if (slot_of.count(v.first))
            continue; // bound var shadowing a free one cannot occur in our queries
        slot_of.emplace(v.first, static_cast<uint32_t>(slot_vars.size()));
        slot_vars.push_back(v);
    }
    size_t n_all = slot_vars.size();

    // schedule prefix clauses on outer levels
    std::vector<ClauseCheck> outer_constant;
    std::vector<std::vector<ClauseCheck>> outer_checks(n_outer);
    for (const auto& c : q.prefix) {
        ClauseCheck cc{compile_term(c, slot_of), clause_level(c, slot_of)};
        if (cc.level < 0)
            outer_constant.push_back(std::move(cc));
        else
            outer_checks[cc.level].push_back(std::move(cc));
    }

    // schedule the counterexample search: hyp clauses plus pinned equalities
    std::vector<ClauseCheck> inner_constant; // fully decided by outer slots
    std::vector<std::vector<ClauseCheck>> inner_checks(n_all - n_outer);
    if (q.has_forall) {
        std::vector<Term> cx_clauses = q.hyp;
        for (const auto& [x, y] : q.diffs)
            cx_clauses.push_back(mk_eq(x, y));
        for (const auto& c : cx_clauses) {
            ClauseCheck cc{compile_term(c, slot_of), clause_level(c, slot_of)};
            if (cc.level < static_cast<int>(n_outer))
                inner_constant.push_back(std::move(cc));
            else
                inner_checks[cc.level - n_outer].push_back(std::move(cc));
        }
    }

    std::vector<uint64_t> slots(n_all, 0);
    std::vector<uint64_t> stack;
    stack.reserve(64);

    for (const auto& cc : outer_constant)
        if (!eval_check(cc, slots, slot_vars, stack))
            return SatResult::unsat();

    auto limit_of = [&](size_t slot) { return width_mask(slot_vars[slot].second.bits()); };

    // counterexample search over the bound variables; true = forall violated
    auto violates_forall = [&]() -> bool {
        for (const auto& cc : inner_constant)
            if (!eval_check(cc, slots, slot_vars, stack))
                return false; // hypothesis false for every inner assignment
        size_t depth = n_all - n_outer;
        if (depth == 0)
            return true; // all checks passed with no inner vars left
        std::vector<uint64_t> vals(depth, 0);
        size_t lvl = 0;
        slots[n_outer] = 0;
        while (true) {
            bool ok = true;
            for (const auto& cc : inner_checks[lvl])
                if (!eval_check(cc, slots, slot_vars, stack)) {
                    ok = false;
                    break;
                }
            if (ok) {
                if (lvl + 1 == depth)
                    return true;
                ++lvl;
                vals[lvl] = 0;
                slots[n_outer + lvl] = 0;
                continue;
            }
            while (vals[lvl] == limit_of(n_outer + lvl)) {
                if (lvl == 0)
                    return false;
                --lvl;
            }
            ++vals[lvl];
            slots[n_outer + lvl] = vals[lvl];
        }
    };

    auto leaf_is_sat = [&]() -> bool { return !q.has_forall || !violates_forall(); };

    if (n_outer == 0)
        return leaf_is_sat() ? SatResult::sat() : SatResult::unsat();

    std::vector<uint64_t> vals(n_outer, 0);
    size_t lvl = 0;
    slots[0] = 0;
    while (true) {
        bool ok = true;
        for (const auto& cc : outer_checks[lvl])
            if (!eval_check(cc, slots, slot_vars, stack)) {
                ok = false;
                break;
            }
        if (ok) {
            if (lvl + 1 == n_outer) {
                if (leaf_is_sat())
                    return SatResult::sat();
            } else {
                ++lvl;
                vals[lvl] = 0;
                slots[lvl] = 0;
                continue;
            }
        }
        while (vals[lvl] == limit_of(lvl)) {
            if (lvl == 0)
                return SatResult::unsat();
            --lvl;
        }
        ++vals[lvl];
        slots[lvl] = vals[lvl];
    }
}

// --- external solver process ------------------------------------------------------

SolverSession::SolverSession(BackendConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.kind != BackendConfig::Kind::External)
        throw InvariantError("solver session requires an external backend config");
    if (cfg_.solver_path.empty())
        throw SpawnFailure("no solver binary configured");
}

SolverSession::~SolverSession() {
    shutdown(true);
}

void SolverSession::spawn() {
    signal(SIGPIPE, SIG_IGN);

    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
        throw SpawnFailure("pipe() failed");

    pid_t pid = fork();
    if (pid < 0)
        throw SpawnFailure("fork() failed");
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        std::vector<char*> argv;
        argv.push_back(const_cast<char*>(cfg_.solver_path.c_str()));
        for (const auto& a : cfg_.solver_args)
            argv.push_back(const_cast<char*>(a.c_str()));
        argv.push_back(nullptr);
        execvp(cfg_.solver_path.c_str(), argv.data());
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    to_child_ = to_child[1];
    from_child_ = from_child[0];
    pid_ = pid;
    buffered_.clear();
    ++stats_.spawns;
}

void SolverSession::shutdown(bool graceful) {
    if (pid_ < 0)
        return;
    if (graceful && to_child_ >= 0) {
        const char* bye = "(exit)\n";
        ssize_t ignored = write(to_child_, bye, strlen(bye));
        (void)ignored;
    }
    if (to_child_ >= 0)
        close(to_child_);
    if (from_child_ >= 0)
        close(from_child_);
    to_child_ = from_child_ = -1;
    kill(static_cast<pid_t>(pid_), SIGKILL);
    int status = 0;
    waitpid(static_cast<pid_t>(pid_), &status, 0);
    pid_ = -1;
}

bool SolverSession::send_all(const std::string& data) {
    size_t off = 0;
    while (off < data.size()) {
        ssize_t n = write(to_child_, data.data() + off, data.size() - off);
        if (n <= 0) {
            if (errno == EINTR)
                continue;
            return false;
        }
        off += static_cast<size_t>(n);
    }
    return true;
}

std::optional<std::string> SolverSession::read_line(int timeout_ms, bool& timed_out) {
    timed_out = false;
    auto take_line = [&]() -> std::optional<std::string> {
        size_t nl = buffered_.find('\n');
        if (nl == std::string::npos)
            return std::nullopt;
        std::string line = buffered_.substr(0, nl);
        buffered_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        return line;
    };
    if (auto line = take_line())
        return line;

    while (true) {
        pollfd pfd{from_child_, POLLIN, 0};
        int pr = poll(&pfd, 1, timeout_ms);
        if (pr == 0) {
            timed_out = true;
            return std::nullopt;
        }
        if (pr < 0) {
            if (errno == EINTR)
                continue;
            return std::nullopt;
        }
        char buf[4096];
        ssize_t n = read(from_child_, buf, sizeof(buf));
        if (n <= 0)
            return std::nullopt; // EOF: child died
        buffered_.append(buf, static_cast<size_t>(n));
        if (auto line = take_line())
            return line;
    }
}

SatResult SolverSession::attempt(const std::string& script, bool& dead) {
    dead = false;
    if (pid_ < 0)
        spawn();
    if (!send_all(script)) {
        dead = true;
        return SatResult::error("write to solver failed");
    }
    while (true) {
        bool timed_out = false;
        auto line = read_line(cfg_.timeout_ms, timed_out);
        if (timed_out) {
            shutdown(false); // the child may still be grinding; start clean next time
            return SatResult::unknown("solver timeout after " + std::to_string(cfg_.timeout_ms) +
                                      " ms");
        }
        if (!line) {
            dead = true;
            return SatResult::error("solver process closed its output");
        }
        if (line->empty())
            continue;
        if (*line == "sat" || *line == "unsat") {
            if (!send_all("(reset)\n"))
                shutdown(false);
            return *line == "sat" ? SatResult::sat() : SatResult::unsat();
        }
        if (*line == "unknown") {
            if (!send_all("(reset)\n"))
                shutdown(false);
            return SatResult::unknown("solver answered unknown");
        }
        SatResult r = SatResult::error("malformed solver output: " + *line);
        shutdown(false);
        return r;
    }
}

SatResult SolverSession::check_script(const std::string& script) {
    ++stats_.queries;
    bool dead = false;
    SatResult r = attempt(script, dead);
    if (!dead)
        return r;
    // one respawn, then give up
    shutdown(false);
    ++stats_.respawns;
    r = attempt(script, dead);
    if (dead) {
        shutdown(false);
        return SatResult::error("solver failed twice: " + r.message);
    }
    return r;
}

SatResult ExternalBackend::check(const SatQuery& q) {
    return session_.check_script(smtlib_script(q.to_term()));
}

std::unique_ptr<SatBackend> make_backend(const BackendConfig& cfg) {
    if (cfg.kind == BackendConfig::Kind::Enumeration)
        return std::make_unique<EnumerationBackend>(cfg.max_domain_bits);
    return std::make_unique<ExternalBackend>(cfg);
}

} // namespace ceds
