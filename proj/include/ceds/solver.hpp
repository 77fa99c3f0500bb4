#ifndef CEDS_SOLVER_HPP
#define CEDS_SOLVER_HPP

#include "ceds/bv.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ceds {

struct SatResult {
    enum class Kind { Sat, Unsat, Unknown, Error };
    Kind kind = Kind::Unknown;
    std::string message;

    static SatResult sat() { return {Kind::Sat, {}}; }
    static SatResult unsat() { return {Kind::Unsat, {}}; }
    static SatResult unknown(std::string msg = {}) { return {Kind::Unknown, std::move(msg)}; }
    static SatResult error(std::string msg) { return {Kind::Error, std::move(msg)}; }

    bool is_sat() const { return kind == Kind::Sat; }
    bool is_unsat() const { return kind == Kind::Unsat; }
    bool decided() const { return kind == Kind::Sat || kind == Kind::Unsat; }
};

struct BackendConfig {
    enum class Kind { Enumeration, External };
    Kind kind = Kind::Enumeration;

    // enumeration: refuse queries whose total free+bound bit count exceeds this
    uint32_t max_domain_bits = 24;

    // external solver process
    std::string solver_path;
    std::vector<std::string> solver_args = {"-in"};
    int timeout_ms = 60000;

    static BackendConfig enumeration(uint32_t cap_bits = 24) {
        BackendConfig c;
        c.kind = Kind::Enumeration;
        c.max_domain_bits = cap_bits;
        return c;
    }
    static BackendConfig external(std::string path) {
        BackendConfig c;
        c.kind = Kind::External;
        c.solver_path = std::move(path);
        return c;
    }
};

// The one query shape both backends understand:
//
//   prefix  ∧  ∀ bound ( hyp  ⇒  ⋁ (x_i ≠ y_i) )
//
// Emptiness checks use only `prefix`; equality checks use the full form.
struct SatQuery {
    std::vector<Term> prefix;
    bool has_forall = false;
    std::vector<BoundVar> bound;
    std::vector<Term> hyp;
    std::vector<std::pair<Term, Term>> diffs; // (left var, right var)

    static SatQuery of(const Conjunction& c) {
        SatQuery q;
        q.prefix = c.clauses();
        return q;
    }

    Term to_term() const;
};

class SatBackend {
public:
    virtual ~SatBackend() = default;
    virtual SatResult check(const SatQuery& q) = 0;
};

// Exhaustive evaluation over all assignments at small widths, with clause-level
// pruning along the search. Complete and deterministic; never returns Unknown.
// Throws DomainTooLarge past the configured cap.
class EnumerationBackend : public SatBackend {
public:
    explicit EnumerationBackend(uint32_t max_domain_bits = 24)
        : max_domain_bits_(max_domain_bits) {}
    SatResult check(const SatQuery& q) override;

private:
    uint32_t max_domain_bits_;
};

// One persistent solver child process, reused across queries via (reset). A
// crashed child is respawned once per query before giving up.
class SolverSession {
public:
    explicit SolverSession(BackendConfig cfg);
    ~SolverSession();
    SolverSession(const SolverSession&) = delete;
    SolverSession& operator=(const SolverSession&) = delete;

    SatResult check_script(const std::string& script);

    struct Stats {
        uint64_t spawns = 0;
        uint64_t queries = 0;
        uint64_t respawns = 0;
    };
    const Stats& stats() const { return stats_; }

    // test hook: pid of the running child, -1 if none
    long child_pid() const { return pid_; }

private:
    void spawn();
    void shutdown(bool graceful);
    bool send_all(const std::string& data);
    // reads one verdict line; empty optional on EOF/timeout-as-dead
    std::optional<std::string> read_line(int timeout_ms, bool& timed_out);
    SatResult attempt(const std::string& script, bool& dead);

    BackendConfig cfg_;
    Stats stats_;
    long pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffered_;
};

class ExternalBackend : public SatBackend {
public:
    explicit ExternalBackend(BackendConfig cfg) : session_(std::move(cfg)) {}
    SatResult check(const SatQuery& q) override;
    SolverSession& session() { return session_; }

private:
    SolverSession session_;
};

std::unique_ptr<SatBackend> make_backend(const BackendConfig& cfg);

// Split nested conjunctions into a clause list (test and query plumbing).
std::vector<Term> split_conjuncts(const Term& t);

} // namespace ceds

#endif
