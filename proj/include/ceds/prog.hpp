#ifndef CEDS_PROG_HPP
#define CEDS_PROG_HPP

#include "ceds/errors.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ceds {

// Expression tree of the mini-IR. Variables are indices into the owning
// function's variable table after resolution; width 0 marks Boolean
// (condition) nodes.
struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
    enum class Kind {
        Var,
        Literal,
        Add,
        Mul,
        UDiv,
        Mod,
        BitAnd,
        BitOr,
        BitXor,
        Shl,
        LShr,
        Concat,
        Extract,
        Eq,
        Ule,
        Sle,
        Not,
        LAnd,
        LOr,
    };
    Kind kind;
    uint32_t width = 0;
    int var = -1;
    std::string name;    // unresolved variable name, kept for diagnostics
    uint64_t literal = 0;
    uint32_t ex_n = 0;   // Extract: bit count
    uint32_t ex_p = 0;   // Extract: start position
    ExprPtr a, b;
    int line = 0, col = 0;
};

struct Instr {
    enum class Kind { Assign, Input, Branch, Assert, Call, Return, Spawn, Join, Halt };
    Kind kind = Kind::Halt;
    int dst = -1;               // Assign/Input/Call destination variable
    ExprPtr expr;               // Assign rhs / Branch cond / Assert cond / Return value
    int target_true = -1;       // Branch
    int target_false = -1;
    int callee = -1;            // Call / Spawn
    std::vector<ExprPtr> args;  // Call
    int line = 0;
    // names kept from parsing until the resolution pass runs
    std::string name_of_dst;
    std::string name_of_callee;
};

struct VarDecl {
    std::string name;
    uint32_t width = 0;
    bool is_param = false;
};

struct Function {
    std::string name;
    uint32_t n_params = 0;
    std::vector<VarDecl> vars; // params first, then locals
    std::vector<Instr> body;
    int return_width = -1;     // -1: no value returned

    int var_index(const std::string& n) const;
};

struct Program {
    std::vector<Function> functions;
    int entry = -1;

    const Function& main() const { return functions[static_cast<size_t>(entry)]; }
    int function_index(const std::string& n) const;
};

// Parse and statically check a mini-IR source text. Throws ParseError with
// line/column on the first problem: syntax, undeclared variable, width
// mismatch, recursive call graph.
Program parse_program(const std::string& text);

// Canonical re-print of a parsed program; parse(print(p)) has the same
// structure as p.
std::string print_program(const Program& p);

std::string print_expr(const Expr& e, const Function& fn);

} // namespace ceds

#endif
