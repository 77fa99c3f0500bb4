#include "ceds/prog.hpp"

#include "ceds/bv.hpp"

#include <map>
#include <set>

namespace ceds {

int Function::var_index(const std::string& n) const {
    for (size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == n)
            return static_cast<int>(i);
    return -1;
}

int Program::function_index(const std::string& n) const {
    for (size_t i = 0; i < functions.size(); ++i)
        if (functions[i].name == n)
            return static_cast<int>(i);
    return -1;
}

namespace {

// --- lexer ---------------------------------------------------------------------

enum class Tok {
    Ident,
    Number,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Colon,
    Semi,
    Comma,
    Assign,  // =
    EqEq,    // ==
    Uleq,    // <=u
    Sleq,    // <=s
    Bang,    // !
    AndAnd,
    OrOr,
    Plus,
    PlusPlus,
    Star,
    DivU,    // /u
    Percent,
    Amp,
    Pipe,
    Caret,
    Shl,
    ShrU,    // >>u
    End,
};

struct Token {
    Tok kind;
    std::string text;
    uint64_t number = 0;
    int line = 1, col = 1;
};

std::vector<Token> lex(const std::string& text) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto bump = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (text[i + k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        i += n;
    };
    auto push = [&](Tok kind, size_t n, std::string t = {}) {
        out.push_back({kind, std::move(t), 0, line, col});
        bump(n);
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            bump(1);
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n')
                bump(1);
            continue;
        }
        if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < text.size() &&
                   (isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                ++j;
            push(Tok::Ident, j - i, text.substr(i, j - i));
            continue;
        }
        if (isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            int base = 10;
            if (c == '0' && j + 1 < text.size() && (text[j + 1] == 'x' || text[j + 1] == 'b')) {
                base = text[j + 1] == 'x' ? 16 : 2;
                j += 2;
            }
            size_t digits_start = j;
            uint64_t value = 0;
            while (j < text.size() && isalnum(static_cast<unsigned char>(text[j]))) {
                char d = static_cast<char>(tolower(text[j]));
                int dv;
                if (d >= '0' && d <= '9')
                    dv = d - '0';
                else if (d >= 'a' && d <= 'f')
                    dv = d - 'a' + 10;
                else
                    throw ParseError(line, col, "bad digit in number literal");
                if (dv >= base)
                    throw ParseError(line, col, "bad digit in number literal");
                if (value > (UINT64_MAX - static_cast<uint64_t>(dv)) / static_cast<uint64_t>(base))
                    throw ParseError(line, col, "number literal exceeds 64 bits");
                value = value * static_cast<uint64_t>(base) + static_cast<uint64_t>(dv);
                ++j;
            }
            if (j == digits_start)
                throw ParseError(line, col, "empty number literal");
            out.push_back({Tok::Number, text.substr(i, j - i), value, line, col});
            bump(j - i);
            continue;
        }
        switch (c) {
        case '(': push(Tok::LParen, 1); continue;
        case ')': push(Tok::RParen, 1); continue;
        case '{': push(Tok::LBrace, 1); continue;
        case '}': push(Tok::RBrace, 1); continue;
        case ':': push(Tok::Colon, 1); continue;
        case ';': push(Tok::Semi, 1); continue;
        case ',': push(Tok::Comma, 1); continue;
        case '%': push(Tok::Percent, 1); continue;
        case '*': push(Tok::Star, 1); continue;
        case '^': push(Tok::Caret, 1); continue;
        case '!': push(Tok::Bang, 1); continue;
        case '+':
            if (i + 1 < text.size() && text[i + 1] == '+')
                push(Tok::PlusPlus, 2);
            else
                push(Tok::Plus, 1);
            continue;
        case '=':
            if (i + 1 < text.size() && text[i + 1] == '=')
                push(Tok::EqEq, 2);
            else
                push(Tok::Assign, 1);
            continue;
        case '&':
            if (i + 1 < text.size() && text[i + 1] == '&')
                push(Tok::AndAnd, 2);
            else
                push(Tok::Amp, 1);
            continue;
        case '|':
            if (i + 1 < text.size() && text[i + 1] == '|')
                push(Tok::OrOr, 2);
            else
                push(Tok::Pipe, 1);
            continue;
        case '<':
            if (i + 2 < text.size() && text[i + 1] == '=' &&
                (text[i + 2] == 'u' || text[i + 2] == 's'))
                push(text[i + 2] == 'u' ? Tok::Uleq : Tok::Sleq, 3);
            else if (i + 1 < text.size() && text[i + 1] == '<')
                push(Tok::Shl, 2);
            else
                throw ParseError(line, col, "expected <=u, <=s or <<");
            continue;
        case '>':
            if (i + 2 < text.size() && text[i + 1] == '>' && text[i + 2] == 'u')
                push(Tok::ShrU, 3);
            else
                throw ParseError(line, col, "expected >>u");
            continue;
        case '/':
            if (i + 1 < text.size() && text[i + 1] == 'u')
                push(Tok::DivU, 2);
            else
                throw ParseError(line, col, "expected /u");
            continue;
        default:
            throw ParseError(line, col, std::string("unexpected character '") + c + "'");
        }
    }
    out.push_back({Tok::End, {}, 0, line, col});
    return out;
}

// --- parser --------------------------------------------------------------------

struct Parser {
    std::vector<Token> toks;
    size_t pos = 0;

    const Token& cur() const { return toks[pos]; }
    Token take() { return toks[pos < toks.size() - 1 ? pos++ : pos]; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(cur().line, cur().col, msg);
    }
    Token expect(Tok kind, const char* what) {
        if (cur().kind != kind)
            fail(std::string("expected ") + what);
        return take();
    }
    bool accept(Tok kind) {
        if (cur().kind != kind)
            return false;
        take();
        return true;
    }
    bool at_keyword(const char* kw) const {
        return cur().kind == Tok::Ident && cur().text == kw;
    }
    void expect_keyword(const char* kw) {
        if (!at_keyword(kw))
            fail(std::string("expected '") + kw + "'");
        take();
    }

    uint32_t parse_width_name(const Token& t) {
        if (t.kind != Tok::Ident || t.text.size() < 2 || t.text[0] != 'u')
            throw ParseError(t.line, t.col, "expected a width like u8");
        uint32_t w = 0;
        for (size_t k = 1; k < t.text.size(); ++k) {
            if (!isdigit(static_cast<unsigned char>(t.text[k])))
                throw ParseError(t.line, t.col, "expected a width like u8");
            w = w * 10 + static_cast<uint32_t>(t.text[k] - '0');
        }
        if (w < 1 || w > 64)
            throw ParseError(t.line, t.col, "width must be in [1, 64]");
        return w;
    }

    ExprPtr binary(Expr::Kind kind, ExprPtr a, ExprPtr b) {
        auto e = std::make_shared<Expr>();
        e->kind = kind;
        e->line = a->line;
        e->col = a->col;
        e->a = std::move(a);
        e->b = std::move(b);
        return e;
    }

    // EXPR precedence, loosest first: | ^ & (<< >>u) + (* /u %) ++
    ExprPtr parse_expr() { return parse_bitor(); }

    ExprPtr parse_bitor() {
        ExprPtr e = parse_bitxor();
        while (cur().kind == Tok::Pipe) {
            take();
            e = binary(Expr::Kind::BitOr, e, parse_bitxor());
        }
        return e;
    }
    ExprPtr parse_bitxor() {
        ExprPtr e = parse_bitand();
        while (cur().kind == Tok::Caret) {
            take();
            e = binary(Expr::Kind::BitXor, e, parse_bitand());
        }
        return e;
    }
    ExprPtr parse_bitand() {
        ExprPtr e = parse_shift();
        while (cur().kind == Tok::Amp) {
            take();
            e = binary(Expr::Kind::BitAnd, e, parse_shift());
        }
        return e;
    }
    ExprPtr parse_shift() {
        ExprPtr e = parse_sum();
        while (cur().kind == Tok::Shl || cur().kind == Tok::ShrU) {
            Expr::Kind k = cur().kind == Tok::Shl ? Expr::Kind::Shl : Expr::Kind::LShr;
            take();
            e = binary(k, e, parse_sum());
        }
        return e;
    }
    ExprPtr parse_sum() {
        ExprPtr e = parse_product();
        while (cur().kind == Tok::Plus) {
            take();
            e = binary(Expr::Kind::Add, e, parse_product());
        }
        return e;
    }
    ExprPtr parse_product() {
        ExprPtr e = parse_concat();
        while (cur().kind == Tok::Star || cur().kind == Tok::DivU || cur().kind == Tok::Percent) {
            Expr::Kind k = cur().kind == Tok::Star   ? Expr::Kind::Mul
                           : cur().kind == Tok::DivU ? Expr::Kind::UDiv
                                                     : Expr::Kind::Mod;
            take();
            e = binary(k, e, parse_concat());
        }
        return e;
    }
    ExprPtr parse_concat() {
        ExprPtr e = parse_primary();
        while (cur().kind == Tok::PlusPlus) {
            take();
            e = binary(Expr::Kind::Concat, e, parse_primary());
        }
        return e;
    }
    ExprPtr parse_primary() {
        if (accept(Tok::LParen)) {
            ExprPtr e = parse_expr();
            expect(Tok::RParen, ")");
            return e;
        }
        if (cur().kind == Tok::Number) {
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::Literal;
            e->line = cur().line;
            e->col = cur().col;
            e->literal = take().number;
            return e;
        }
        if (at_keyword("extract")) {
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::Extract;
            e->line = cur().line;
            e->col = cur().col;
            take();
            expect(Tok::LParen, "(");
            e->ex_n = static_cast<uint32_t>(expect(Tok::Number, "bit count").number);
            expect(Tok::Comma, ",");
            e->ex_p = static_cast<uint32_t>(expect(Tok::Number, "start position").number);
            expect(Tok::Comma, ",");
            e->a = parse_expr();
            expect(Tok::RParen, ")");
            return e;
        }
        if (cur().kind == Tok::Ident) {
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::Var;
            e->line = cur().line;
            e->col = cur().col;
            e->name = take().text;
            return e;
        }
        fail("expected an expression");
    }

    // COND: || over && over ! over atoms
    ExprPtr parse_cond() { return parse_lor(); }

    ExprPtr parse_lor() {
        ExprPtr e = parse_land();
        while (cur().kind == Tok::OrOr) {
            take();
            e = binary(Expr::Kind::LOr, e, parse_land());
        }
        return e;
    }
    ExprPtr parse_land() {
        ExprPtr e = parse_lnot();
        while (cur().kind == Tok::AndAnd) {
            take();
            e = binary(Expr::Kind::LAnd, e, parse_lnot());
        }
        return e;
    }
    ExprPtr parse_lnot() {
        if (cur().kind == Tok::Bang) {
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::Not;
            e->line = cur().line;
            e->col = cur().col;
            take();
            e->a = parse_lnot();
            return e;
        }
        return parse_cond_atom();
    }
    ExprPtr parse_cond_atom() {
        // `(` may open a parenthesized condition or the left expression of a
        // comparison; try the comparison reading first and backtrack.
        size_t snap = pos;
        try {
            ExprPtr lhs = parse_expr();
            Expr::Kind k;
            if (cur().kind == Tok::EqEq)
                k = Expr::Kind::Eq;
            else if (cur().kind == Tok::Uleq)
                k = Expr::Kind::Ule;
            else if (cur().kind == Tok::Sleq)
                k = Expr::Kind::Sle;
            else
                fail("expected a comparison");
            take();
            ExprPtr rhs = parse_expr();
            return binary(k, lhs, rhs);
        } catch (const ParseError&) {
            pos = snap;
        }
        expect(Tok::LParen, "(");
        ExprPtr e = parse_cond();
        expect(Tok::RParen, ")");
        return e;
    }

    // --- statements ---------------------------------------------------------

    struct PendingBranch {
        size_t instr;
        std::string label_true, label_false;
        int line, col;
    };

    Function parse_function() {
        expect_keyword("fn");
        Function fn;
        fn.name = expect(Tok::Ident, "function name").text;
        expect(Tok::LParen, "(");
        if (cur().kind != Tok::RParen) {
            while (true) {
                VarDecl d;
                d.name = expect(Tok::Ident, "parameter name").text;
                d.is_param = true;
                expect(Tok::Colon, ":");
                d.width = parse_width_name(expect(Tok::Ident, "width"));
                fn.vars.push_back(d);
                ++fn.n_params;
                if (!accept(Tok::Comma))
                    break;
            }
        }
        expect(Tok::RParen, ")");
        expect(Tok::LBrace, "{");

        std::map<std::string, int> labels;
        std::vector<PendingBranch> pending;

        while (!accept(Tok::RBrace)) {
            if (cur().kind == Tok::End)
                fail("unterminated function body");
            if (at_keyword("var")) {
                take();
                VarDecl d;
                d.name = expect(Tok::Ident, "variable name").text;
                if (fn.var_index(d.name) >= 0)
                    fail("duplicate variable '" + d.name + "'");
                expect(Tok::Colon, ":");
                d.width = parse_width_name(expect(Tok::Ident, "width"));
                expect(Tok::Semi, ";");
                fn.vars.push_back(d);
                continue;
            }
            if (at_keyword("label")) {
                take();
                std::string name = expect(Tok::Ident, "label name").text;
                expect(Tok::Colon, ":");
                if (labels.count(name))
                    fail("duplicate label '" + name + "'");
                labels[name] = static_cast<int>(fn.body.size());
                continue;
            }
            Instr ins;
            ins.line = cur().line;
            if (at_keyword("if")) {
                take();
                expect(Tok::LParen, "(");
                ins.kind = Instr::Kind::Branch;
                ins.expr = parse_cond();
                expect(Tok::RParen, ")");
                expect_keyword("goto");
                PendingBranch pb;
                pb.instr = fn.body.size();
                pb.line = cur().line;
                pb.col = cur().col;
                pb.label_true = expect(Tok::Ident, "label").text;
                expect_keyword("else");
                expect_keyword("goto");
                pb.label_false = expect(Tok::Ident, "label").text;
                expect(Tok::Semi, ";");
                pending.push_back(pb);
            } else if (at_keyword("assert")) {
                take();
                expect(Tok::LParen, "(");
                ins.kind = Instr::Kind::Assert;
                ins.expr = parse_cond();
                expect(Tok::RParen, ")");
                expect(Tok::Semi, ";");
            } else if (at_keyword("return")) {
                take();
                ins.kind = Instr::Kind::Return;
                if (!accept(Tok::Semi)) {
                    ins.expr = parse_expr();
                    expect(Tok::Semi, ";");
                }
            } else if (at_keyword("spawn")) {
                take();
                ins.kind = Instr::Kind::Spawn;
                ins.name_of_callee = expect(Tok::Ident, "function name").text;
                expect(Tok::Semi, ";");
            } else if (at_keyword("join")) {
                take();
                ins.kind = Instr::Kind::Join;
                expect(Tok::Semi, ";");
            } else if (at_keyword("halt")) {
                take();
                ins.kind = Instr::Kind::Halt;
                expect(Tok::Semi, ";");
            } else if (cur().kind == Tok::Ident) {
                ins.name_of_dst = take().text;
                expect(Tok::Assign, "=");
                if (at_keyword("nondet")) {
                    take();
                    expect(Tok::LParen, "(");
                    expect(Tok::RParen, ")");
                    ins.kind = Instr::Kind::Input;
                    expect(Tok::Semi, ";");
                } else if (at_keyword("call")) {
                    take();
                    ins.kind = Instr::Kind::Call;
                    ins.name_of_callee = expect(Tok::Ident, "function name").text;
                    expect(Tok::LParen, "(");
                    if (cur().kind != Tok::RParen) {
                        while (true) {
                            ins.args.push_back(parse_expr());
                            if (!accept(Tok::Comma))
                                break;
                        }
                    }
                    expect(Tok::RParen, ")");
                    expect(Tok::Semi, ";");
                } else {
                    ins.kind = Instr::Kind::Assign;
                    ins.expr = parse_expr();
                    expect(Tok::Semi, ";");
                }
            } else {
                fail("expected a statement");
            }
            fn.body.push_back(std::move(ins));
        }

        // running off the end of a body halts the thread
        bool terminated = !fn.body.empty() && (fn.body.back().kind == Instr::Kind::Halt ||
                                               fn.body.back().kind == Instr::Kind::Return);
        if (!terminated) {
            Instr halt;
            halt.kind = Instr::Kind::Halt;
            fn.body.push_back(halt);
        }

        for (const auto& pb : pending) {
            auto lookup = [&](const std::string& l) {
                auto it = labels.find(l);
                if (it == labels.end())
                    throw ParseError(pb.line, pb.col, "unknown label '" + l + "'");
                // a label after the last statement points at the implicit halt
                return std::min(it->second, static_cast<int>(fn.body.size()) - 1);
            };
            fn.body[pb.instr].target_true = lookup(pb.label_true);
            fn.body[pb.instr].target_false = lookup(pb.label_false);
        }
        return fn;
    }
};

// --- static checks and width resolution -----------------------------------------

struct Resolver {
    Program& prog;

    [[noreturn]] static void fail(const Expr& e, const std::string& msg) {
        throw ParseError(e.line, e.col, msg);
    }

    // bottom-up width discovery; -1 = not yet known (pure literal), 0 = Boolean
    int infer(Expr& e, Function& fn) {
        switch (e.kind) {
        case Expr::Kind::Var: {
            if (e.var < 0) {
                e.var = fn.var_index(e.name);
                if (e.var < 0)
                    fail(e, "undeclared variable '" + e.name + "'");
            }
            return static_cast<int>(fn.vars[static_cast<size_t>(e.var)].width);
        }
        case Expr::Kind::Literal:
            return -1;
        case Expr::Kind::Extract: {
            int wa = infer(*e.a, fn);
            if (wa <= 0)
                fail(e, "cannot infer the width of an extract operand");
            if (e.ex_n < 1 || e.ex_p + e.ex_n > static_cast<uint32_t>(wa))
                fail(e, "width mismatch: extract(" + std::to_string(e.ex_n) + ", " +
                            std::to_string(e.ex_p) + ") out of range for u" + std::to_string(wa));
            return static_cast<int>(e.ex_n);
        }
        case Expr::Kind::Concat: {
            int wa = infer(*e.a, fn);
            int wb = infer(*e.b, fn);
            if (wa <= 0 || wb <= 0)
                fail(e, "cannot infer the width of a concat operand");
            if (wa + wb > 64)
                fail(e, "width mismatch: concat result exceeds u64");
            return wa + wb;
        }
        case Expr::Kind::Not:
        case Expr::Kind::LAnd:
        case Expr::Kind::LOr: {
            if (infer(*e.a, fn) != 0)
                fail(*e.a, "operand of a logical operator must be a condition");
            if (e.b && infer(*e.b, fn) != 0)
                fail(*e.b, "operand of a logical operator must be a condition");
            return 0;
        }
        case Expr::Kind::Eq:
        case Expr::Kind::Ule:
        case Expr::Kind::Sle: {
            int w = same_width_pair(e, fn, "comparison");
            if (w < 0)
                fail(e, "cannot infer the width of a comparison between literals");
            return 0;
        }
        default: {
            int w = same_width_pair(e, fn, "arithmetic");
            return w;
        }
        }
    }

    int same_width_pair(Expr& e, Function& fn, const char* what) {
        int wa = infer(*e.a, fn);
        int wb = infer(*e.b, fn);
        if (wa == 0 || wb == 0)
            fail(e, std::string("condition used as a ") + what + " operand");
        if (wa > 0 && wb > 0 && wa != wb)
            fail(e, "width mismatch: u" + std::to_string(wa) + " vs u" + std::to_string(wb));
        return wa > 0 ? wa : wb;
    }

    // top-down: settle literal widths and record per-node widths; w == 0 means
    // the node must be a condition
    void commit(Expr& e, int w, Function& fn) {
        switch (e.kind) {
        case Expr::Kind::Var: {
            int vw = static_cast<int>(fn.vars[static_cast<size_t>(e.var)].width);
            if (w != vw)
                fail(e, "width mismatch: '" + e.name + "' is u" + std::to_string(vw) +
                            ", context wants u" + std::to_string(w));
            e.width = static_cast<uint32_t>(w);
            return;
        }
        case Expr::Kind::Literal: {
            if (w <= 0)
                fail(e, "literal needs a bit-vector context");
            if (e.literal > width_mask(static_cast<uint32_t>(w)))
                fail(e, "width mismatch: literal " + std::to_string(e.literal) +
                            " does not fit u" + std::to_string(w));
            e.width = static_cast<uint32_t>(w);
            return;
        }
        case Expr::Kind::Extract: {
            if (w != static_cast<int>(e.ex_n))
                fail(e, "width mismatch around extract");
            commit(*e.a, infer(*e.a, fn), fn);
            e.width = e.ex_n;
            return;
        }
        case Expr::Kind::Concat: {
            commit(*e.a, infer(*e.a, fn), fn);
            commit(*e.b, infer(*e.b, fn), fn);
            e.width = static_cast<uint32_t>(w);
            return;
        }
        case Expr::Kind::Not:
        case Expr::Kind::LAnd:
        case Expr::Kind::LOr: {
            if (w != 0)
                fail(e, "condition used in a bit-vector context");
            commit(*e.a, 0, fn);
            if (e.b)
                commit(*e.b, 0, fn);
            e.width = 0;
            return;
        }
        case Expr::Kind::Eq:
        case Expr::Kind::Ule:
        case Expr::Kind::Sle: {
            if (w != 0)
                fail(e, "comparison used in a bit-vector context");
            int wop = same_width_pair(e, fn, "comparison");
            commit(*e.a, wop, fn);
            commit(*e.b, wop, fn);
            e.width = 0;
            return;
        }
        default: {
            if (w <= 0)
                fail(e, "bit-vector expression used as a condition");
            commit(*e.a, w, fn);
            commit(*e.b, w, fn);
            e.width = static_cast<uint32_t>(w);
            return;
        }
        }
    }

    void resolve_with_context(ExprPtr& e, int w, Function& fn) {
        infer(*e, fn);
        commit(*e, w, fn);
    }

    int resolve_dst(Instr& ins, Function& fn) {
        ins.dst = fn.var_index(ins.name_of_dst);
        if (ins.dst < 0)
            throw ParseError(ins.line, 1, "undeclared variable '" + ins.name_of_dst + "'");
        return static_cast<int>(fn.vars[static_cast<size_t>(ins.dst)].width);
    }

    void run() {
        // callee indices first so the call graph can be checked before any
        // width reasoning
        for (auto& fn : prog.functions) {
            for (auto& ins : fn.body) {
                if (ins.kind != Instr::Kind::Call && ins.kind != Instr::Kind::Spawn)
                    continue;
                ins.callee = prog.function_index(ins.name_of_callee);
                if (ins.callee < 0)
                    throw ParseError(ins.line, 1, "unknown function '" + ins.name_of_callee + "'");
            }
        }
        check_no_recursion();

        // return widths next: call sites in other functions depend on them
        for (auto& fn : prog.functions) {
            for (auto& ins : fn.body) {
                if (ins.kind != Instr::Kind::Return || !ins.expr)
                    continue;
                int w = infer(*ins.expr, fn);
                if (w <= 0)
                    throw ParseError(ins.line, 1, "cannot infer the returned width");
                if (fn.return_width >= 0 && fn.return_width != w)
                    throw ParseError(ins.line, 1, "width mismatch between return statements");
                fn.return_width = w;
                commit(*ins.expr, w, fn);
            }
        }

        for (auto& fn : prog.functions) {
            for (auto& ins : fn.body) {
                switch (ins.kind) {
                case Instr::Kind::Assign: {
                    int w = resolve_dst(ins, fn);
                    resolve_with_context(ins.expr, w, fn);
                    break;
                }
                case Instr::Kind::Input:
                    resolve_dst(ins, fn);
                    break;
                case Instr::Kind::Branch:
                case Instr::Kind::Assert:
                    resolve_with_context(ins.expr, 0, fn);
                    break;
                case Instr::Kind::Call: {
                    int w = resolve_dst(ins, fn);
                    Function& callee = prog.functions[static_cast<size_t>(ins.callee)];
                    if (ins.args.size() != callee.n_params)
                        throw ParseError(ins.line, 1,
                                         "call passes " + std::to_string(ins.args.size()) +
                                             " arguments, '" + callee.name + "' takes " +
                                             std::to_string(callee.n_params));
                    for (size_t i = 0; i < ins.args.size(); ++i)
                        resolve_with_context(ins.args[i], static_cast<int>(callee.vars[i].width),
                                             fn);
                    if (callee.return_width < 0)
                        throw ParseError(ins.line, 1,
                                         "'" + callee.name + "' never returns a value");
                    if (callee.return_width != w)
                        throw ParseError(ins.line, 1, "width mismatch: call result is u" +
                                                          std::to_string(callee.return_width) +
                                                          ", destination is u" +
                                                          std::to_string(w));
                    break;
                }
                case Instr::Kind::Spawn: {
                    if (prog.functions[static_cast<size_t>(ins.callee)].n_params != 0)
                        throw ParseError(ins.line, 1, "spawned functions take no parameters");
                    break;
                }
                case Instr::Kind::Return:
                case Instr::Kind::Join:
                case Instr::Kind::Halt:
                    break;
                }
            }
        }

        if (prog.entry < 0)
            throw ParseError(1, 1, "entry function 'main' is missing");
        if (prog.main().n_params != 0)
            throw ParseError(1, 1, "'main' takes no parameters");
    }

    void check_no_recursion() {
        size_t n = prog.functions.size();
        // 0 = unvisited, 1 = on the current path, 2 = done; call depth is
        // statically bounded once this passes
        std::vector<int> state(n, 0);
        auto visit = [&](auto&& self, size_t f) -> void {
            state[f] = 1;
            for (const auto& ins : prog.functions[f].body) {
                if (ins.kind != Instr::Kind::Call)
                    continue;
                size_t callee = static_cast<size_t>(ins.callee);
                if (state[callee] == 1)
                    throw ParseError(ins.line, 1,
                                     "recursion rejected: cycle through '" +
                                         prog.functions[callee].name + "'");
                if (state[callee] == 0)
                    self(self, callee);
            }
            state[f] = 2;
        };
        for (size_t root = 0; root < n; ++root)
            if (state[root] == 0)
                visit(visit, root);
    }
};

} // namespace

Program parse_program(const std::string& text) {
    Parser parser{lex(text)};
    Program prog;
    while (parser.cur().kind != Tok::End) {
        Function fn = parser.parse_function();
        if (prog.function_index(fn.name) >= 0)
            throw ParseError(parser.cur().line, parser.cur().col,
                             "duplicate function '" + fn.name + "'");
        prog.functions.push_back(std::move(fn));
    }
    prog.entry = prog.function_index("main");
    Resolver{prog}.run();
    return prog;
}

// --- printer -------------------------------------------------------------------

namespace {

std::string expr_str(const Expr& e, const Function& fn) {
    auto bin = [&](const char* op) {
        return "(" + expr_str(*e.a, fn) + " " + op + " " + expr_str(*e.b, fn) + ")";
    };
    switch (e.kind) {
    case Expr::Kind::Var: return fn.vars[static_cast<size_t>(e.var)].name;
    case Expr::Kind::Literal: return std::to_string(e.literal);
    case Expr::Kind::Add: return bin("+");
    case Expr::Kind::Mul: return bin("*");
    case Expr::Kind::UDiv: return bin("/u");
    case Expr::Kind::Mod: return bin("%");
    case Expr::Kind::BitAnd: return bin("&");
    case Expr::Kind::BitOr: return bin("|");
    case Expr::Kind::BitXor: return bin("^");
    case Expr::Kind::Shl: return bin("<<");
    case Expr::Kind::LShr: return bin(">>u");
    case Expr::Kind::Concat: return bin("++");
    case Expr::Kind::Extract:
        return "extract(" + std::to_string(e.ex_n) + ", " + std::to_string(e.ex_p) + ", " +
               expr_str(*e.a, fn) + ")";
    case Expr::Kind::Eq: return bin("==");
    case Expr::Kind::Ule: return bin("<=u");
    case Expr::Kind::Sle: return bin("<=s");
    case Expr::Kind::Not: return "!" + expr_str(*e.a, fn);
    case Expr::Kind::LAnd: return bin("&&");
    case Expr::Kind::LOr: return bin("||");
    }
    return "?";
}

} // namespace

std::string print_expr(const Expr& e, const Function& fn) {
    return expr_str(e, fn);
}

std::string print_program(const Program& p) {
    std::string out;
    for (const auto& fn : p.functions) {
        out += "fn " + fn.name + "(";
        for (uint32_t i = 0; i < fn.n_params; ++i) {
            if (i)
                out += ", ";
            out += fn.vars[i].name + ": u" + std::to_string(fn.vars[i].width);
        }
        out += ") {\n";
        for (size_t i = fn.n_params; i < fn.vars.size(); ++i)
            out += "  var " + fn.vars[i].name + ": u" + std::to_string(fn.vars[i].width) + ";\n";

        std::set<int> targets;
        for (const auto& ins : fn.body)
            if (ins.kind == Instr::Kind::Branch) {
                targets.insert(ins.target_true);
                targets.insert(ins.target_false);
            }
        for (size_t i = 0; i < fn.body.size(); ++i) {
            if (targets.count(static_cast<int>(i)))
                out += "label L" + std::to_string(i) + ":\n";
            const Instr& ins = fn.body[i];
            out += "  ";
            switch (ins.kind) {
            case Instr::Kind::Assign:
                out += fn.vars[static_cast<size_t>(ins.dst)].name + " = " +
                       expr_str(*ins.expr, fn) + ";";
                break;
            case Instr::Kind::Input:
                out += fn.vars[static_cast<size_t>(ins.dst)].name + " = nondet();";
                break;
            case Instr::Kind::Branch:
                out += "if (" + expr_str(*ins.expr, fn) + ") goto L" +
                       std::to_string(ins.target_true) + " else goto L" +
                       std::to_string(ins.target_false) + ";";
                break;
            case Instr::Kind::Assert:
                out += "assert(" + expr_str(*ins.expr, fn) + ");";
                break;
            case Instr::Kind::Call: {
                const Function& callee = p.functions[static_cast<size_t>(ins.callee)];
                out += fn.vars[static_cast<size_t>(ins.dst)].name + " = call " + callee.name + "(";
                for (size_t a = 0; a < ins.args.size(); ++a) {
                    if (a)
                        out += ", ";
                    out += expr_str(*ins.args[a], fn);
                }
                out += ");";
                break;
            }
            case Instr::Kind::Return:
                out += ins.expr ? "return " + expr_str(*ins.expr, fn) + ";" : "return;";
                break;
            case Instr::Kind::Spawn:
                out += "spawn " + p.functions[static_cast<size_t>(ins.callee)].name + ";";
                break;
            case Instr::Kind::Join:
                out += "join;";
                break;
            case Instr::Kind::Halt:
                out += "halt;";
                break;
            }
            out += "\n";
        }
        out += "}\n";
    }
    return out;
}

} // namespace ceds
