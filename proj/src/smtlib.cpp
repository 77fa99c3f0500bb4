#include "ceds/smtlib.hpp"

namespace ceds {

std::string smtlib_var_name(const VarId& v) {
    std::string out = v.side == Side::Right ? "R_" : "L_";
    out += "s" + std::to_string(v.segment) + "_p" + std::to_string(v.position) + "_g" +
           std::to_string(v.generation);
    return out;
}

std::string smtlib_sort(Sort s) {
    return s.is_bool() ? "Bool" : "(_ BitVec " + std::to_string(s.width) + ")";
}

namespace {

std::string smtlib_const(uint64_t value, uint32_t width) {
    if (width % 4 == 0) {
        static const char* digits = "0123456789abcdef";
        std::string hex;
        for (uint32_t nibble = width / 4; nibble > 0; --nibble)
            hex.push_back(digits[(value >> ((nibble - 1) * 4)) & 0xF]);
        return "#x" + hex;
    }
    std::string bits;
    for (uint32_t i = width; i > 0; --i)
        bits.push_back((value >> (i - 1)) & 1 ? '1' : '0');
    return "#b" + bits;
}

const char* smtlib_op(Op op) {
    switch (op) {
    case Op::Eq: return "=";
    case Op::Ule: return "bvule";
    case Op::Sle: return "bvsle";
    case Op::Add: return "bvadd";
    case Op::Mul: return "bvmul";
    case Op::UDiv: return "bvudiv";
    case Op::BvAnd: return "bvand";
    case Op::BvOr: return "bvor";
    case Op::BvXor: return "bvxor";
    case Op::Shl: return "bvshl";
    case Op::LShr: return "bvlshr";
    case Op::Concat: return "concat";
    case Op::Not: return "not";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Implies: return "=>";
    default: return nullptr;
    }
}

void term_rec(const TermNode* t, std::string& out) {
    switch (t->op()) {
    case Op::Var:
        out += smtlib_var_name(t->var());
        return;
    case Op::Const:
        out += smtlib_const(t->value(), t->sort().width);
        return;
    case Op::BoolConst:
        out += t->value() ? "true" : "false";
        return;
    case Op::Extract: {
        uint32_t lo = t->extract_start();
        uint32_t hi = lo + t->sort().width - 1;
        out += "((_ extract " + std::to_string(hi) + " " + std::to_string(lo) + ") ";
        term_rec(t->kids()[0].get(), out);
        out += ")";
        return;
    }
    case Op::Forall: {
        out += "(forall (";
        for (size_t i = 0; i < t->bound().size(); ++i) {
            if (i)
                out += " ";
            out += "(" + smtlib_var_name(t->bound()[i].first) + " " +
                   smtlib_sort(t->bound()[i].second) + ")";
        }
        out += ") ";
        term_rec(t->kids()[0].get(), out);
        out += ")";
        return;
    }
    default: {
        out += "(";
        out += smtlib_op(t->op());
        for (const auto& k : t->kids()) {
            out += " ";
            term_rec(k.get(), out);
        }
        out += ")";
        return;
    }
    }
}

} // namespace

std::string smtlib_term(const Term& t) {
    std::string out;
    term_rec(t.get(), out);
    return out;
}

std::string smtlib_script(const Term& assertion) {
    std::string out = "(set-logic BV)\n";
    for (const auto& [v, sort] : assertion->free_vars())
        out += "(declare-const " + smtlib_var_name(v) + " " + smtlib_sort(sort) + ")\n";
    out += "(assert " + smtlib_term(assertion) + ")\n(check-sat)\n";
    return out;
}

std::string smtlib_script(const Conjunction& c) {
    return smtlib_script(c.term());
}

} // namespace ceds
