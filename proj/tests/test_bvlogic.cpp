#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ceds/bv.hpp"
#include "ceds/smtlib.hpp"
#include "support.hpp"

#include <algorithm>
#include <map>
#include <random>

using namespace ceds;

namespace {
VarId pv(uint32_t pos, uint32_t gen = 1) { return VarId{0, pos, gen, Side::Left}; }
Term v4(uint32_t pos, uint32_t gen = 1) { return mk_var(pv(pos, gen), Sort::bitvec(4)); }
} // namespace

TEST_CASE("sort construction enforces the width cap") {
    CHECK_THROWS_AS(Sort::bitvec(0), SortError);
    CHECK_THROWS_AS(Sort::bitvec(65), SortError);
    CHECK(Sort::bitvec(64).width == 64);
    CHECK(Sort::boolean().is_bool());
}

TEST_CASE("ill-sorted construction is rejected") {
    Term a = mk_const(1, 4);
    Term b = mk_const(1, 8);
    CHECK_THROWS_AS(mk_add(a, b), SortError);
    CHECK_THROWS_AS(mk_eq(a, b), SortError);
    CHECK_THROWS_AS(mk_not(a), SortError);
    CHECK_THROWS_AS(mk_and(mk_bool(true), a), SortError);
    CHECK_THROWS_AS(mk_extract(a, 3, 2), SortError);
    CHECK_THROWS_AS(mk_const(16, 4), SortError);
    CHECK_THROWS_AS(mk_add(mk_bool(true), mk_bool(true)), SortError);
    // same variable at two sorts
    CHECK_THROWS_AS(mk_eq(mk_var(pv(0), Sort::bitvec(4)),
                          mk_bvand(mk_var(pv(0), Sort::bitvec(8)), mk_const(1, 8))),
                    SortError);
}

TEST_CASE("constant evaluation") {
    Assignment empty;
    CHECK(evaluate(mk_eq(mk_const(3, 4), mk_add(mk_const(1, 4), mk_const(2, 4))), empty) == 1);
    // -1 <=s 0 in two's complement
    CHECK(evaluate(mk_sle(mk_const(0b1111, 4), mk_const(0, 4)), empty) == 1);
    // division by zero is all-ones
    CHECK(evaluate(mk_udiv(mk_const(5, 4), mk_const(0, 4)), empty) == 15);
    CHECK(evaluate(mk_udiv(mk_const(5, 4), mk_const(2, 4)), empty) == 2);
}

TEST_CASE("wrap-around and shift semantics") {
    Assignment empty;
    CHECK(evaluate(mk_add(mk_const(15, 4), mk_const(2, 4)), empty) == 1);
    CHECK(evaluate(mk_mul(mk_const(9, 4), mk_const(3, 4)), empty) == 11);
    CHECK(evaluate(mk_shl(mk_const(1, 4), mk_const(5, 4)), empty) == 0);
    CHECK(evaluate(mk_lshr(mk_const(8, 4), mk_const(9, 4)), empty) == 0);
    CHECK(evaluate(mk_concat(mk_const(0b10, 2), mk_const(0b01, 2)), empty) == 0b1001);
    CHECK(evaluate(mk_extract(mk_const(0b1101, 4), 2, 1), empty) == 0b10);
}

TEST_CASE("mod lowers to the udiv identity and matches bvurem") {
    Assignment empty;
    for (uint64_t x = 0; x < 16; ++x)
        for (uint64_t k = 0; k < 16; ++k) {
            uint64_t expect = k == 0 ? x : x % k;
            CHECK(evaluate(mk_mod(mk_const(x, 4), mk_const(k, 4)), empty) == expect);
        }
}

TEST_CASE("evaluation requires every free variable") {
    Term t = mk_eq(v4(0), mk_const(0, 4));
    Assignment mu;
    CHECK_THROWS_AS(evaluate(t, mu), EvalError);
    mu.set(pv(0), Sort::bitvec(4), 0);
    CHECK(evaluate(t, mu) == 1);
    CHECK_THROWS_AS(mu.set(pv(1), Sort::bitvec(4), 16), EvalError);
}

TEST_CASE("free variables") {
    Term x = v4(0);
    CHECK(mk_eq(x, mk_const(0, 4))->free_vars().size() == 1);

    // forall removes its bound variables
    VarId y = pv(1);
    Term body = mk_eq(x, mk_var(y, Sort::bitvec(4)));
    Term q = mk_forall({{y, Sort::bitvec(4)}}, body);
    REQUIRE(q->free_vars().size() == 1);
    CHECK(q->free_vars()[0].first == pv(0));

    Term both = mk_and(mk_eq(v4(0), v4(1)), mk_ule(v4(2), v4(3)));
    CHECK(both->free_vars().size() == 4);
}

TEST_CASE("forall evaluates by exhaustive expansion") {
    VarId y = pv(1);
    Sort s2 = Sort::bitvec(2);
    Term yv = mk_var(y, s2);
    Assignment empty;
    // forall y. y <=u 3 holds at width 2
    CHECK(evaluate(mk_forall({{y, s2}}, mk_ule(yv, mk_const(3, 2))), empty) == 1);
    // forall y. y <=u 2 fails (y = 3)
    CHECK(evaluate(mk_forall({{y, s2}}, mk_ule(yv, mk_const(2, 2))), empty) == 0);
}

TEST_CASE("independence is free-variable disjointness") {
    Conjunction xy({mk_eq(v4(0), v4(1))});
    Conjunction z({mk_ule(mk_const(1, 4), v4(2))});
    Conjunction yz({mk_eq(v4(1), v4(2))});
    CHECK(independent(xy, z));
    CHECK_FALSE(independent(xy, yz));
    CHECK_FALSE(independent(xy, xy));
    Conjunction top{};
    CHECK(independent(top, top));
    CHECK(independent(xy, top));
}

TEST_CASE("canonical key ignores clause order and nothing else") {
    Term a = mk_ule(mk_const(1, 4), v4(0));
    Term b = mk_eq(v4(1), v4(2));
    CHECK(Conjunction({a, b}).canonical_key() == Conjunction({b, a}).canonical_key());
    // a > 0 vs a >= 0 must differ
    Term ge = mk_ule(mk_const(0, 4), v4(0));
    CHECK(Conjunction({a}).canonical_key() != Conjunction({ge}).canonical_key());
    // duplicate clauses are a different multiset
    CHECK(Conjunction({a, a}).canonical_key() != Conjunction({a}).canonical_key());
}

TEST_CASE("canonical key is stable under random permutations") {
    test::TermGen gen(42, test::make_pool(5, 0, 3, 2));
    Conjunction base = gen.conjunction(10);
    std::string expect = base.canonical_key();
    std::vector<Term> clauses = base.clauses();
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        std::shuffle(clauses.begin(), clauses.end(), rng);
        CHECK(Conjunction(clauses).canonical_key() == expect);
    }
}

TEST_CASE("canonical keys separate structurally distinct conjunctions") {
    // injective framing: equal keys must mean equal clause multisets
    test::TermGen gen(1234, test::make_pool(4, 0, 2, 2));
    std::map<std::string, std::vector<std::string>> by_key;
    for (int i = 0; i < 100000; ++i) {
        Conjunction c = gen.conjunction(1 + gen.pick(3), 1);
        std::vector<std::string> shape;
        for (const auto& cl : c.clauses())
            shape.push_back(cl->key());
        std::sort(shape.begin(), shape.end());
        auto [it, inserted] = by_key.try_emplace(c.canonical_key(), shape);
        if (!inserted)
            REQUIRE(it->second == shape);
    }
}

TEST_CASE("terms reject quantifiers inside conjunctions") {
    VarId y = pv(1);
    Term q = mk_forall({{y, Sort::bitvec(4)}}, mk_eq(v4(0), mk_var(y, Sort::bitvec(4))));
    CHECK_THROWS_AS(Conjunction({q}), InvariantError);
}

TEST_CASE("smtlib rendering of a one-clause conjunction") {
    Conjunction c({mk_eq(v4(0), mk_const(0, 4))});
    std::string script = smtlib_script(c);
    CHECK(script == "(set-logic BV)\n"
                    "(declare-const L_s0_p0_g1 (_ BitVec 4))\n"
                    "(assert (= L_s0_p0_g1 #x0))\n"
                    "(check-sat)\n");
}

TEST_CASE("smtlib rendering covers sides, binders and odd widths") {
    VarId yr{1, 2, 3, Side::Right};
    Term body = mk_implies(mk_eq(mk_var(yr, Sort::bitvec(3)), mk_const(5, 3)), mk_bool(false));
    Term q = mk_forall({{yr, Sort::bitvec(3)}}, body);
    Term whole = mk_and(mk_eq(v4(0), v4(0)), q);
    std::string script = smtlib_script(whole);
    CHECK(script.find("(forall ((R_s1_p2_g3 (_ BitVec 3)))") != std::string::npos);
    CHECK(script.find("#b101") != std::string::npos);
    CHECK(script.find("(declare-const L_s0_p0_g1 (_ BitVec 4))") != std::string::npos);
    // the bound right variable is not declared
    CHECK(script.find("(declare-const R_") == std::string::npos);
    // deterministic output
    CHECK(script == smtlib_script(whole));
}

TEST_CASE("retag_side renames every variable") {
    Term t = mk_and(mk_eq(v4(0), mk_add(v4(1), mk_const(1, 4))), mk_ule(v4(2), v4(0)));
    Term r = retag_side(t, Side::Right);
    for (const auto& [v, s] : r->free_vars())
        CHECK(v.side == Side::Right);
    CHECK(r->free_vars().size() == t->free_vars().size());
}
