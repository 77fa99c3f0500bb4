#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ceds/cache.hpp"
#include "ceds/explore.hpp"
#include "support.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace ceds;

TEST_CASE("insert then lookup round-trips, fresh keys miss") {
    QueryCache cache;
    CHECK_FALSE(cache.lookup(QueryKind::Emptiness, "k1").has_value());
    cache.insert(QueryKind::Emptiness, "k1", SatResult::Kind::Unsat);
    auto hit = cache.lookup(QueryKind::Emptiness, "k1");
    REQUIRE(hit.has_value());
    CHECK(*hit == SatResult::Kind::Unsat);
    CHECK(cache.stats().hits == 1);
    CHECK(cache.stats().misses == 1);
}

TEST_CASE("the kind tag separates emptiness from inclusion verdicts") {
    QueryCache cache;
    cache.insert(QueryKind::Emptiness, "same-bytes", SatResult::Kind::Unsat);
    CHECK_FALSE(cache.lookup(QueryKind::NotSubseteq, "same-bytes").has_value());
    cache.insert(QueryKind::NotSubseteq, "same-bytes", SatResult::Kind::Sat);
    CHECK(*cache.lookup(QueryKind::Emptiness, "same-bytes") == SatResult::Kind::Unsat);
    CHECK(*cache.lookup(QueryKind::NotSubseteq, "same-bytes") == SatResult::Kind::Sat);
}

TEST_CASE("undecided verdicts are not cacheable") {
    QueryCache cache;
    CHECK_THROWS_AS(cache.insert(QueryKind::Emptiness, "k", SatResult::Kind::Unknown),
                    InvariantError);
    CHECK_THROWS_AS(cache.insert(QueryKind::Emptiness, "k", SatResult::Kind::Error),
                    InvariantError);
}

TEST_CASE("clause permutations of one query share a cache entry") {
    for (uint64_t seed = 0; seed < 100; ++seed) {
        test::TermGen gen(seed, test::make_pool(4, 0, 3, 2));
        Conjunction base = gen.conjunction(5);
        QueryCache cache;
        cache.insert(QueryKind::Emptiness, base.canonical_key(), SatResult::Kind::Sat);
        std::vector<Term> clauses = base.clauses();
        std::mt19937_64 rng(seed + 7);
        std::shuffle(clauses.begin(), clauses.end(), rng);
        Conjunction permuted(clauses);
        auto hit = cache.lookup(QueryKind::Emptiness, permuted.canonical_key());
        REQUIRE(hit.has_value());
        CHECK(*hit == SatResult::Kind::Sat);
    }
}

TEST_CASE("capacity evicts the least recently used entry, verdicts never change") {
    QueryCache cache(3);
    cache.insert(QueryKind::Emptiness, "a", SatResult::Kind::Sat);
    cache.insert(QueryKind::Emptiness, "b", SatResult::Kind::Unsat);
    cache.insert(QueryKind::Emptiness, "c", SatResult::Kind::Sat);
    // touch a so b is oldest
    CHECK(cache.lookup(QueryKind::Emptiness, "a").has_value());
    cache.insert(QueryKind::Emptiness, "d", SatResult::Kind::Unsat);
    CHECK(cache.entries() == 3);
    CHECK_FALSE(cache.lookup(QueryKind::Emptiness, "b").has_value());
    CHECK(*cache.lookup(QueryKind::Emptiness, "a") == SatResult::Kind::Sat);
    CHECK(*cache.lookup(QueryKind::Emptiness, "d") == SatResult::Kind::Unsat);
    // re-inserting an existing key refreshes recency without growing
    cache.insert(QueryKind::Emptiness, "a", SatResult::Kind::Sat);
    CHECK(cache.entries() == 3);
}

TEST_CASE("hit and miss counters add up to lookups") {
    QueryCache cache;
    cache.insert(QueryKind::Emptiness, "x", SatResult::Kind::Sat);
    int lookups = 0;
    for (int i = 0; i < 10; ++i, ++lookups)
        cache.lookup(QueryKind::Emptiness, i % 2 ? "x" : "y");
    CHECK(cache.stats().hits + cache.stats().misses == static_cast<uint64_t>(lookups));
}

TEST_CASE("the counting-loop benchmark produces cache hits under the sliced store") {
    const char* dir = std::getenv("CEDS_CORPUS_DIR");
    REQUIRE(dir != nullptr);
    std::ifstream in(std::string(dir) + "/loop_mod3.cir");
    std::stringstream ss;
    ss << in.rdbuf();
    Program p = parse_program(ss.str());
    ExploreConfig cfg;
    cfg.store = StoreKind::Sliced;
    cfg.cache_enabled = true;
    cfg.backend = BackendConfig::enumeration(512);
    ExploreResult r = explore(p, cfg);
    REQUIRE(r.verdict.kind == Verdict::Kind::Safe);
    // the unchanged prologue slice recurs across the loop's emptiness checks
    CHECK(r.cache.hits > 0);
    CHECK(r.cache_entries > 0);

    // transparency: caching changes no verdict and no dedup decision
    cfg.cache_enabled = false;
    ExploreResult off = explore(p, cfg);
    CHECK(off.verdict.kind == r.verdict.kind);
    CHECK(off.ledger.states_stored == r.ledger.states_stored);
    CHECK(off.ledger.states_deduplicated == r.ledger.states_deduplicated);
}

TEST_CASE("sampled revalidation of cache hits stays silent when verdicts agree") {
    const char* dir = std::getenv("CEDS_CORPUS_DIR");
    REQUIRE(dir != nullptr);
    std::ifstream in(std::string(dir) + "/two_phase_loops.cir");
    std::stringstream ss;
    ss << in.rdbuf();
    Program p = parse_program(ss.str());
    ExploreConfig cfg;
    cfg.store = StoreKind::Sliced;
    cfg.cache_enabled = true;
    cfg.backend = BackendConfig::enumeration(512);
    cfg.revalidate_every = 2; // re-check every second hit against the backend
    ExploreResult r = explore(p, cfg);
    CHECK(r.verdict.kind == Verdict::Kind::Safe);
    CHECK(r.cache.hits > 0);
}
