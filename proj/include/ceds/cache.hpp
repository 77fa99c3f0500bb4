#ifndef CEDS_CACHE_HPP
#define CEDS_CACHE_HPP

#include "ceds/solver.hpp"

#include <cstdint>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

namespace ceds {

enum class QueryKind : uint8_t { Emptiness = 0, NotSubseteq = 1 };

struct CacheStats {
    uint64_t hits = 0;
    uint64_t misses = 0;
};

// Verdict memoization keyed on canonical query bytes plus the query kind.
// Shared across emptiness and equality queries and across store types; the
// key is computed before any solver-specific serialization. LRU eviction,
// single mutex so future parallel workers could share one instance.
class QueryCache {
public:
    explicit QueryCache(size_t capacity = 1u << 20) : capacity_(capacity) {}

    std::optional<SatResult::Kind> lookup(QueryKind kind, const std::string& canonical);

    // Only decided verdicts may be stored.
    void insert(QueryKind kind, const std::string& canonical, SatResult::Kind verdict);

    CacheStats stats() const;
    size_t entries() const;

private:
    static std::string full_key(QueryKind kind, const std::string& canonical) {
        std::string k(1, static_cast<char>(kind));
        k += canonical;
        return k;
    }

    using Entry = std::pair<std::string, SatResult::Kind>;

    size_t capacity_;
    mutable std::mutex mu_;
    std::list<Entry> lru_; // front = most recent
    std::unordered_map<std::string, std::list<Entry>::iterator> index_;
    CacheStats stats_;
};

} // namespace ceds

#endif
