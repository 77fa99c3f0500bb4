#include "ceds/cache.hpp"

#include "ceds/errors.hpp"

namespace ceds {

std::optional<SatResult::Kind> QueryCache::lookup(QueryKind kind, const std::string& canonical) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = index_.find(full_key(kind, canonical));
    if (it == index_.end()) {
        ++stats_.misses;
        return std::nullopt;
    }
    lru_.splice(lru_.begin(), lru_, it->second);
    ++stats_.hits;
    return it->second->second;
}

void QueryCache::insert(QueryKind kind, const std::string& canonical, SatResult::Kind verdict) {
    if (verdict != SatResult::Kind::Sat && verdict != SatResult::Kind::Unsat)
        throw InvariantError("only decided verdicts are cacheable");
    std::lock_guard<std::mutex> lock(mu_);
    std::string key = full_key(kind, canonical);
    auto it = index_.find(key);
    if (it != index_.end()) {
        it->second->second = verdict;
        lru_.splice(lru_.begin(), lru_, it->second);
        return;
    }
    lru_.emplace_front(key, verdict);
    index_[key] = lru_.begin();
    if (lru_.size() > capacity_) {
        index_.erase(lru_.back().first);
        lru_.pop_back();
    }
}

CacheStats QueryCache::stats() const {
    std::lock_guard<std::mutex> lock(mu_);
    return stats_;
}

size_t QueryCache::entries() const {
    std::lock_guard<std::mutex> lock(mu_);
    return lru_.size();
}

} // namespace ceds
