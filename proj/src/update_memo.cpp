#include "lsmrum/update_memo.hpp"

#include <cassert>

namespace lsmrum {

void UpdateMemo::note_insert() {
    std::size_t s = size_.fetch_add(1, std::memory_order_relaxed) + 1;
    std::size_t m = max_size_.load(std::memory_order_relaxed);
    while (m < s && !max_size_.compare_exchange_weak(m, s, std::memory_order_relaxed)) {
    }
}

UpdateMemo::EntryPtr UpdateMemo::put_if_absent(ObjectId oid, Timestamp ts, std::int64_t cnt) {
    Stripe& st = stripe_for(oid);
    std::lock_guard<std::mutex> lock(st.mu);
    auto it = st.map.find(oid);
    if (it != st.map.end()) return it->second;
    st.map.emplace(oid, std::make_shared<Entry>(ts, cnt));
    note_insert();
    return nullptr;
}

Timestamp UpdateMemo::cils_entry(Entry& e, Timestamp val) {
    Timestamp curr = e.ts.load(std::memory_order_relaxed);
    while (true) {
        if (curr >= val) return curr;
        if (e.ts.compare_exchange_weak(curr, val, std::memory_order_acq_rel)) return val;
        spins_.fetch_add(1, std::memory_order_relaxed);
        // curr was reloaded by the failed CAS; try again.
    }
}

Timestamp UpdateMemo::cils(ObjectId oid, Timestamp val) {
    EntryPtr e;
    {
        Stripe& st = stripe_for(oid);
        std::lock_guard<std::mutex> lock(st.mu);
        auto it = st.map.find(oid);
        if (it == st.map.end()) throw ContractViolation("cils: no memo entry for oid");
        e = it->second;
    }
    return cils_entry(*e, val);
}

std::int64_t UpdateMemo::dec_cnt(ObjectId oid) {
    EntryPtr e;
    {
        Stripe& st = stripe_for(oid);
        std::lock_guard<std::mutex> lock(st.mu);
        auto it = st.map.find(oid);
        if (it == st.map.end()) throw ContractViolation("dec_cnt: no memo entry for oid");
        e = it->second;
    }
    std::int64_t ret = e->cnt.fetch_sub(1, std::memory_order_acq_rel) - 1;
    assert(ret >= 0 && "memo cnt went negative");
    return ret;
}

bool UpdateMemo::inc_cnt_if_mapped(ObjectId oid, const EntryPtr& e) {
    Stripe& st = stripe_for(oid);
    std::lock_guard<std::mutex> lock(st.mu);
    auto it = st.map.find(oid);
    if (it == st.map.end() || it->second != e) return false;
    e->cnt.fetch_add(1, std::memory_order_relaxed);
    return true;
}

bool UpdateMemo::remove_if_zero(ObjectId oid) {
    Stripe& st = stripe_for(oid);
    std::lock_guard<std::mutex> lock(st.mu);
    auto it = st.map.find(oid);
    if (it == st.map.end()) return false;
    if (it->second->cnt.load(std::memory_order_acquire) != 0) return false;
    st.map.erase(it);
    size_.fetch_sub(1, std::memory_order_relaxed);
    return true;
}

void UpdateMemo::record_obsolete(ObjectId oid, Timestamp ts) {
    // Entry present: advance its timestamp, then account for one more
    // obsolete copy. The increment must not land on an entry a concurrent
    // clean already unmapped (that would lose the count for good), so it is
    // conditional on the mapping; if the entry vanished mid-flight the loop
    // re-creates it with the CILS-resolved timestamp.
    Timestamp v = ts;
    while (true) {
        EntryPtr ret = put_if_absent(oid, v, 1);
        if (!ret) return;
        Timestamp curr = cils_entry(*ret, v);
        if (inc_cnt_if_mapped(oid, ret)) return;
        v = curr;
    }
}

std::int64_t UpdateMemo::clean_one(ObjectId oid) {
    std::int64_t ret = dec_cnt(oid);
    if (ret == 0) remove_if_zero(oid);
    return ret;
}

std::vector<ObjectRecord> UpdateMemo::validate(const std::vector<ObjectRecord>& candidates) const {
    std::vector<ObjectRecord> results;
    results.reserve(candidates.size());
    for (const ObjectRecord& cand : candidates) {
        auto e = lookup(cand.oid);
        if (!e || cand.ts == e->first) {
            results.push_back(cand);
        } else if (cand.ts > e->first) {
            anomalies_.fetch_add(1, std::memory_order_relaxed);
        }
        // cand.ts < e->ts: obsolete copy, discarded
    }
    return results;
}

std::optional<std::pair<Timestamp, std::int64_t>> UpdateMemo::lookup(ObjectId oid) const {
    const Stripe& st = stripe_for(oid);
    std::lock_guard<std::mutex> lock(st.mu);
    auto it = st.map.find(oid);
    if (it == st.map.end()) return std::nullopt;
    return std::make_pair(it->second->ts.load(std::memory_order_acquire),
                          it->second->cnt.load(std::memory_order_acquire));
}

std::vector<std::tuple<ObjectId, Timestamp, std::int64_t>> UpdateMemo::snapshot() const {
    std::vector<std::tuple<ObjectId, Timestamp, std::int64_t>> out;
    out.reserve(size());
    for (const Stripe& st : stripes_) {
        std::lock_guard<std::mutex> lock(st.mu);
        for (const auto& [oid, e] : st.map)
            out.emplace_back(oid, e->ts.load(std::memory_order_acquire),
                             e->cnt.load(std::memory_order_acquire));
    }
    return out;
}

void UpdateMemo::clear() {
    for (Stripe& st : stripes_) {
        std::lock_guard<std::mutex> lock(st.mu);
        st.map.clear();
    }
    size_.store(0, std::memory_order_relaxed);
}

}  // namespace lsmrum
