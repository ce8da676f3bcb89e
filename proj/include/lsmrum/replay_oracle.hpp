#pragma once

#include <set>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "lsmrum/types.hpp"

namespace lsmrum::bench {

// Brute-force reference: applies the workload sequentially, keeping only the
// latest location per live object. Independent of every index path it
// verifies.
class ReplayOracle {
public:
    void apply(const WorkloadOp& op) {
        switch (op.kind) {
            case OpKind::Insert:
            case OpKind::Update:
                state_[op.oid] = {op.loc, true};
                break;
            case OpKind::Delete: {
                auto it = state_.find(op.oid);
                if (it == state_.end())
                    state_[op.oid] = {Location{}, false};
                else
                    it->second.alive = false;
                break;
            }
            case OpKind::Query:
                break;
        }
    }

    std::vector<std::pair<ObjectId, Location>> query(const Rect& window) const {
        std::vector<std::pair<ObjectId, Location>> out;
        for (const auto& [oid, st] : state_)
            if (st.alive && window.contains(st.pos)) out.emplace_back(oid, st.pos);
        return out;
    }

    std::size_t live_count() const {
        std::size_t n = 0;
        for (const auto& [oid, st] : state_) n += st.alive ? 1 : 0;
        return n;
    }

private:
    struct State {
        Location pos;
        bool alive = false;
    };
    std::unordered_map<ObjectId, State> state_;
};

// Order-insensitive comparison key for query answers across strategies.
using ResultKey = std::tuple<ObjectId, double, double>;

inline std::set<ResultKey> to_result_set(const std::vector<ObjectRecord>& records) {
    std::set<ResultKey> s;
    for (const auto& r : records) s.insert({r.oid, r.loc.x, r.loc.y});
    return s;
}

inline std::set<ResultKey> to_result_set(const std::vector<std::pair<ObjectId, Location>>& items) {
    std::set<ResultKey> s;
    for (const auto& [oid, loc] : items) s.insert({oid, loc.x, loc.y});
    return s;
}

}  // namespace lsmrum::bench
