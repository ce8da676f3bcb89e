#include "lsmrum/workload.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace lsmrum::bench {

const char* workload_kind_name(WorkloadKind k) {
    switch (k) {
        case WorkloadKind::Checkin: return "checkin";
        case WorkloadKind::Moving: return "moving";
        case WorkloadKind::Pickup: return "pickup";
    }
    return "?";
}

WorkloadKind parse_workload_kind(const std::string& s) {
    if (s == "checkin") return WorkloadKind::Checkin;
    if (s == "moving") return WorkloadKind::Moving;
    if (s == "pickup") return WorkloadKind::Pickup;
    throw std::invalid_argument("unknown workload kind: " + s);
}

namespace {

double clampd(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

struct ObjectState {
    Location pos;
    std::vector<Location> anchors;  // checkin spots
    bool alive = true;
};

}  // namespace

std::vector<WorkloadOp> gen_workload(const GenParams& p) {
    if (p.n_oids == 0 || p.n_ops == 0) throw std::invalid_argument("n_ops and n_oids must be > 0");
    if (p.n_oids > p.n_ops) throw std::invalid_argument("n_oids must be <= n_ops");
    if (p.query_frac < 0 || p.query_frac >= 1 || p.delete_frac < 0 || p.delete_frac >= 1)
        throw std::invalid_argument("fractions must lie in [0, 1)");

    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> ux(p.world.min.x, p.world.max.x);
    std::uniform_real_distribution<double> uy(p.world.min.y, p.world.max.y);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double ex = p.world.max.x - p.world.min.x;
    const double ey = p.world.max.y - p.world.min.y;
    std::normal_distribution<double> step_x(0.0, ex * 0.001);
    std::normal_distribution<double> step_y(0.0, ey * 0.001);
    std::normal_distribution<double> jitter_x(0.0, ex * 0.002);
    std::normal_distribution<double> jitter_y(0.0, ey * 0.002);

    std::vector<ObjectState> objs(p.n_oids);
    std::vector<ObjectId> alive;
    alive.reserve(p.n_oids);
    const std::size_t min_alive = std::max<std::size_t>(1, p.n_oids / 10);

    auto fresh_pos = [&](ObjectState& o) -> Location {
        switch (p.kind) {
            case WorkloadKind::Moving:
                return {clampd(o.pos.x + step_x(rng), p.world.min.x, p.world.max.x),
                        clampd(o.pos.y + step_y(rng), p.world.min.y, p.world.max.y)};
            case WorkloadKind::Checkin: {
                const Location& a = o.anchors[static_cast<std::size_t>(unit(rng) * o.anchors.size()) %
                                              o.anchors.size()];
                return {clampd(a.x + jitter_x(rng), p.world.min.x, p.world.max.x),
                        clampd(a.y + jitter_y(rng), p.world.min.y, p.world.max.y)};
            }
            case WorkloadKind::Pickup:
            default:
                return {ux(rng), uy(rng)};
        }
    };

    std::vector<WorkloadOp> ops;
    ops.reserve(p.n_ops);
    std::size_t spawned = 0;

    for (std::size_t i = 0; i < p.n_ops; ++i) {
        // Spawn all objects across the head of the trace.
        if (spawned < p.n_oids &&
            (i < p.n_oids || spawned * p.n_ops < p.n_oids * (i + 1))) {
            ObjectId oid = spawned++;
            ObjectState& o = objs[oid];
            o.pos = {ux(rng), uy(rng)};
            if (p.kind == WorkloadKind::Checkin) {
                o.anchors.resize(3);
                for (Location& a : o.anchors) a = {ux(rng), uy(rng)};
            }
            alive.push_back(oid);
            ops.push_back(WorkloadOp{OpKind::Insert, oid, o.pos, std::nullopt, {}});
            continue;
        }

        if (p.query_frac > 0 && unit(rng) < p.query_frac && !alive.empty()) {
            const ObjectState& o = objs[alive[static_cast<std::size_t>(unit(rng) * alive.size()) %
                                              alive.size()]];
            double area = std::max(unit(rng), 1e-6) * p.window_area_frac * ex * ey;
            double half = std::sqrt(area) / 2.0;
            WorkloadOp q;
            q.kind = OpKind::Query;
            q.window = Rect{{clampd(o.pos.x - half, p.world.min.x, p.world.max.x),
                             clampd(o.pos.y - half, p.world.min.y, p.world.max.y)},
                            {clampd(o.pos.x + half, p.world.min.x, p.world.max.x),
                             clampd(o.pos.y + half, p.world.min.y, p.world.max.y)}};
            ops.push_back(q);
            continue;
        }

        if (alive.empty()) break;
        std::size_t pick = static_cast<std::size_t>(unit(rng) * alive.size()) % alive.size();
        ObjectId oid = alive[pick];
        ObjectState& o = objs[oid];

        if (p.delete_frac > 0 && alive.size() > min_alive && unit(rng) < p.delete_frac) {
            ops.push_back(WorkloadOp{OpKind::Delete, oid, {}, o.pos, {}});
            o.alive = false;
            alive[pick] = alive.back();
            alive.pop_back();
            continue;
        }

        Location old = o.pos;
        o.pos = fresh_pos(o);
        ops.push_back(WorkloadOp{OpKind::Update, oid, o.pos, old, {}});
    }
    return ops;
}

}  // namespace lsmrum::bench
