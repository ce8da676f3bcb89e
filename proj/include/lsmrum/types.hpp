#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

namespace lsmrum {

using ObjectId = std::uint64_t;

// Logical timestamp drawn from an engine-local counter. 0 means "never".
using Timestamp = std::uint64_t;
inline constexpr Timestamp kNeverTs = 0;

struct Location {
    double x = 0.0;
    double y = 0.0;

    bool is_finite() const { return std::isfinite(x) && std::isfinite(y); }

    friend bool operator==(const Location& a, const Location& b) {
        return a.x == b.x && a.y == b.y;
    }
};

// Axis-aligned rectangle with closed bounds on all four edges.
struct Rect {
    Location min;
    Location max;

    bool valid() const {
        return min.is_finite() && max.is_finite() && min.x <= max.x && min.y <= max.y;
    }

    bool contains(const Location& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }

    bool contains(const Rect& r) const {
        return r.min.x >= min.x && r.max.x <= max.x && r.min.y >= min.y && r.max.y <= max.y;
    }

    bool intersects(const Rect& r) const {
        return r.min.x <= max.x && r.max.x >= min.x && r.min.y <= max.y && r.max.y >= min.y;
    }

    void expand(const Location& p) {
        if (p.x < min.x) min.x = p.x;
        if (p.y < min.y) min.y = p.y;
        if (p.x > max.x) max.x = p.x;
        if (p.y > max.y) max.y = p.y;
    }

    void expand(const Rect& r) {
        expand(r.min);
        expand(r.max);
    }

    double area() const { return (max.x - min.x) * (max.y - min.y); }

    double enlargement(const Rect& r) const {
        double nx0 = std::min(min.x, r.min.x), ny0 = std::min(min.y, r.min.y);
        double nx1 = std::max(max.x, r.max.x), ny1 = std::max(max.y, r.max.y);
        return (nx1 - nx0) * (ny1 - ny0) - area();
    }

    static Rect of_point(const Location& p) { return Rect{p, p}; }

    friend bool operator==(const Rect& a, const Rect& b) {
        return a.min == b.min && a.max == b.max;
    }
};

// One indexed entry: secondary key (location), primary key, ingestion timestamp.
struct ObjectRecord {
    Location loc;
    ObjectId oid = 0;
    Timestamp ts = kNeverTs;

    friend bool operator==(const ObjectRecord& a, const ObjectRecord& b) {
        return a.loc == b.loc && a.oid == b.oid && a.ts == b.ts;
    }
};

enum class OpKind : std::uint8_t { Insert, Delete, Update, Query };

// One trace event. Field presence follows kind: Query has a window and no
// oid/loc; Delete has no new location; old_loc is carried for the eager
// baseline, which needs it to remove the previous copy.
struct WorkloadOp {
    OpKind kind = OpKind::Insert;
    ObjectId oid = 0;
    Location loc;
    std::optional<Location> old_loc;
    Rect window;
};

class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class StorageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lsmrum
