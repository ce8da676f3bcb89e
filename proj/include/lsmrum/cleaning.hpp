#pragma once

#include <cstdint>
#include <memory>

#include "lsmrum/rtree.hpp"

namespace lsmrum {

class UpdateMemo;

// Per-leaf update-counter cleaning. The hook runs after the update's record
// has landed in `leaf`; once the counter reaches the threshold the leaf is
// purged of obsolete records and the counter resets.
class BufferedCleaner {
public:
    explicit BufferedCleaner(std::uint32_t threshold) : threshold_(threshold) {}

    std::size_t on_update(Rtree& tree, RtreeNode* leaf, UpdateMemo& memo, std::uint64_t update_tick);

    std::uint32_t threshold() const { return threshold_; }

private:
    std::uint32_t threshold_;
};

// Global-counter cleaning with a cyclic leaf cursor, so cold leaves whose
// records were obsoleted by updates elsewhere still get purged. With N
// leaves and threshold th a full cleaning cycle takes at most N*th updates.
class VacuumCleaner {
public:
    VacuumCleaner(std::uint32_t threshold, bool skip_recent)
        : threshold_(threshold), skip_recent_(skip_recent) {}

    // Binds the cursor to a (fresh) memory tree, starting at its first leaf.
    void attach(Rtree& tree);

    std::size_t on_update(Rtree& tree, UpdateMemo& memo, std::uint64_t update_tick);

    std::uint32_t counter() const { return counter_; }
    std::uint32_t threshold() const { return threshold_; }

private:
    std::uint32_t threshold_;
    bool skip_recent_;
    std::uint32_t counter_ = 0;
    std::unique_ptr<Rtree::LeafCursor> cursor_;
};

}  // namespace lsmrum
