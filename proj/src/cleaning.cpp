#include "lsmrum/cleaning.hpp"

#include "lsmrum/update_memo.hpp"

namespace lsmrum {

std::size_t BufferedCleaner::on_update(Rtree& tree, RtreeNode* leaf, UpdateMemo& memo,
                                       std::uint64_t update_tick) {
    if (++leaf->update_counter < threshold_) return 0;
    return tree.clean_node(leaf, memo, update_tick);
}

void VacuumCleaner::attach(Rtree& tree) {
    cursor_ = std::make_unique<Rtree::LeafCursor>(tree);
    counter_ = 0;
}

std::size_t VacuumCleaner::on_update(Rtree& tree, UpdateMemo& memo, std::uint64_t update_tick) {
    if (++counter_ < threshold_) return 0;
    counter_ = 0;
    if (!cursor_) return 0;

    // Advance past leaves cleaned within the skip window, at most one lap.
    std::size_t laps = tree.leaf_count();
    while (laps-- > 0) {
        RtreeNode* leaf = cursor_->next();
        if (!leaf) return 0;
        if (skip_recent_ && leaf->last_clean_tick != 0 &&
            update_tick - leaf->last_clean_tick < threshold_)
            continue;
        return tree.clean_node(leaf, memo, update_tick);
    }
    return 0;
}

}  // namespace lsmrum
