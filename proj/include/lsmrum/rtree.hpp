#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "lsmrum/types.hpp"

namespace lsmrum {

class UpdateMemo;

struct RtreeNode {
    Rect mbr = empty_mbr();
    bool is_leaf = true;
    // Buffered-cleaning update counter; reset to 0 on node creation, split,
    // and after a clean. Maintained for leaves only.
    std::uint32_t update_counter = 0;
    // Engine update tick of the most recent clean of this leaf (either
    // strategy); 0 if never cleaned. Used by the vacuum skip-window.
    std::uint64_t last_clean_tick = 0;

    RtreeNode* parent = nullptr;
    std::vector<std::unique_ptr<RtreeNode>> children;  // internal nodes
    std::vector<ObjectRecord> records;                 // leaf nodes

    // Intrusive chain of leaves in creation order; drives the vacuum cursor.
    RtreeNode* prev_leaf = nullptr;
    RtreeNode* next_leaf = nullptr;

    std::size_t entry_count() const { return is_leaf ? records.size() : children.size(); }

    static Rect empty_mbr() {
        constexpr double inf = std::numeric_limits<double>::infinity();
        return Rect{{inf, inf}, {-inf, -inf}};
    }
};

// In-memory R-tree over point records, quadratic split. One writer at a
// time; readers only between writes (the engine serializes with its own
// lock).
class Rtree {
public:
    explicit Rtree(std::size_t node_capacity = 32);
    ~Rtree();

    Rtree(const Rtree&) = delete;
    Rtree& operator=(const Rtree&) = delete;

    // Returns the leaf the record landed in (post-split).
    RtreeNode* insert(const ObjectRecord& rec);

    // Removes one record matching (loc, oid), ignoring ts. Used by the eager
    // baseline, which identifies the victim by its old location plus key.
    bool remove_exact(const Location& loc, ObjectId oid);

    // Appends matches to out; returns the number of leaf records examined.
    std::size_t range_search(const Rect& window, std::vector<ObjectRecord>& out) const;
    std::vector<ObjectRecord> range_search(const Rect& window) const;

    // Removes from `leaf` every record whose memo entry carries a newer
    // timestamp, decrementing the memo count per removal. Resets the leaf's
    // update counter and stamps last_clean_tick. Returns the removal count.
    std::size_t clean_node(RtreeNode* leaf, UpdateMemo& memo, std::uint64_t clean_tick = 0);

    // Records in leaf-chain order (deterministic).
    std::vector<ObjectRecord> all_records() const;

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }
    std::size_t node_capacity() const { return capacity_; }
    std::size_t leaf_count() const { return leaf_count_; }

    RtreeNode* root() { return root_.get(); }
    const RtreeNode* root() const { return root_.get(); }
    RtreeNode* first_leaf() { return leaf_head_; }

    // Cyclic cursor over the leaf chain. Survives splits (new leaves join the
    // chain behind their sibling) and leaf removal (the cursor slides to the
    // next surviving leaf).
    class LeafCursor {
    public:
        explicit LeafCursor(Rtree& tree);
        ~LeafCursor();
        LeafCursor(const LeafCursor&) = delete;
        LeafCursor& operator=(const LeafCursor&) = delete;

        // Returns the current leaf and advances cyclically.
        RtreeNode* next();

    private:
        friend class Rtree;
        Rtree* tree_;
        RtreeNode* pos_;
    };

private:
    friend class LeafCursor;

    RtreeNode* choose_leaf(const Location& p) const;
    void split_node(RtreeNode* node);
    void quadratic_partition(RtreeNode* node, RtreeNode* twin);
    void grow_root(std::unique_ptr<RtreeNode> sibling);
    void refit_upward(RtreeNode* node);
    static void recompute_mbr(RtreeNode* node);
    void prune_if_empty(RtreeNode* leaf);
    void link_leaf_after(RtreeNode* pos, RtreeNode* leaf);
    void unlink_leaf(RtreeNode* leaf);
    std::size_t collect(const RtreeNode* node, const Rect& window,
                        std::vector<ObjectRecord>& out) const;

    std::size_t capacity_;
    std::size_t min_fill_;
    std::size_t size_ = 0;
    std::size_t leaf_count_ = 0;
    std::unique_ptr<RtreeNode> root_;
    RtreeNode* leaf_head_ = nullptr;  // first leaf in chain
    std::vector<LeafCursor*> cursors_;
};

}  // namespace lsmrum
