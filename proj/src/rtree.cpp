#include "lsmrum/rtree.hpp"

#include <algorithm>
#include <cassert>

#include "lsmrum/update_memo.hpp"

namespace lsmrum {

Rtree::Rtree(std::size_t node_capacity)
    : capacity_(std::max<std::size_t>(node_capacity, 2)),
      min_fill_(std::max<std::size_t>(1, capacity_ * 2 / 5)) {
    root_ = std::make_unique<RtreeNode>();
    leaf_head_ = root_.get();
    leaf_count_ = 1;
}

Rtree::~Rtree() {
    for (LeafCursor* c : cursors_) c->tree_ = nullptr;
}

RtreeNode* Rtree::choose_leaf(const Location& p) const {
    RtreeNode* node = root_.get();
    const Rect pr = Rect::of_point(p);
    while (!node->is_leaf) {
        RtreeNode* best = nullptr;
        double best_enl = 0.0, best_area = 0.0;
        for (const auto& child : node->children) {
            double enl = child->mbr.enlargement(pr);
            double area = child->mbr.area();
            if (!best || enl < best_enl || (enl == best_enl && area < best_area)) {
                best = child.get();
                best_enl = enl;
                best_area = area;
            }
        }
        node = best;
    }
    return node;
}

RtreeNode* Rtree::insert(const ObjectRecord& rec) {
    RtreeNode* leaf = choose_leaf(rec.loc);
    leaf->records.push_back(rec);
    leaf->mbr.expand(rec.loc);
    for (RtreeNode* up = leaf->parent; up; up = up->parent) up->mbr.expand(rec.loc);
    ++size_;

    RtreeNode* landed = leaf;
    RtreeNode* node = leaf;
    while (node && node->entry_count() > capacity_) {
        RtreeNode* parent = node->parent;
        bool was_landed = (node == landed);
        split_node(node);
        if (was_landed) {
            // The record may have moved to the new sibling; re-resolve.
            if (std::none_of(landed->records.begin(), landed->records.end(),
                             [&](const ObjectRecord& r) { return r == rec; })) {
                RtreeNode* sib = landed->next_leaf;
                landed = sib;
            }
        }
        node = parent ? parent : root_.get();
        if (node->entry_count() <= capacity_) break;
    }
    return landed;
}

void Rtree::grow_root(std::unique_ptr<RtreeNode> sibling) {
    auto new_root = std::make_unique<RtreeNode>();
    new_root->is_leaf = false;
    std::unique_ptr<RtreeNode> old_root = std::move(root_);
    old_root->parent = new_root.get();
    sibling->parent = new_root.get();
    new_root->children.push_back(std::move(old_root));
    new_root->children.push_back(std::move(sibling));
    recompute_mbr(new_root.get());
    root_ = std::move(new_root);
}

namespace {

Rect entry_rect(const RtreeNode* node, std::size_t i) {
    if (node->is_leaf) return Rect::of_point(node->records[i].loc);
    return node->children[i]->mbr;
}

}  // namespace

void Rtree::split_node(RtreeNode* node) {
    auto twin_owner = std::make_unique<RtreeNode>();
    RtreeNode* twin = twin_owner.get();
    twin->is_leaf = node->is_leaf;
    quadratic_partition(node, twin);

    // Both halves are fresh as far as cleaning is concerned.
    node->update_counter = 0;
    twin->update_counter = 0;
    node->last_clean_tick = 0;
    twin->last_clean_tick = 0;

    if (node->is_leaf) {
        link_leaf_after(node, twin);
        ++leaf_count_;
    } else {
        for (auto& c : twin->children) c->parent = twin;
    }

    recompute_mbr(node);
    recompute_mbr(twin);

    if (node->parent == nullptr) {
        grow_root(std::move(twin_owner));
    } else {
        twin->parent = node->parent;
        node->parent->children.push_back(std::move(twin_owner));
        refit_upward(node->parent);
    }
}

// Guttman's quadratic split: seed with the pair wasting the most area, then
// distribute by largest preference difference, honoring the minimum fill.
void Rtree::quadratic_partition(RtreeNode* node, RtreeNode* twin) {
    const std::size_t n = node->entry_count();
    assert(n >= 2);

    std::size_t seed_a = 0, seed_b = 1;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            Rect u = entry_rect(node, i);
            u.expand(entry_rect(node, j));
            double waste = u.area() - entry_rect(node, i).area() - entry_rect(node, j).area();
            if (waste > worst) {
                worst = waste;
                seed_a = i;
                seed_b = j;
            }
        }
    }

    std::vector<std::size_t> rest;
    rest.reserve(n - 2);
    for (std::size_t i = 0; i < n; ++i)
        if (i != seed_a && i != seed_b) rest.push_back(i);

    Rect box_a = entry_rect(node, seed_a);
    Rect box_b = entry_rect(node, seed_b);
    std::vector<std::size_t> group_a{seed_a}, group_b{seed_b};

    while (!rest.empty()) {
        // Force-assign when one group must take everything left to reach
        // the minimum fill.
        if (group_a.size() + rest.size() == min_fill_) {
            for (std::size_t i : rest) group_a.push_back(i);
            rest.clear();
            break;
        }
        if (group_b.size() + rest.size() == min_fill_) {
            for (std::size_t i : rest) group_b.push_back(i);
            rest.clear();
            break;
        }

        std::size_t pick = 0;
        double best_diff = -1.0;
        for (std::size_t k = 0; k < rest.size(); ++k) {
            double da = box_a.enlargement(entry_rect(node, rest[k]));
            double db = box_b.enlargement(entry_rect(node, rest[k]));
            double diff = std::abs(da - db);
            if (diff > best_diff) {
                best_diff = diff;
                pick = k;
            }
        }
        std::size_t idx = rest[pick];
        rest.erase(rest.begin() + pick);

        double da = box_a.enlargement(entry_rect(node, idx));
        double db = box_b.enlargement(entry_rect(node, idx));
        bool to_a;
        if (da != db)
            to_a = da < db;
        else if (box_a.area() != box_b.area())
            to_a = box_a.area() < box_b.area();
        else
            to_a = group_a.size() <= group_b.size();

        if (to_a) {
            group_a.push_back(idx);
            box_a.expand(entry_rect(node, idx));
        } else {
            group_b.push_back(idx);
            box_b.expand(entry_rect(node, idx));
        }
    }

    std::sort(group_a.begin(), group_a.end());
    std::sort(group_b.begin(), group_b.end());

    if (node->is_leaf) {
        std::vector<ObjectRecord> keep, move;
        keep.reserve(group_a.size());
        move.reserve(group_b.size());
        for (std::size_t i : group_a) keep.push_back(node->records[i]);
        for (std::size_t i : group_b) move.push_back(node->records[i]);
        node->records = std::move(keep);
        twin->records = std::move(move);
    } else {
        std::vector<std::unique_ptr<RtreeNode>> keep, move;
        keep.reserve(group_a.size());
        move.reserve(group_b.size());
        for (std::size_t i : group_a) keep.push_back(std::move(node->children[i]));
        for (std::size_t i : group_b) move.push_back(std::move(node->children[i]));
        node->children = std::move(keep);
        twin->children = std::move(move);
    }
}

void Rtree::recompute_mbr(RtreeNode* node) {
    node->mbr = RtreeNode::empty_mbr();
    if (node->is_leaf) {
        for (const auto& r : node->records) node->mbr.expand(r.loc);
    } else {
        for (const auto& c : node->children) node->mbr.expand(c->mbr);
    }
}

void Rtree::refit_upward(RtreeNode* node) {
    for (; node; node = node->parent) recompute_mbr(node);
}

std::size_t Rtree::collect(const RtreeNode* node, const Rect& window,
                           std::vector<ObjectRecord>& out) const {
    if (node->is_leaf) {
        for (const auto& r : node->records)
            if (window.contains(r.loc)) out.push_back(r);
        return node->records.size();
    }
    std::size_t examined = 0;
    for (const auto& c : node->children)
        if (window.intersects(c->mbr)) examined += collect(c.get(), window, out);
    return examined;
}

std::size_t Rtree::range_search(const Rect& window, std::vector<ObjectRecord>& out) const {
    if (size_ == 0) return 0;
    return collect(root_.get(), window, out);
}

std::vector<ObjectRecord> Rtree::range_search(const Rect& window) const {
    std::vector<ObjectRecord> out;
    range_search(window, out);
    return out;
}

bool Rtree::remove_exact(const Location& loc, ObjectId oid) {
    // Locate a leaf containing a matching record.
    std::vector<RtreeNode*> stack{root_.get()};
    while (!stack.empty()) {
        RtreeNode* node = stack.back();
        stack.pop_back();
        if (node->is_leaf) {
            for (std::size_t i = 0; i < node->records.size(); ++i) {
                if (node->records[i].oid == oid && node->records[i].loc == loc) {
                    node->records.erase(node->records.begin() + i);
                    --size_;
                    recompute_mbr(node);
                    refit_upward(node->parent);
                    prune_if_empty(node);
                    return true;
                }
            }
        } else {
            for (const auto& c : node->children)
                if (c->mbr.contains(loc)) stack.push_back(c.get());
        }
    }
    return false;
}

std::size_t Rtree::clean_node(RtreeNode* leaf, UpdateMemo& memo, std::uint64_t clean_tick) {
    assert(leaf->is_leaf);
    std::size_t removed = 0;
    std::vector<ObjectRecord> kept;
    kept.reserve(leaf->records.size());
    for (const ObjectRecord& rec : leaf->records) {
        auto entry = memo.lookup(rec.oid);
        if (entry && rec.ts < entry->first) {
            memo.clean_one(rec.oid);
            ++removed;
        } else {
            kept.push_back(rec);
        }
    }
    leaf->update_counter = 0;
    leaf->last_clean_tick = clean_tick;
    if (removed > 0) {
        leaf->records = std::move(kept);
        size_ -= removed;
        recompute_mbr(leaf);
        refit_upward(leaf->parent);
        prune_if_empty(leaf);
    }
    return removed;
}

void Rtree::prune_if_empty(RtreeNode* leaf) {
    RtreeNode* node = leaf;
    while (node != root_.get() && node->entry_count() == 0) {
        RtreeNode* parent = node->parent;
        if (node->is_leaf) {
            unlink_leaf(node);
            --leaf_count_;
        }
        auto& sibs = parent->children;
        auto it = std::find_if(sibs.begin(), sibs.end(),
                               [&](const std::unique_ptr<RtreeNode>& c) { return c.get() == node; });
        assert(it != sibs.end());
        sibs.erase(it);
        node = parent;
    }
    refit_upward(node);
    // Collapse a single-child internal root so leaves stay at equal depth.
    while (!root_->is_leaf && root_->children.size() == 1) {
        std::unique_ptr<RtreeNode> child = std::move(root_->children.front());
        child->parent = nullptr;
        root_ = std::move(child);
    }
}

void Rtree::link_leaf_after(RtreeNode* pos, RtreeNode* leaf) {
    leaf->prev_leaf = pos;
    leaf->next_leaf = pos->next_leaf;
    if (pos->next_leaf) pos->next_leaf->prev_leaf = leaf;
    pos->next_leaf = leaf;
}

void Rtree::unlink_leaf(RtreeNode* leaf) {
    for (LeafCursor* c : cursors_)
        if (c->pos_ == leaf) c->pos_ = leaf->next_leaf ? leaf->next_leaf : leaf_head_;
    if (leaf->prev_leaf) leaf->prev_leaf->next_leaf = leaf->next_leaf;
    if (leaf->next_leaf) leaf->next_leaf->prev_leaf = leaf->prev_leaf;
    if (leaf_head_ == leaf) leaf_head_ = leaf->next_leaf;
    for (LeafCursor* c : cursors_)
        if (c->pos_ == leaf) c->pos_ = leaf_head_;
    leaf->prev_leaf = leaf->next_leaf = nullptr;
}

std::vector<ObjectRecord> Rtree::all_records() const {
    std::vector<ObjectRecord> out;
    out.reserve(size_);
    for (const RtreeNode* leaf = leaf_head_; leaf; leaf = leaf->next_leaf)
        out.insert(out.end(), leaf->records.begin(), leaf->records.end());
    return out;
}

Rtree::LeafCursor::LeafCursor(Rtree& tree) : tree_(&tree), pos_(tree.leaf_head_) {
    tree.cursors_.push_back(this);
}

Rtree::LeafCursor::~LeafCursor() {
    if (!tree_) return;
    auto& cs = tree_->cursors_;
    cs.erase(std::remove(cs.begin(), cs.end(), this), cs.end());
}

RtreeNode* Rtree::LeafCursor::next() {
    if (!tree_ || !tree_->leaf_head_) return nullptr;
    if (!pos_) pos_ = tree_->leaf_head_;
    RtreeNode* cur = pos_;
    pos_ = cur->next_leaf ? cur->next_leaf : tree_->leaf_head_;
    return cur;
}

}  // namespace lsmrum
