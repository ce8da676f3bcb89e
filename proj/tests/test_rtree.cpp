#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "lsmrum/rtree.hpp"
#include "lsmrum/update_memo.hpp"

using namespace lsmrum;

namespace {

// Brute-force oracle: linear scan over a shadow list.
std::vector<ObjectRecord> scan_oracle(const std::vector<ObjectRecord>& all, const Rect& w) {
    std::vector<ObjectRecord> out;
    for (const auto& r : all)
        if (w.contains(r.loc)) out.push_back(r);
    return out;
}

std::multiset<std::tuple<double, double, ObjectId, Timestamp>> as_set(
    const std::vector<ObjectRecord>& v) {
    std::multiset<std::tuple<double, double, ObjectId, Timestamp>> s;
    for (const auto& r : v) s.insert({r.loc.x, r.loc.y, r.oid, r.ts});
    return s;
}

Rect random_window(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    double x1 = u(rng), x2 = u(rng), y1 = u(rng), y2 = u(rng);
    return Rect{{std::min(x1, x2), std::min(y1, y2)}, {std::max(x1, x2), std::max(y1, y2)}};
}

// Walks the tree checking MBR tightness, leaf depth, parent links and
// capacity. Returns the record count seen.
std::size_t check_structure(const RtreeNode* node, std::size_t capacity, int depth,
                            int& leaf_depth) {
    REQUIRE(node->entry_count() <= capacity);
    if (node->is_leaf) {
        if (leaf_depth < 0) leaf_depth = depth;
        REQUIRE(leaf_depth == depth);  // height balance
        Rect want = RtreeNode::empty_mbr();
        for (const auto& r : node->records) want.expand(r.loc);
        if (!node->records.empty()) REQUIRE(node->mbr == want);
        return node->records.size();
    }
    REQUIRE(!node->children.empty());
    Rect want = RtreeNode::empty_mbr();
    std::size_t n = 0;
    for (const auto& c : node->children) {
        REQUIRE(c->parent == node);
        want.expand(c->mbr);
        n += check_structure(c.get(), capacity, depth + 1, leaf_depth);
    }
    REQUIRE(node->mbr == want);
    return n;
}

void check_tree(const Rtree& t) {
    int leaf_depth = -1;
    std::size_t n = check_structure(t.root(), t.node_capacity(), 0, leaf_depth);
    REQUIRE(n == t.size());
}

}  // namespace

TEST_SUITE_BEGIN("rtree");

TEST_CASE("insert then query the enclosing window") {
    Rtree t;
    t.insert({{10.0, 10.0}, 1, 1});
    auto got = t.range_search(Rect{{0.0, 0.0}, {20.0, 20.0}});
    REQUIRE(got.size() == 1);
    CHECK(got[0] == ObjectRecord{{10.0, 10.0}, 1, 1});
}

TEST_CASE("disjoint window finds nothing") {
    Rtree t;
    t.insert({{10.0, 10.0}, 1, 1});
    CHECK(t.range_search(Rect{{50.0, 50.0}, {60.0, 60.0}}).empty());
}

TEST_CASE("empty tree returns nothing") {
    Rtree t;
    CHECK(t.range_search(Rect{{-1e9, -1e9}, {1e9, 1e9}}).empty());
}

TEST_CASE("500 random inserts match the scan oracle") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    Rtree t(8);
    std::vector<ObjectRecord> shadow;
    for (int i = 0; i < 500; ++i) {
        ObjectRecord r{{u(rng), u(rng)}, static_cast<ObjectId>(i), static_cast<Timestamp>(i + 1)};
        t.insert(r);
        shadow.push_back(r);
    }
    check_tree(t);
    for (int q = 0; q < 50; ++q) {
        Rect w = random_window(rng, -100.0, 100.0);
        CHECK(as_set(t.range_search(w)) == as_set(scan_oracle(shadow, w)));
    }
}

TEST_CASE("remove_exact removes one matching record") {
    Rtree t;
    t.insert({{10.0, 10.0}, 1, 1});
    CHECK(t.remove_exact({10.0, 10.0}, 1));
    CHECK(t.size() == 0);
    CHECK(t.range_search(Rect{{0.0, 0.0}, {20.0, 20.0}}).empty());
}

TEST_CASE("remove_exact on an empty tree is false") {
    Rtree t;
    CHECK_FALSE(t.remove_exact({1.0, 1.0}, 7));
}

TEST_CASE("remove_exact ignores the timestamp") {
    Rtree t;
    t.insert({{3.0, 3.0}, 9, 123});
    CHECK(t.remove_exact({3.0, 3.0}, 9));
}

TEST_CASE("insert 100 remove 40 matches the set-difference oracle") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    Rtree t(4);
    std::vector<ObjectRecord> shadow;
    for (int i = 0; i < 100; ++i) {
        ObjectRecord r{{u(rng), u(rng)}, static_cast<ObjectId>(i), static_cast<Timestamp>(i + 1)};
        t.insert(r);
        shadow.push_back(r);
    }
    std::shuffle(shadow.begin(), shadow.end(), rng);
    for (int i = 0; i < 40; ++i) {
        CHECK(t.remove_exact(shadow.back().loc, shadow.back().oid));
        shadow.pop_back();
    }
    check_tree(t);
    CHECK(t.size() == 60);
    for (int q = 0; q < 30; ++q) {
        Rect w = random_window(rng, 0.0, 50.0);
        CHECK(as_set(t.range_search(w)) == as_set(scan_oracle(shadow, w)));
    }
}

TEST_CASE("range equivalence holds on a large random tree") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(-180.0, 180.0);
    Rtree t;
    std::vector<ObjectRecord> shadow;
    for (int i = 0; i < 10000; ++i) {
        ObjectRecord r{{u(rng), u(rng) / 2.0}, static_cast<ObjectId>(i % 997),
                       static_cast<Timestamp>(i + 1)};
        t.insert(r);
        shadow.push_back(r);
    }
    check_tree(t);
    for (int q = 0; q < 50; ++q) {
        Rect w = random_window(rng, -90.0, 90.0);
        CHECK(as_set(t.range_search(w)) == as_set(scan_oracle(shadow, w)));
    }
}

TEST_CASE("clean_node removes exactly the stale records") {
    Rtree t;
    UpdateMemo memo;
    RtreeNode* leaf = t.insert({{30.0, 30.0}, 3, 4});
    memo.record_obsolete(3, 7);  // entry <3, t7, 1>

    std::size_t removed = t.clean_node(leaf, memo);
    CHECK(removed == 1);
    CHECK(t.size() == 0);
    CHECK_FALSE(memo.lookup(3).has_value());  // cnt hit 0, entry dropped
}

TEST_CASE("clean_node with no stale records is a no-op") {
    Rtree t;
    UpdateMemo memo;
    RtreeNode* leaf = t.insert({{1.0, 1.0}, 1, 5});
    t.insert({{2.0, 2.0}, 2, 6});
    CHECK(t.clean_node(leaf, memo) == 0);
    CHECK(t.size() == 2);
}

TEST_CASE("clean_node keeps the copy whose timestamp matches the memo") {
    Rtree t;
    UpdateMemo memo;
    RtreeNode* leaf = t.insert({{5.0, 5.0}, 1, 2});
    t.insert({{6.0, 6.0}, 1, 9});
    memo.record_obsolete(1, 9);  // the ts-9 copy is the fresh one

    t.clean_node(leaf, memo);
    auto rest = t.all_records();
    REQUIRE(rest.size() == 1);
    CHECK(rest[0].ts == 9);
    // The lone stale copy was removed, so cnt hit 0 and the entry is gone.
    CHECK_FALSE(memo.lookup(1).has_value());
}

TEST_CASE("clean_node on a random leaf matches the per-oid latest-ts oracle") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Rtree t(64);  // single leaf holds everything
    UpdateMemo memo;
    std::vector<ObjectRecord> recs;
    Timestamp ts = 0;
    for (ObjectId oid = 0; oid < 10; ++oid)
        recs.push_back({{u(rng), u(rng)}, oid, ++ts});
    // Obsolete a random subset by claiming a newer timestamp in the memo.
    std::size_t expect_removed = 0;
    for (ObjectId oid = 0; oid < 10; ++oid) {
        if (u(rng) < 0.5) {
            memo.record_obsolete(oid, ++ts);
            ++expect_removed;
        }
    }
    for (const auto& r : recs) t.insert(r);
    REQUIRE(t.leaf_count() == 1);

    std::size_t removed = t.clean_node(t.first_leaf(), memo);
    CHECK(removed == expect_removed);
    CHECK(memo.size() == 0);  // every stale copy lived in that leaf
    check_tree(t);
}

TEST_CASE("update counters reset on split and clean") {
    Rtree t(4);
    UpdateMemo memo;
    RtreeNode* leaf = t.insert({{0.0, 0.0}, 0, 1});
    leaf->update_counter = 3;
    // Overflow the leaf to force a split; both halves restart at 0.
    t.insert({{1.0, 0.0}, 1, 2});
    t.insert({{0.0, 1.0}, 2, 3});
    t.insert({{10.0, 10.0}, 3, 4});
    t.insert({{11.0, 11.0}, 4, 5});
    REQUIRE(t.leaf_count() == 2);
    for (RtreeNode* l = t.first_leaf(); l; l = l->next_leaf) CHECK(l->update_counter == 0);

    RtreeNode* first = t.first_leaf();
    first->update_counter = 9;
    t.clean_node(first, memo);
    CHECK(first->update_counter == 0);
}

TEST_CASE("leaf cursor cycles through all leaves") {
    Rtree t(2);
    for (int i = 0; i < 6; ++i)
        t.insert({{static_cast<double>(i * 10), 0.0}, static_cast<ObjectId>(i),
                  static_cast<Timestamp>(i + 1)});
    const std::size_t leaves = t.leaf_count();
    REQUIRE(leaves >= 3);

    Rtree::LeafCursor cursor(t);
    std::set<const RtreeNode*> seen;
    for (std::size_t i = 0; i < leaves; ++i) seen.insert(cursor.next());
    CHECK(seen.size() == leaves);
    // Next full lap sees the same set again.
    std::set<const RtreeNode*> lap2;
    for (std::size_t i = 0; i < leaves; ++i) lap2.insert(cursor.next());
    CHECK(lap2 == seen);
}

TEST_CASE("single-leaf cursor repeats the same leaf") {
    Rtree t;
    t.insert({{1.0, 1.0}, 1, 1});
    Rtree::LeafCursor cursor(t);
    RtreeNode* a = cursor.next();
    CHECK(cursor.next() == a);
    CHECK(cursor.next() == a);
}

TEST_CASE("cursor still visits every leaf after a mid-cycle split") {
    Rtree t(4);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int i = 0; i < 12; ++i)
        t.insert({{u(rng), u(rng)}, static_cast<ObjectId>(i), static_cast<Timestamp>(i + 1)});

    Rtree::LeafCursor cursor(t);
    cursor.next();  // move off the head mid-cycle
    for (int i = 12; i < 24; ++i)  // splits happen here
        t.insert({{u(rng), u(rng)}, static_cast<ObjectId>(i), static_cast<Timestamp>(i + 1)});

    std::set<const RtreeNode*> visited;
    const std::size_t leaves = t.leaf_count();
    for (std::size_t i = 0; i < 2 * leaves; ++i) visited.insert(cursor.next());

    std::set<const RtreeNode*> expect;
    for (RtreeNode* l = t.first_leaf(); l; l = l->next_leaf) expect.insert(l);
    CHECK(visited == expect);  // every current leaf seen within two cycles
}

TEST_SUITE_END();
