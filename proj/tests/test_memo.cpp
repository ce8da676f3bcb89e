#include <doctest.h>

#include <vector>

#include "lsmrum/update_memo.hpp"

using namespace lsmrum;

TEST_SUITE_BEGIN("memo");

TEST_CASE("cils installs a larger value") {
    UpdateMemo memo;
    memo.put_if_absent(1, 1, 1);
    CHECK(memo.cils(1, 6) == 6);
    CHECK(memo.lookup(1)->first == 6);
}

TEST_CASE("cils aborts when the stored value is larger") {
    UpdateMemo memo;
    memo.put_if_absent(1, 7, 1);
    CHECK(memo.cils(1, 6) == 7);
    CHECK(memo.lookup(1)->first == 7);
}

TEST_CASE("cils aborts on equality") {
    UpdateMemo memo;
    memo.put_if_absent(1, 5, 1);
    CHECK(memo.cils(1, 5) == 5);
    CHECK(memo.lookup(1)->first == 5);
}

TEST_CASE("cils without an entry is a contract violation") {
    UpdateMemo memo;
    CHECK_THROWS_AS(memo.cils(42, 1), ContractViolation);
}

TEST_CASE("record_obsolete creates the first entry") {
    UpdateMemo memo;
    memo.record_obsolete(1, 3);
    auto e = memo.lookup(1);
    REQUIRE(e.has_value());
    CHECK(e->first == 3);
    CHECK(e->second == 1);
}

TEST_CASE("record_obsolete advances ts and bumps cnt") {
    UpdateMemo memo;
    memo.record_obsolete(2, 8);  // <2, t8, 1>
    memo.record_obsolete(2, 9);  // -> <2, t9, 2>
    auto e = memo.lookup(2);
    REQUIRE(e.has_value());
    CHECK(e->first == 9);
    CHECK(e->second == 2);
}

TEST_CASE("clean_one removes an entry whose count reaches zero") {
    UpdateMemo memo;
    memo.record_obsolete(3, 7);  // <3, t7, 1>
    CHECK(memo.clean_one(3) == 0);
    CHECK_FALSE(memo.lookup(3).has_value());
    CHECK(memo.size() == 0);
}

TEST_CASE("clean_one decrements a larger count") {
    UpdateMemo memo;
    for (Timestamp t = 1; t <= 5; ++t) memo.record_obsolete(9, t);
    REQUIRE(memo.lookup(9)->second == 5);
    CHECK(memo.clean_one(9) == 4);
    auto e = memo.lookup(9);
    REQUIRE(e.has_value());
    CHECK(e->second == 4);
    CHECK(e->first == 5);  // cleaning never touches ts
}

TEST_CASE("validate keeps fresh candidates and drops stale ones") {
    UpdateMemo memo;
    memo.record_obsolete(3, 7);
    memo.record_obsolete(2, 8);

    std::vector<ObjectRecord> candidates{
        {{30.0, 30.0}, 3, 4},
        {{40.0, 40.0}, 4, 5},
        {{30.0, 30.0}, 2, 8},
    };
    auto results = memo.validate(candidates);
    REQUIRE(results.size() == 2);
    CHECK(results[0] == ObjectRecord{{40.0, 40.0}, 4, 5});
    CHECK(results[1] == ObjectRecord{{30.0, 30.0}, 2, 8});
}

TEST_CASE("validate with an empty memo returns the candidates unchanged") {
    UpdateMemo memo;
    std::vector<ObjectRecord> candidates{{{1.0, 1.0}, 1, 1}, {{2.0, 2.0}, 2, 2}};
    CHECK(memo.validate(candidates) == candidates);
}

TEST_CASE("validate preserves order and is idempotent") {
    UpdateMemo memo;
    memo.record_obsolete(5, 10);
    std::vector<ObjectRecord> candidates;
    for (int i = 0; i < 20; ++i)
        candidates.push_back({{static_cast<double>(i), 0.0}, static_cast<ObjectId>(i % 7),
                              static_cast<Timestamp>(i % 7 == 5 ? 10 : i + 50)});
    auto once = memo.validate(candidates);
    auto twice = memo.validate(once);
    CHECK(once == twice);
    // Input order of survivors is intact.
    for (std::size_t i = 1; i < once.size(); ++i) {
        auto pos = [&](const ObjectRecord& r) {
            return std::find(candidates.begin(), candidates.end(), r) - candidates.begin();
        };
        CHECK(pos(once[i - 1]) < pos(once[i]));
    }
}

TEST_CASE("a candidate newer than its entry is reported, not kept") {
    UpdateMemo memo;
    memo.record_obsolete(1, 5);
    std::vector<ObjectRecord> candidates{{{0.0, 0.0}, 1, 9}};  // newer than the memo: engine bug
    auto results = memo.validate(candidates);
    CHECK(results.empty());
    CHECK(memo.validation_anomalies() == 1);
}

TEST_CASE("lookup on an absent oid is empty") {
    UpdateMemo memo;
    CHECK_FALSE(memo.lookup(123).has_value());
}

TEST_CASE("size counts distinct entries and max_size tracks the high water") {
    UpdateMemo memo;
    for (ObjectId oid = 0; oid < 50; ++oid) memo.record_obsolete(oid, oid + 1);
    CHECK(memo.size() == 50);
    CHECK(memo.max_size() == 50);
    for (ObjectId oid = 0; oid < 50; ++oid) memo.clean_one(oid);
    CHECK(memo.size() == 0);
    CHECK(memo.max_size() == 50);
}

TEST_CASE("snapshot lists every entry") {
    UpdateMemo memo;
    memo.record_obsolete(1, 3);
    memo.record_obsolete(2, 8);
    memo.record_obsolete(2, 9);
    auto snap = memo.snapshot();
    REQUIRE(snap.size() == 2);
    std::sort(snap.begin(), snap.end());
    CHECK(snap[0] == std::tuple<ObjectId, Timestamp, std::int64_t>{1, 3, 1});
    CHECK(snap[1] == std::tuple<ObjectId, Timestamp, std::int64_t>{2, 9, 2});
}

TEST_SUITE_END();
