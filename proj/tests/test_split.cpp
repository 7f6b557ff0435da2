#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cft/error.hpp"
#include "cft/split.hpp"
#include "test_util.hpp"

#include <set>

using namespace cft;

TEST_CASE("split sizes follow floor(fraction * n) with both sides nonempty") {
    Domain d = test::make_synthetic_domain(347, 5);
    ItemSplit split = split_items(d, 0.30, 11);
    CHECK(split.train_ids.size() == 104);
    CHECK(split.test_ids.size() == 243);

    Domain d240 = test::make_synthetic_domain(240, 5);
    ItemSplit s240 = split_items(d240, 0.30, 11);
    CHECK(s240.train_ids.size() == 72);
}

TEST_CASE("split partitions the items exactly") {
    Domain d = test::make_synthetic_domain(61, 9);
    ItemSplit split = split_items(d, 0.3, 4);
    std::set<std::string> all;
    for (const std::string& id : split.train_ids) all.insert(id);
    for (const std::string& id : split.test_ids) {
        CHECK(all.insert(id).second); // no overlap
    }
    CHECK(all.size() == d.items.size());
}

TEST_CASE("degenerate splits are fatal") {
    Domain d = test::make_synthetic_domain(3, 1);
    CHECK_THROWS_AS(split_items(d, 0.01, 1), DataError);  // train would be empty
    CHECK_THROWS_AS(split_items(d, 1.5, 1), ConfigError); // fraction out of range
    CHECK_THROWS_AS(split_items(d, 0.0, 1), ConfigError);
}

TEST_CASE("same seed reproduces the partition, different seeds move it") {
    Domain d = test::make_synthetic_domain(50, 2);
    ItemSplit a = split_items(d, 0.3, 21);
    ItemSplit b = split_items(d, 0.3, 21);
    CHECK(a.train_ids == b.train_ids);
    CHECK(a.test_ids == b.test_ids);
    ItemSplit c = split_items(d, 0.3, 22);
    CHECK(a.train_ids != c.train_ids);
}

TEST_CASE("three synthetic items where one pair clears both thresholds") {
    Domain d;
    d.name = "tiny";
    d.attributes = {test::make_attribute("alpha", 10.0), test::make_attribute("beta", 5.0)};
    d.items = {
        Item{"a", "A", {{"alpha", 0.0}, {"beta", 0.0}}},
        Item{"b", "B", {{"alpha", 12.0}, {"beta", 6.0}}},  // qualifies against A
        Item{"c", "C", {{"alpha", 11.0}, {"beta", 2.0}}},  // beta too close to both
    };
    d.validate();
    PairSet pairs = enumerate_pairs(d, {"a", "b", "c"}, Origin::Train);
    REQUIRE(pairs.pairs.size() == 1);
    CHECK(pairs.pairs[0].key() == "a|b");
}

TEST_CASE("epsilon thresholds admit every distinct pair") {
    Domain d = test::make_synthetic_domain(12, 8, 1e-9, 1e-9);
    PairSet pairs = enumerate_pairs(
        d, [&] {
            std::vector<std::string> ids;
            for (const Item& it : d.items) ids.push_back(it.id);
            return ids;
        }(), Origin::Train);
    CHECK(pairs.pairs.size() == 12 * 11 / 2);
}

TEST_CASE("enumeration agrees with a brute-force threshold re-check") {
    for (uint64_t seed : {10u, 11u, 12u, 13u, 14u}) {
        Domain d = test::make_synthetic_domain(18, seed, 20.0, 60.0);
        std::vector<std::string> ids;
        for (const Item& it : d.items) ids.push_back(it.id);
        PairSet pairs = enumerate_pairs(d, ids, Origin::Train);

        // independent O(n^2) re-check
        std::set<std::string> expected;
        for (size_t i = 0; i < d.items.size(); ++i) {
            for (size_t j = 0; j < d.items.size(); ++j) {
                if (i == j) continue;
                const Item& a = d.items[i];
                const Item& b = d.items[j];
                bool ok = true;
                for (const AttributeSpec& attr : d.attributes) {
                    if (std::abs(a.values.at(attr.name) - b.values.at(attr.name)) <
                        attr.min_pair_difference) {
                        ok = false;
                        break;
                    }
                }
                if (ok) expected.insert(a.id < b.id ? a.id + "|" + b.id : b.id + "|" + a.id);
            }
        }
        std::set<std::string> got;
        for (const ItemPair& p : pairs.pairs) {
            CHECK(p.first.id < p.second.id); // canonical order
            CHECK(got.insert(p.key()).second); // no duplicates
        }
        CHECK(got == expected);
    }
}

TEST_CASE("flip preserves the unordered pair multiset and is seed-stable") {
    Domain d = test::make_synthetic_domain(20, 3);
    std::vector<std::string> ids;
    for (const Item& it : d.items) ids.push_back(it.id);
    PairSet pairs = enumerate_pairs(d, ids, Origin::Train);
    REQUIRE(!pairs.pairs.empty());

    PairSet flipped1 = flip_orders(pairs, 99);
    PairSet flipped2 = flip_orders(pairs, 99);
    REQUIRE(flipped1.pairs.size() == pairs.pairs.size());
    for (size_t i = 0; i < pairs.pairs.size(); ++i) {
        CHECK(flipped1.pairs[i].key() == pairs.pairs[i].key());
        CHECK(flipped1.pairs[i].first.id == flipped2.pairs[i].first.id);
    }
}

TEST_CASE("per-example flips are balanced over many draws") {
    size_t flips = 0;
    const size_t n = 10000;
    for (size_t i = 0; i < n; ++i) {
        std::string pair_key = "item_a" + std::to_string(i) + "|item_b" + std::to_string(i);
        if (example_flipped(123, pair_key, "dt:alpha:higher:positive:first:declarative"))
            ++flips;
    }
    double rate = static_cast<double>(flips) / static_cast<double>(n);
    CHECK(rate > 0.48);
    CHECK(rate < 0.52);
}

TEST_CASE("per-example flips do not depend on evaluation order") {
    bool a = example_flipped(5, "x|y", "fc:alpha:higher:direct");
    for (int i = 0; i < 50; ++i) {
        example_flipped(5, "q|r", "fc:alpha:lower:direct"); // interleave other streams
        CHECK(example_flipped(5, "x|y", "fc:alpha:higher:direct") == a);
    }
}

TEST_CASE("split json round-trips") {
    Domain d = test::make_synthetic_domain(30, 4);
    ItemSplit split = split_items(d, 0.3, 17);
    ItemSplit back = ItemSplit::from_json(split.to_json());
    CHECK(back.train_ids == split.train_ids);
    CHECK(back.test_ids == split.test_ids);
    CHECK(back.seed == 17);
    CHECK(back.is_train(split.train_ids.front()));
    CHECK_FALSE(back.is_test(split.train_ids.front()));
}

TEST_CASE("pair set json round-trips against its domain") {
    Domain d = test::make_synthetic_domain(16, 6);
    std::vector<std::string> ids;
    for (const Item& it : d.items) ids.push_back(it.id);
    PairSet pairs = enumerate_pairs(d, ids, Origin::Test);
    PairSet back = PairSet::from_json(pairs.to_json(), d);
    CHECK(back.origin == Origin::Test);
    REQUIRE(back.pairs.size() == pairs.pairs.size());
    for (size_t i = 0; i < pairs.pairs.size(); ++i)
        CHECK(back.pairs[i].key() == pairs.pairs[i].key());

    Domain other = test::make_synthetic_domain(16, 7);
    other.name = "different";
    CHECK_THROWS_AS(PairSet::from_json(pairs.to_json(), other), ConfigError);
}
