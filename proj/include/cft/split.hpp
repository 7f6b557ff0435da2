#pragma once
// Item-level train/test split and enumeration of qualifying pairs, with the
// order randomization applied at rendering time.

#include "cft/domain.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cft {

enum class Origin { Train, Test };
std::string to_string(Origin o);
Origin origin_from_string(const std::string& s);

struct ItemSplit {
    std::string domain_name;
    double train_fraction = 0.0;
    uint64_t seed = 0;
    std::vector<std::string> train_ids; // sorted
    std::vector<std::string> test_ids;  // sorted

    bool is_train(const std::string& id) const;
    bool is_test(const std::string& id) const;

    json to_json() const;
    static ItemSplit from_json(const json& doc);
};

// Uniform random partition. Train size is floor(fraction * n); both sides
// must end up nonempty or the split is fatal.
ItemSplit split_items(const Domain& domain, double train_fraction, uint64_t seed);

struct PairSet {
    Origin origin = Origin::Train;
    std::string domain_name;
    std::vector<ItemPair> pairs;

    json to_json() const;
    static PairSet from_json(const json& doc, const Domain& domain);
};

// All unordered qualifying pairs over the given item ids, in canonical order
// (lexicographic by id, pairs sorted). An empty result is allowed.
PairSet enumerate_pairs(const Domain& domain, const std::vector<std::string>& item_ids,
                        Origin origin);

// Swaps each pair with independent probability 1/2. Streams derive from the
// pair's unordered key, so the outcome is independent of list order.
PairSet flip_orders(const PairSet& pairs, uint64_t seed);

// Per-rendered-example flip decision; the same pair can face both ways across
// its phrasings.
bool example_flipped(uint64_t seed, const std::string& pair_key, const std::string& phrasing_id);

} // namespace cft
