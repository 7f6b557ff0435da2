#include "cft/split.hpp"
#include "cft/error.hpp"
#include "cft/rng.hpp"

#include <algorithm>
#include <cmath>

namespace cft {

std::string to_string(Origin o) { return o == Origin::Train ? "train" : "test"; }

Origin origin_from_string(const std::string& s) {
    if (s == "train") return Origin::Train;
    if (s == "test") return Origin::Test;
    throw ConfigError("invalid origin '" + s + "'");
}

bool ItemSplit::is_train(const std::string& id) const {
    return std::binary_search(train_ids.begin(), train_ids.end(), id);
}

bool ItemSplit::is_test(const std::string& id) const {
    return std::binary_search(test_ids.begin(), test_ids.end(), id);
}

json ItemSplit::to_json() const {
    return json{
        {"schema_version", 1},
        {"domain", domain_name},
        {"train_fraction", train_fraction},
        {"seed", seed},
        {"train_ids", train_ids},
        {"test_ids", test_ids},
    };
}

ItemSplit ItemSplit::from_json(const json& doc) {
    require_schema(doc, 1, "split");
    ItemSplit s;
    s.domain_name = doc.at("domain").get<std::string>();
    s.train_fraction = doc.at("train_fraction").get<double>();
    s.seed = doc.at("seed").get<uint64_t>();
    s.train_ids = doc.at("train_ids").get<std::vector<std::string>>();
    s.test_ids = doc.at("test_ids").get<std::vector<std::string>>();
    return s;
}

ItemSplit split_items(const Domain& domain, double train_fraction, uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train_fraction must be in (0, 1)");
    const size_t n = domain.items.size();
    // floor with a nudge so exact products (0.3 * 240) don't fall a unit short.
    size_t train_n = static_cast<size_t>(
        std::floor(train_fraction * static_cast<double>(n) + 1e-9));
    if (train_n == 0 || train_n >= n)
        throw DataError("degenerate split: " + std::to_string(train_n) + " train of " +
                        std::to_string(n) + " items");

    std::vector<std::string> ids;
    ids.reserve(n);
    for (const Item& it : domain.items) ids.push_back(it.id);
    std::sort(ids.begin(), ids.end());

    Rng rng = derive_rng(seed, {hash_bytes("item-split"), hash_bytes(domain.name)});
    shuffle(ids, rng);

    ItemSplit split;
    split.domain_name = domain.name;
    split.train_fraction = train_fraction;
    split.seed = seed;
    split.train_ids.assign(ids.begin(), ids.begin() + static_cast<ptrdiff_t>(train_n));
    split.test_ids.assign(ids.begin() + static_cast<ptrdiff_t>(train_n), ids.end());
    std::sort(split.train_ids.begin(), split.train_ids.end());
    std::sort(split.test_ids.begin(), split.test_ids.end());
    return split;
}

json PairSet::to_json() const {
    json arr = json::array();
    for (const ItemPair& p : pairs) arr.push_back(json::array({p.first.id, p.second.id}));
    return json{
        {"schema_version", 1},
        {"domain", domain_name},
        {"origin", to_string(origin)},
        {"pairs", arr},
    };
}

PairSet PairSet::from_json(const json& doc, const Domain& domain) {
    require_schema(doc, 1, "pairs");
    PairSet ps;
    ps.domain_name = doc.at("domain").get<std::string>();
    ps.origin = origin_from_string(doc.at("origin").get<std::string>());
    if (ps.domain_name != domain.name)
        throw ConfigError("pair set belongs to domain '" + ps.domain_name + "', not '" +
                          domain.name + "'");
    for (const json& p : doc.at("pairs")) {
        ps.pairs.push_back(ItemPair{domain.item(p.at(0).get<std::string>()),
                                    domain.item(p.at(1).get<std::string>())});
    }
    return ps;
}

PairSet enumerate_pairs(const Domain& domain, const std::vector<std::string>& item_ids,
                        Origin origin) {
    std::vector<const Item*> items;
    items.reserve(item_ids.size());
    for (const std::string& id : item_ids) items.push_back(&domain.item(id));
    std::sort(items.begin(), items.end(),
              [](const Item* a, const Item* b) { return a->id < b->id; });

    PairSet out;
    out.origin = origin;
    out.domain_name = domain.name;
    for (size_t i = 0; i < items.size(); ++i) {
        for (size_t j = i + 1; j < items.size(); ++j) {
            if (pair_qualifies(*items[i], *items[j], domain))
                out.pairs.push_back(ItemPair{*items[i], *items[j]});
        }
    }
    return out;
}

PairSet flip_orders(const PairSet& pairs, uint64_t seed) {
    PairSet out;
    out.origin = pairs.origin;
    out.domain_name = pairs.domain_name;
    out.pairs.reserve(pairs.pairs.size());
    for (const ItemPair& p : pairs.pairs) {
        Rng rng = derive_rng(seed, {hash_bytes("pair-flip"), hash_bytes(p.key())});
        out.pairs.push_back(rng.coin() ? ItemPair{p.second, p.first} : p);
    }
    return out;
}

bool example_flipped(uint64_t seed, const std::string& pair_key,
                     const std::string& phrasing_id) {
    Rng rng = derive_rng(seed, {hash_bytes("example-flip"), hash_bytes(pair_key),
                                hash_bytes(phrasing_id)});
    return rng.coin();
}

} // namespace cft
