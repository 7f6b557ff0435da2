#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cft/domain.hpp"
#include "cft/error.hpp"
#include "test_util.hpp"

using namespace cft;

namespace {

Domain two_city_domain() {
    Domain d;
    d.name = "mini_cities";
    AttributeSpec temp = test::make_attribute("temperature", 10.0);
    temp.statement_template = "The average temperature in {item} is";
    temp.value_formatter = {ValueFormatter::Style::Fixed, 1, "C", "$"};
    AttributeSpec pop = test::make_attribute("population", 2500000.0);
    pop.value_formatter = {ValueFormatter::Style::Grouped, 0, "", "$"};
    d.attributes = {temp, pop};
    d.items = {
        Item{"lisbon", "Lisbon", {{"temperature", 17.5}, {"population", 504718.0}}},
        Item{"london", "London", {{"temperature", 11.1}, {"population", 8961989.0}}},
        Item{"cairo", "Cairo", {{"temperature", 21.4}, {"population", 19787000.0}}},
    };
    d.validate();
    return d;
}

} // namespace

TEST_CASE("comparison picks the item satisfying the order") {
    Domain d = two_city_domain();
    ItemPair pair{d.item("lisbon"), d.item("london")};

    CHECK(resolve_comparison(pair, d, "temperature", Order::Higher).id == "lisbon");
    CHECK(resolve_comparison(pair, d, "temperature", Order::Lower).id == "london");
    CHECK(resolve_comparison(pair, d, "population", Order::Higher).id == "london");
}

TEST_CASE("higher and lower partition every pair") {
    Domain d = test::make_synthetic_domain(16, 7);
    for (size_t i = 0; i < d.items.size(); ++i) {
        for (size_t j = i + 1; j < d.items.size(); ++j) {
            ItemPair pair{d.items[i], d.items[j]};
            for (const AttributeSpec& a : d.attributes) {
                if (pair.first.values.at(a.name) == pair.second.values.at(a.name)) continue;
                const Item& hi = resolve_comparison(pair, d, a.name, Order::Higher);
                const Item& lo = resolve_comparison(pair, d, a.name, Order::Lower);
                CHECK(hi.id != lo.id);
                CHECK(hi.values.at(a.name) > lo.values.at(a.name));
            }
        }
    }
}

TEST_CASE("unknown attribute is a configuration error, tie an invariant error") {
    Domain d = two_city_domain();
    ItemPair pair{d.item("lisbon"), d.item("london")};
    CHECK_THROWS_AS(resolve_comparison(pair, d, "altitude", Order::Higher), ConfigError);

    Domain tied = d;
    tied.items[1].values["temperature"] = 17.5;
    ItemPair tied_pair{tied.item("lisbon"), tied.item("london")};
    CHECK_THROWS_AS(resolve_comparison(tied_pair, tied, "temperature", Order::Higher),
                    InvariantError);
}

TEST_CASE("recommendation follows the preference and flips with negation") {
    Domain d = two_city_domain();
    ItemPair pair{d.item("lisbon"), d.item("london")};

    Preference warm{"temperature", Order::Higher, Polarity::Positive, Person::First,
                    Mood::Declarative};
    CHECK(resolve_recommendation(pair, d, warm).id == "lisbon");

    // "don't like cold" == "like warm"
    Preference not_cold = warm;
    not_cold.polarity = Polarity::Negative;
    not_cold.order = Order::Lower;
    CHECK(resolve_recommendation(pair, d, not_cold).id == "lisbon");
}

TEST_CASE("recommendation invariant under person and mood, flips with polarity xor order") {
    Domain d = test::make_synthetic_domain(12, 99);
    std::vector<ItemPair> pairs;
    for (size_t i = 0; i < d.items.size(); ++i)
        for (size_t j = i + 1; j < d.items.size(); ++j)
            if (pair_qualifies(d.items[i], d.items[j], d))
                pairs.push_back(ItemPair{d.items[i], d.items[j]});
    REQUIRE(!pairs.empty());

    for (const ItemPair& pair : pairs) {
        for (const AttributeSpec& a : d.attributes) {
            for (Order o : {Order::Higher, Order::Lower}) {
                Preference base{a.name, o, Polarity::Positive, Person::First, Mood::Declarative};
                const std::string expect = resolve_recommendation(pair, d, base).id;
                for (Person per : {Person::First, Person::Third}) {
                    for (Mood m : {Mood::Declarative, Mood::Subjunctive}) {
                        Preference variant{a.name, o, Polarity::Positive, per, m};
                        CHECK(resolve_recommendation(pair, d, variant).id == expect);
                        // negation of the opposite order lands on the same item
                        Preference negated{a.name, opposite(o), Polarity::Negative, per, m};
                        CHECK(resolve_recommendation(pair, d, negated).id == expect);
                        // negation of the same order flips the answer
                        Preference flipped{a.name, o, Polarity::Negative, per, m};
                        CHECK(resolve_recommendation(pair, d, flipped).id != expect);
                    }
                }
            }
        }
    }
}

TEST_CASE("negating a preference twice round-trips") {
    Preference p{"temperature", Order::Higher, Polarity::Positive, Person::Third,
                 Mood::Subjunctive};
    Preference back = p.negated().negated();
    CHECK(back.attribute == p.attribute);
    CHECK(back.order == p.order);
    CHECK(back.polarity == p.polarity);
}

TEST_CASE("qualification requires every attribute by default and is symmetric") {
    Domain d = two_city_domain();
    // Lisbon-London: temp diff 6.4 < 10 -> disqualified even though population clears.
    CHECK_FALSE(pair_qualifies(d.item("lisbon"), d.item("london"), d));
    // Lisbon-Cairo: temp diff 3.9 < 10 -> disqualified.
    CHECK_FALSE(pair_qualifies(d.item("lisbon"), d.item("cairo"), d));
    // London-Cairo: temp diff 10.3, pop diff 10.8M -> qualifies.
    CHECK(pair_qualifies(d.item("london"), d.item("cairo"), d));
    CHECK(pair_qualifies(d.item("cairo"), d.item("london"), d));

    Domain any = d;
    any.qualification_mode = QualificationMode::AnyAttribute;
    CHECK(pair_qualifies(any.item("lisbon"), any.item("london"), any));
    CHECK_FALSE(pair_qualifies(any.item("lisbon"), any.item("lisbon"), any));
}

TEST_CASE("value formatters render the documented shapes") {
    ValueFormatter fixed{ValueFormatter::Style::Fixed, 1, "C", "$"};
    CHECK(fixed.format(17.5) == "17.5C");
    ValueFormatter grouped{ValueFormatter::Style::Grouped, 0, "", "$"};
    CHECK(grouped.format(2827000.0) == "2,827,000");
    ValueFormatter symbols{ValueFormatter::Style::Symbols, 0, "", "$"};
    CHECK(symbols.format(2.0) == "$$");
    ValueFormatter miles{ValueFormatter::Style::Fixed, 1, " miles", "$"};
    CHECK(miles.format(7.3) == "7.3 miles");
}

TEST_CASE("domain json round-trips and validates") {
    Domain d = two_city_domain();
    json doc = d.to_json();
    Domain back = Domain::from_json(doc);
    CHECK(back.items.size() == d.items.size());
    CHECK(back.attribute("temperature").min_pair_difference == 10.0);
    CHECK(back.item("lisbon").values.at("temperature") == 17.5);
    CHECK(back.to_json() == doc);

    json broken = doc;
    broken["items"][0]["values"].erase("temperature");
    CHECK_THROWS_AS(Domain::from_json(broken), ConfigError);
}

TEST_CASE("domain validation rejects structural rule violations") {
    Domain d = two_city_domain();
    d.items.push_back(Item{"lisbon2", "Lisbon", {{"temperature", 1.0}, {"population", 1.0}}});
    CHECK_THROWS_AS(d.validate(), ConfigError); // duplicate display name

    Domain zero = two_city_domain();
    zero.attributes[0].min_pair_difference = 0.0;
    CHECK_THROWS_AS(zero.validate(), ConfigError);
}
