#pragma once
// Core vocabulary: items with attribute values, attribute metadata with
// comparison thresholds and surface fragments, preferences, and the two pure
// resolution functions everything else is checked against.

#include "cft/json_io.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cft {

enum class Order { Higher, Lower };
enum class Polarity { Positive, Negative };
enum class Person { First, Third };
enum class Mood { Declarative, Subjunctive };
enum class ValueKind { Continuous, Ordinal };

// Whether a pair must clear every attribute's threshold to be usable, or any
// single one. AllAttributes keeps every comparison over a usable pair
// well-defined (no ties on any attribute) and is the default.
enum class QualificationMode { AllAttributes, AnyAttribute };

Order opposite(Order o);
std::string to_string(Order o);
std::string to_string(Polarity p);
std::string to_string(Person p);
std::string to_string(Mood m);
Order order_from_string(const std::string& s);
Polarity polarity_from_string(const std::string& s);
Person person_from_string(const std::string& s);
Mood mood_from_string(const std::string& s);

// Rendering rule for attribute values in prompt text.
//   Fixed:   precision + suffix appended directly ("17.5" + "C")
//   Grouped: integer with thousands separators ("2,827,000")
//   Symbols: value repetitions of a symbol ("$$" for 2)
struct ValueFormatter {
    enum class Style { Fixed, Grouped, Symbols };
    Style style = Style::Fixed;
    int precision = 1;
    std::string suffix;
    std::string symbol = "$";

    std::string format(double v) const;
};

// Per-order text fragments, e.g. higher -> "warmer weather".
struct OrderedText {
    std::string higher;
    std::string lower;

    const std::string& of(Order o) const { return o == Order::Higher ? higher : lower; }
};

struct AttributeSpec {
    std::string name;
    std::string unit;
    ValueKind value_kind = ValueKind::Continuous;
    double min_pair_difference = 0.0;
    OrderedText direct_comparative;     // "higher average temperature"
    OrderedText indirect_comparative;   // "warmer weather"
    OrderedText preference_comparative; // after "You like ..." / "... with ..."
    OrderedText preference_plain;       // negated object: "cold weather"
    std::string statement_template;     // "The average temperature in {item} is"
    ValueFormatter value_formatter;

    void validate() const;
};

struct Item {
    std::string id;
    std::string display_name;
    std::map<std::string, double> values;
};

struct Domain {
    std::string name;
    QualificationMode qualification_mode = QualificationMode::AllAttributes;
    std::vector<AttributeSpec> attributes;
    std::vector<Item> items;

    const AttributeSpec& attribute(const std::string& name) const;
    const Item* find_item(const std::string& id) const;
    const Item& item(const std::string& id) const;

    // Checks every structural rule: thresholds positive, fragments present,
    // items carrying a value per attribute, names unique and nonempty.
    void validate() const;

    json to_json() const;
    static Domain from_json(const json& doc);
};

// A pair of distinct items. enumerate_pairs yields canonical order
// (lexicographic by id) and enforces qualification; flipped copies keep the
// same unordered identity.
struct ItemPair {
    Item first;
    Item second;

    static ItemPair make_canonical(Item a, Item b);
    // Identity used for dedup and flip streams; order independent.
    std::string key() const {
        return first.id < second.id ? first.id + "|" + second.id
                                    : second.id + "|" + first.id;
    }
};

struct Preference {
    std::string attribute;
    Order order = Order::Higher;
    Polarity polarity = Polarity::Positive;
    Person person = Person::First;
    Mood mood = Mood::Declarative;

    // Positive preference for the opposite order; negating twice round-trips.
    Preference negated() const;
    Order effective_order() const {
        return polarity == Polarity::Positive ? order : opposite(order);
    }
    // 4 per attribute-order, 8 surface combinations each.
    static std::vector<Preference> all_for(const Domain& domain);
};

json attribute_spec_to_json(const AttributeSpec& a);
AttributeSpec attribute_spec_from_json(const json& j);
QualificationMode qualification_mode_from_string(const std::string& s);

bool pair_qualifies(const Item& a, const Item& b, const Domain& domain);

// The item of the pair whose value satisfies (attribute, order). A tied value
// is an InvariantError: qualification makes ties impossible.
const Item& resolve_comparison(const ItemPair& pair, const Domain& domain,
                               const std::string& attribute, Order order);

// The item matching the preference; negation flips the effective order.
const Item& resolve_recommendation(const ItemPair& pair, const Domain& domain,
                                   const Preference& pref);

} // namespace cft
