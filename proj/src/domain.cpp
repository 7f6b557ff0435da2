#include "cft/domain.hpp"
#include "cft/error.hpp"
#include "cft/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cft {

Order opposite(Order o) { return o == Order::Higher ? Order::Lower : Order::Higher; }

std::string to_string(Order o) { return o == Order::Higher ? "higher" : "lower"; }
std::string to_string(Polarity p) { return p == Polarity::Positive ? "positive" : "negative"; }
std::string to_string(Person p) { return p == Person::First ? "first" : "third"; }
std::string to_string(Mood m) { return m == Mood::Declarative ? "declarative" : "subjunctive"; }

namespace {
[[noreturn]] void bad_enum(const std::string& what, const std::string& s) {
    throw ConfigError("invalid " + what + ": '" + s + "'");
}
} // namespace

Order order_from_string(const std::string& s) {
    if (s == "higher") return Order::Higher;
    if (s == "lower") return Order::Lower;
    bad_enum("order", s);
}

Polarity polarity_from_string(const std::string& s) {
    if (s == "positive") return Polarity::Positive;
    if (s == "negative") return Polarity::Negative;
    bad_enum("polarity", s);
}

Person person_from_string(const std::string& s) {
    if (s == "first") return Person::First;
    if (s == "third") return Person::Third;
    bad_enum("person", s);
}

Mood mood_from_string(const std::string& s) {
    if (s == "declarative") return Mood::Declarative;
    if (s == "subjunctive") return Mood::Subjunctive;
    bad_enum("mood", s);
}

std::string ValueFormatter::format(double v) const {
    switch (style) {
        case Style::Fixed:
            return format_fixed(v, precision) + suffix;
        case Style::Grouped:
            return format_thousands(static_cast<int64_t>(std::llround(v))) + suffix;
        case Style::Symbols: {
            int n = static_cast<int>(std::llround(v));
            if (n < 0) n = 0;
            std::string out;
            for (int i = 0; i < n; ++i) out += symbol;
            return out + suffix;
        }
    }
    return {};
}

void AttributeSpec::validate() const {
    if (name.empty()) throw ConfigError("attribute with empty name");
    if (!(min_pair_difference > 0.0))
        throw ConfigError("attribute '" + name + "': min_pair_difference must be > 0");
    auto need = [&](const OrderedText& t, const char* which) {
        if (t.higher.empty() || t.lower.empty())
            throw ConfigError("attribute '" + name + "': " + which +
                              " must define both orders");
    };
    need(direct_comparative, "direct_comparative");
    need(indirect_comparative, "indirect_comparative");
    need(preference_comparative, "preference_comparative");
    need(preference_plain, "preference_plain");
    if (statement_template.empty())
        throw ConfigError("attribute '" + name + "': missing statement_template");
    if (statement_template.find("{item}") == std::string::npos)
        throw ConfigError("attribute '" + name + "': statement_template needs an {item} slot");
}

const AttributeSpec& Domain::attribute(const std::string& attr_name) const {
    for (const AttributeSpec& a : attributes)
        if (a.name == attr_name) return a;
    throw ConfigError("domain '" + name + "' has no attribute '" + attr_name + "'");
}

const Item* Domain::find_item(const std::string& id) const {
    for (const Item& it : items)
        if (it.id == id) return &it;
    return nullptr;
}

const Item& Domain::item(const std::string& id) const {
    if (const Item* it = find_item(id)) return *it;
    throw ConfigError("domain '" + name + "' has no item '" + id + "'");
}

void Domain::validate() const {
    if (attributes.empty()) throw ConfigError("domain '" + name + "' has no attributes");
    for (const AttributeSpec& a : attributes) a.validate();

    std::set<std::string> attr_names;
    for (const AttributeSpec& a : attributes)
        if (!attr_names.insert(a.name).second)
            throw ConfigError("duplicate attribute '" + a.name + "'");

    std::set<std::string> ids, names;
    for (const Item& it : items) {
        if (it.id.empty() || it.display_name.empty())
            throw ConfigError("item with empty id or display_name");
        if (!ids.insert(it.id).second)
            throw ConfigError("duplicate item id '" + it.id + "'");
        if (!names.insert(it.display_name).second)
            throw ConfigError("duplicate item display_name '" + it.display_name + "'");
        for (const AttributeSpec& a : attributes) {
            if (!it.values.count(a.name))
                throw ConfigError("item '" + it.id + "' missing value for '" + a.name + "'");
        }
    }
}

namespace {

json ordered_text_to_json(const OrderedText& t) {
    return json{{"higher", t.higher}, {"lower", t.lower}};
}

OrderedText ordered_text_from_json(const json& j) {
    return OrderedText{j.at("higher").get<std::string>(), j.at("lower").get<std::string>()};
}

std::string formatter_style_name(ValueFormatter::Style s) {
    switch (s) {
        case ValueFormatter::Style::Fixed: return "fixed";
        case ValueFormatter::Style::Grouped: return "grouped";
        case ValueFormatter::Style::Symbols: return "symbols";
    }
    return "fixed";
}

ValueFormatter::Style formatter_style_from(const std::string& s) {
    if (s == "fixed") return ValueFormatter::Style::Fixed;
    if (s == "grouped") return ValueFormatter::Style::Grouped;
    if (s == "symbols") return ValueFormatter::Style::Symbols;
    throw ConfigError("invalid formatter style '" + s + "'");
}

json attribute_to_json_impl(const AttributeSpec& a) {
    return json{
        {"name", a.name},
        {"unit", a.unit},
        {"value_kind", a.value_kind == ValueKind::Ordinal ? "ordinal" : "continuous"},
        {"min_pair_difference", a.min_pair_difference},
        {"direct_comparative", ordered_text_to_json(a.direct_comparative)},
        {"indirect_comparative", ordered_text_to_json(a.indirect_comparative)},
        {"preference_comparative", ordered_text_to_json(a.preference_comparative)},
        {"preference_plain", ordered_text_to_json(a.preference_plain)},
        {"statement_template", a.statement_template},
        {"value_formatter",
         json{{"style", formatter_style_name(a.value_formatter.style)},
              {"precision", a.value_formatter.precision},
              {"suffix", a.value_formatter.suffix},
              {"symbol", a.value_formatter.symbol}}},
    };
}

AttributeSpec attribute_from_json_impl(const json& j) {
    AttributeSpec a;
    a.name = j.at("name").get<std::string>();
    a.unit = j.value("unit", std::string{});
    a.value_kind = j.value("value_kind", std::string{"continuous"}) == "ordinal"
                       ? ValueKind::Ordinal
                       : ValueKind::Continuous;
    a.min_pair_difference = j.at("min_pair_difference").get<double>();
    a.direct_comparative = ordered_text_from_json(j.at("direct_comparative"));
    a.indirect_comparative = ordered_text_from_json(j.at("indirect_comparative"));
    // The preference fragments default to the indirect comparison fragments.
    a.preference_comparative = j.contains("preference_comparative")
                                   ? ordered_text_from_json(j.at("preference_comparative"))
                                   : a.indirect_comparative;
    a.preference_plain = j.contains("preference_plain")
                             ? ordered_text_from_json(j.at("preference_plain"))
                             : a.indirect_comparative;
    a.statement_template = j.at("statement_template").get<std::string>();
    if (j.contains("value_formatter")) {
        const json& f = j.at("value_formatter");
        a.value_formatter.style = formatter_style_from(f.value("style", std::string{"fixed"}));
        a.value_formatter.precision = f.value("precision", 1);
        a.value_formatter.suffix = f.value("suffix", std::string{});
        a.value_formatter.symbol = f.value("symbol", std::string{"$"});
    }
    return a;
}

} // namespace

json attribute_spec_to_json(const AttributeSpec& a) { return attribute_to_json_impl(a); }
AttributeSpec attribute_spec_from_json(const json& j) { return attribute_from_json_impl(j); }

QualificationMode qualification_mode_from_string(const std::string& s) {
    if (s == "all_attributes") return QualificationMode::AllAttributes;
    if (s == "any_attribute") return QualificationMode::AnyAttribute;
    throw ConfigError("invalid qualification_mode '" + s + "'");
}

json Domain::to_json() const {
    json items_json = json::array();
    for (const Item& it : items) {
        items_json.push_back(json{
            {"id", it.id},
            {"display_name", it.display_name},
            {"values", it.values},
        });
    }
    json attrs = json::array();
    for (const AttributeSpec& a : attributes) attrs.push_back(attribute_spec_to_json(a));
    return json{
        {"schema_version", 1},
        {"name", name},
        {"qualification_mode",
         qualification_mode == QualificationMode::AllAttributes ? "all_attributes"
                                                                : "any_attribute"},
        {"attributes", attrs},
        {"items", items_json},
    };
}

Domain Domain::from_json(const json& doc) {
    require_schema(doc, 1, "domain");
    Domain d;
    d.name = doc.at("name").get<std::string>();
    d.qualification_mode = qualification_mode_from_string(
        doc.value("qualification_mode", std::string{"all_attributes"}));
    for (const json& a : doc.at("attributes")) d.attributes.push_back(attribute_spec_from_json(a));
    for (const json& it : doc.at("items")) {
        Item item;
        item.id = it.at("id").get<std::string>();
        item.display_name = it.at("display_name").get<std::string>();
        for (auto& [k, v] : it.at("values").items()) item.values[k] = v.get<double>();
        d.items.push_back(std::move(item));
    }
    d.validate();
    return d;
}

ItemPair ItemPair::make_canonical(Item a, Item b) {
    if (a.id == b.id) throw InvariantError("pair of identical items: " + a.id);
    if (b.id < a.id) std::swap(a, b);
    return ItemPair{std::move(a), std::move(b)};
}

Preference Preference::negated() const {
    Preference p = *this;
    p.polarity = polarity == Polarity::Positive ? Polarity::Negative : Polarity::Positive;
    p.order = opposite(order);
    return p;
}

std::vector<Preference> Preference::all_for(const Domain& domain) {
    std::vector<Preference> out;
    for (const AttributeSpec& a : domain.attributes) {
        for (Order o : {Order::Higher, Order::Lower}) {
            for (Polarity pol : {Polarity::Positive, Polarity::Negative}) {
                for (Person per : {Person::First, Person::Third}) {
                    for (Mood m : {Mood::Declarative, Mood::Subjunctive}) {
                        out.push_back(Preference{a.name, o, pol, per, m});
                    }
                }
            }
        }
    }
    return out;
}

bool pair_qualifies(const Item& a, const Item& b, const Domain& domain) {
    if (a.id == b.id) return false;
    bool any = false;
    for (const AttributeSpec& attr : domain.attributes) {
        double diff = std::abs(a.values.at(attr.name) - b.values.at(attr.name));
        bool clears = diff >= attr.min_pair_difference;
        if (domain.qualification_mode == QualificationMode::AllAttributes && !clears)
            return false;
        any = any || clears;
    }
    return domain.qualification_mode == QualificationMode::AllAttributes ? true : any;
}

const Item& resolve_comparison(const ItemPair& pair, const Domain& domain,
                               const std::string& attribute, Order order) {
    const AttributeSpec& attr = domain.attribute(attribute); // throws ConfigError if unknown
    double v1 = pair.first.values.at(attr.name);
    double v2 = pair.second.values.at(attr.name);
    if (v1 == v2)
        throw InvariantError("tie on '" + attr.name + "' for pair " + pair.key());
    bool first_wins = order == Order::Higher ? v1 > v2 : v1 < v2;
    return first_wins ? pair.first : pair.second;
}

const Item& resolve_recommendation(const ItemPair& pair, const Domain& domain,
                                   const Preference& pref) {
    return resolve_comparison(pair, domain, pref.attribute, pref.effective_order());
}

} // namespace cft
