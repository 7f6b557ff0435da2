#include "cft/phrasing.hpp"
#include "cft/error.hpp"
#include "cft/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cft {

std::string to_string(TaskKind k) {
    switch (k) {
        case TaskKind::FactualStatement: return "factual_statement";
        case TaskKind::FactualComparison: return "factual_comparison";
        case TaskKind::DecisionTemplate: return "decision_template";
        case TaskKind::NegPrefInterpretation: return "neg_pref_interpretation";
    }
    return "factual_statement";
}

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "factual_statement") return TaskKind::FactualStatement;
    if (s == "factual_comparison") return TaskKind::FactualComparison;
    if (s == "decision_template") return TaskKind::DecisionTemplate;
    if (s == "neg_pref_interpretation") return TaskKind::NegPrefInterpretation;
    throw ConfigError("invalid task kind '" + s + "'");
}

std::string task_kind_short(TaskKind k) {
    switch (k) {
        case TaskKind::FactualStatement: return "fs";
        case TaskKind::FactualComparison: return "fc";
        case TaskKind::DecisionTemplate: return "dt";
        case TaskKind::NegPrefInterpretation: return "neg";
    }
    return "fs";
}

TaskKind task_kind_from_short(const std::string& s) {
    if (s == "fs") return TaskKind::FactualStatement;
    if (s == "fc") return TaskKind::FactualComparison;
    if (s == "dt") return TaskKind::DecisionTemplate;
    if (s == "neg") return TaskKind::NegPrefInterpretation;
    throw ConfigError("invalid task shorthand '" + s + "' (expected fs|fc|dt|neg)");
}

std::string to_string(ComparisonStyle s) {
    return s == ComparisonStyle::Direct ? "direct" : "indirect";
}

json TrainingExample::to_json() const {
    json j{
        {"prompt", prompt},
        {"completion", completion},
        {"task_kind", to_string(task_kind)},
        {"phrasing_id", phrasing_id},
        {"token_count", token_count},
    };
    if (!pair_ref.empty()) {
        j["pair_ref"] = pair_ref;
        j["flipped"] = flipped;
    }
    if (!item_ref.empty()) j["item_ref"] = item_ref;
    if (!attribute.empty()) j["attribute"] = attribute;
    return j;
}

TrainingExample TrainingExample::from_json(const json& doc) {
    TrainingExample ex;
    ex.prompt = doc.at("prompt").get<std::string>();
    ex.completion = doc.at("completion").get<std::string>();
    ex.task_kind = task_kind_from_string(doc.at("task_kind").get<std::string>());
    ex.phrasing_id = doc.at("phrasing_id").get<std::string>();
    ex.token_count = doc.value("token_count", uint64_t{0});
    ex.pair_ref = doc.value("pair_ref", std::string{});
    ex.item_ref = doc.value("item_ref", std::string{});
    ex.attribute = doc.value("attribute", std::string{});
    ex.flipped = doc.value("flipped", false);
    return ex;
}

void PhrasingRegistry::validate(const Domain& domain) const {
    if (comparison_frame_direct.empty() || comparison_frame_indirect.empty())
        throw ConfigError("registry '" + domain_name + "': both comparison frames required");
    if (decision_frames.size() != 8)
        throw ConfigError("registry '" + domain_name + "': expected 8 decision frames, got " +
                          std::to_string(decision_frames.size()));
    std::set<std::string> combos;
    for (const DecisionFrame& f : decision_frames) {
        std::string key =
            to_string(f.polarity) + "/" + to_string(f.person) + "/" + to_string(f.mood);
        if (!combos.insert(key).second)
            throw ConfigError("registry '" + domain_name + "': duplicate decision frame " + key);
        if (f.preference_template.empty() || f.pair_template.empty())
            throw ConfigError("registry '" + domain_name + "': empty template in frame " + key);
    }
    if (negations.size() != 12)
        throw ConfigError("registry '" + domain_name + "': expected 12 negation statements, got " +
                          std::to_string(negations.size()));
    std::set<std::string> neg_ids;
    for (const NegationStatement& n : negations) {
        if (!neg_ids.insert(n.id).second)
            throw ConfigError("registry '" + domain_name + "': duplicate negation id " + n.id);
        domain.attribute(n.attribute); // must exist
        if (n.prompt.empty() || n.completion.empty())
            throw ConfigError("registry '" + domain_name + "': negation " + n.id +
                              " missing prompt or completion");
    }
    // Statement templates live on the attribute specs; Domain::validate
    // guarantees their presence, re-checked here for standalone registries.
    for (const AttributeSpec& a : domain.attributes) a.validate();
}

const DecisionFrame& PhrasingRegistry::frame(Polarity pol, Person per, Mood mood) const {
    for (const DecisionFrame& f : decision_frames)
        if (f.polarity == pol && f.person == per && f.mood == mood) return f;
    throw ConfigError("registry '" + domain_name + "' has no frame " + to_string(pol) + "/" +
                      to_string(per) + "/" + to_string(mood));
}

json PhrasingRegistry::to_json() const {
    json frames = json::array();
    for (const DecisionFrame& f : decision_frames) {
        frames.push_back(json{
            {"polarity", to_string(f.polarity)},
            {"person", to_string(f.person)},
            {"mood", to_string(f.mood)},
            {"preference_template", f.preference_template},
            {"pair_template", f.pair_template},
        });
    }
    json negs = json::array();
    for (const NegationStatement& n : negations) {
        negs.push_back(json{
            {"id", n.id},
            {"attribute", n.attribute},
            {"order", to_string(n.order)},
            {"prompt", n.prompt},
            {"completion", n.completion},
        });
    }
    return json{
        {"schema_version", 1},
        {"domain", domain_name},
        {"noun", noun},
        {"comparison_frames",
         json{{"direct", comparison_frame_direct}, {"indirect", comparison_frame_indirect}}},
        {"decision_frames", frames},
        {"negation_statements", negs},
    };
}

PhrasingRegistry PhrasingRegistry::from_json(const json& doc) {
    require_schema(doc, 1, "registry");
    PhrasingRegistry r;
    r.domain_name = doc.at("domain").get<std::string>();
    r.noun = doc.at("noun").get<std::string>();
    r.comparison_frame_direct = doc.at("comparison_frames").at("direct").get<std::string>();
    r.comparison_frame_indirect = doc.at("comparison_frames").at("indirect").get<std::string>();
    for (const json& f : doc.at("decision_frames")) {
        DecisionFrame frame;
        frame.polarity = polarity_from_string(f.at("polarity").get<std::string>());
        frame.person = person_from_string(f.at("person").get<std::string>());
        frame.mood = mood_from_string(f.at("mood").get<std::string>());
        frame.preference_template = f.at("preference_template").get<std::string>();
        frame.pair_template = f.at("pair_template").get<std::string>();
        r.decision_frames.push_back(std::move(frame));
    }
    for (const json& n : doc.at("negation_statements")) {
        NegationStatement neg;
        neg.id = n.at("id").get<std::string>();
        neg.attribute = n.at("attribute").get<std::string>();
        neg.order = order_from_string(n.at("order").get<std::string>());
        neg.prompt = n.at("prompt").get<std::string>();
        neg.completion = n.at("completion").get<std::string>();
        r.negations.push_back(std::move(neg));
    }
    return r;
}

std::string fs_phrasing_id(const std::string& attribute) { return "fs:" + attribute; }

std::string fc_phrasing_id(const std::string& attribute, Order order, ComparisonStyle style) {
    return "fc:" + attribute + ":" + to_string(order) + ":" + to_string(style);
}

std::string dt_phrasing_id(const Preference& pref) {
    return "dt:" + pref.attribute + ":" + to_string(pref.order) + ":" +
           to_string(pref.polarity) + ":" + to_string(pref.person) + ":" + to_string(pref.mood);
}

Preference ParsedPhrasing::preference() const {
    return Preference{attribute, order, polarity, person, mood};
}

ParsedPhrasing parse_phrasing_id(const std::string& id) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (start <= id.size()) {
        size_t colon = id.find(':', start);
        if (colon == std::string::npos) {
            parts.push_back(id.substr(start));
            break;
        }
        parts.push_back(id.substr(start, colon - start));
        start = colon + 1;
    }
    if (parts.empty()) throw ConfigError("empty phrasing id");
    ParsedPhrasing p;
    if (parts[0] == "fc" && parts.size() == 4) {
        p.task_kind = TaskKind::FactualComparison;
        p.attribute = parts[1];
        p.order = order_from_string(parts[2]);
        p.style = parts[3] == "direct" ? ComparisonStyle::Direct : ComparisonStyle::Indirect;
        if (parts[3] != "direct" && parts[3] != "indirect")
            throw ConfigError("invalid comparison style in phrasing id '" + id + "'");
        return p;
    }
    if (parts[0] == "dt" && parts.size() == 6) {
        p.task_kind = TaskKind::DecisionTemplate;
        p.attribute = parts[1];
        p.order = order_from_string(parts[2]);
        p.polarity = polarity_from_string(parts[3]);
        p.person = person_from_string(parts[4]);
        p.mood = mood_from_string(parts[5]);
        return p;
    }
    if (parts[0] == "fs" && parts.size() == 2) {
        p.task_kind = TaskKind::FactualStatement;
        p.attribute = parts[1];
        return p;
    }
    throw ConfigError("unrecognized phrasing id '" + id + "'");
}

std::vector<std::string> fc_phrasing_ids(const Domain& domain) {
    std::vector<std::string> ids;
    for (const AttributeSpec& a : domain.attributes)
        for (Order o : {Order::Higher, Order::Lower})
            for (ComparisonStyle s : {ComparisonStyle::Direct, ComparisonStyle::Indirect})
                ids.push_back(fc_phrasing_id(a.name, o, s));
    return ids;
}

std::vector<std::string> dt_phrasing_ids(const Domain& domain) {
    std::vector<std::string> ids;
    for (const Preference& p : Preference::all_for(domain)) ids.push_back(dt_phrasing_id(p));
    return ids;
}

TrainingExample render_statement(const Domain& domain, const Item& item,
                                 const AttributeSpec& attr) {
    TrainingExample ex;
    ex.task_kind = TaskKind::FactualStatement;
    ex.phrasing_id = fs_phrasing_id(attr.name);
    ex.item_ref = item.id;
    ex.attribute = attr.name;
    ex.prompt = fill_slots(attr.statement_template, {{"item", item.display_name}});
    ex.completion = attr.value_formatter.format(item.values.at(attr.name));
    (void)domain;
    return ex;
}

namespace {

// In AnyAttribute mode a pair may be usable overall yet below threshold (or
// tied) on one attribute; such attributes are not rendered for the pair.
bool attribute_cleared(const ItemPair& pair, const AttributeSpec& attr) {
    double diff = std::abs(pair.first.values.at(attr.name) - pair.second.values.at(attr.name));
    return diff >= attr.min_pair_difference;
}

bool render_attribute_for_pair(const Domain& domain, const ItemPair& pair,
                               const AttributeSpec& attr) {
    if (domain.qualification_mode == QualificationMode::AllAttributes) return true;
    return attribute_cleared(pair, attr);
}

} // namespace

TrainingExample render_comparison(const Domain& domain, const PhrasingRegistry& registry,
                                  const ItemPair& pair, const std::string& attribute,
                                  Order order, ComparisonStyle style, bool flipped) {
    const AttributeSpec& attr = domain.attribute(attribute);
    const Item& answer = resolve_comparison(pair, domain, attribute, order);
    const std::string& frame = style == ComparisonStyle::Direct
                                   ? registry.comparison_frame_direct
                                   : registry.comparison_frame_indirect;
    const OrderedText& fragments =
        style == ComparisonStyle::Direct ? attr.direct_comparative : attr.indirect_comparative;
    const Item& shown_first = flipped ? pair.second : pair.first;
    const Item& shown_second = flipped ? pair.first : pair.second;

    TrainingExample ex;
    ex.task_kind = TaskKind::FactualComparison;
    ex.phrasing_id = fc_phrasing_id(attribute, order, style);
    ex.pair_ref = pair.key();
    ex.attribute = attribute;
    ex.flipped = flipped;
    ex.prompt = fill_slots(frame, {{"item1", shown_first.display_name},
                                   {"item2", shown_second.display_name},
                                   {"noun", registry.noun},
                                   {"attribute_phrase", fragments.of(order)}});
    ex.completion = answer.display_name;
    return ex;
}

TrainingExample render_decision(const Domain& domain, const PhrasingRegistry& registry,
                                const ItemPair& pair, const Preference& pref, bool flipped) {
    const AttributeSpec& attr = domain.attribute(pref.attribute);
    const Item& answer = resolve_recommendation(pair, domain, pref);
    const DecisionFrame& frame = registry.frame(pref.polarity, pref.person, pref.mood);

    // The order field is the stated one: positive frames name the liked
    // direction comparatively ("warmer weather"), negative frames name the
    // stated dislike in plain form ("cold weather"); the resolved answer
    // flips to the opposite order.
    const std::string& phrase = pref.polarity == Polarity::Positive
                                    ? attr.preference_comparative.of(pref.order)
                                    : attr.preference_plain.of(pref.order);

    const Item& shown_first = flipped ? pair.second : pair.first;
    const Item& shown_second = flipped ? pair.first : pair.second;

    TrainingExample ex;
    ex.task_kind = TaskKind::DecisionTemplate;
    ex.phrasing_id = dt_phrasing_id(pref);
    ex.pair_ref = pair.key();
    ex.attribute = pref.attribute;
    ex.flipped = flipped;
    std::string pref_sentence =
        fill_slots(frame.preference_template, {{"phrase", phrase}, {"noun", registry.noun}});
    std::string pair_sentence =
        fill_slots(frame.pair_template, {{"item1", shown_first.display_name},
                                         {"item2", shown_second.display_name},
                                         {"noun", registry.noun}});
    ex.prompt = pref_sentence + " " + pair_sentence;
    ex.completion = answer.display_name;
    return ex;
}

std::vector<TrainingExample> render_factual_statements(const Domain& domain) {
    std::vector<TrainingExample> out;
    out.reserve(domain.items.size() * domain.attributes.size());
    for (const Item& item : domain.items)
        for (const AttributeSpec& attr : domain.attributes)
            out.push_back(render_statement(domain, item, attr));
    return out;
}

std::vector<TrainingExample> render_factual_comparisons(const PairSet& pairs,
                                                        const Domain& domain,
                                                        const PhrasingRegistry& registry,
                                                        uint64_t seed) {
    std::vector<TrainingExample> out;
    for (const ItemPair& pair : pairs.pairs) {
        for (const AttributeSpec& attr : domain.attributes) {
            if (!render_attribute_for_pair(domain, pair, attr)) continue;
            for (Order order : {Order::Higher, Order::Lower}) {
                for (ComparisonStyle style : {ComparisonStyle::Direct, ComparisonStyle::Indirect}) {
                    std::string pid = fc_phrasing_id(attr.name, order, style);
                    bool flip = example_flipped(seed, pair.key(), pid);
                    out.push_back(
                        render_comparison(domain, registry, pair, attr.name, order, style, flip));
                }
            }
        }
    }
    return out;
}

std::vector<TrainingExample> render_decision_templates(
    const PairSet& pairs, const Domain& domain, const PhrasingRegistry& registry,
    uint64_t seed, const std::optional<std::string>& attribute_filter) {
    if (attribute_filter) domain.attribute(*attribute_filter); // validate early
    std::vector<TrainingExample> out;
    std::vector<Preference> prefs = Preference::all_for(domain);
    for (const ItemPair& pair : pairs.pairs) {
        for (const Preference& pref : prefs) {
            if (attribute_filter && pref.attribute != *attribute_filter) continue;
            if (!render_attribute_for_pair(domain, pair, domain.attribute(pref.attribute)))
                continue;
            std::string pid = dt_phrasing_id(pref);
            bool flip = example_flipped(seed, pair.key(), pid);
            out.push_back(render_decision(domain, registry, pair, pref, flip));
        }
    }
    return out;
}

std::vector<TrainingExample> render_negation_statements(const Domain& domain,
                                                        const PhrasingRegistry& registry) {
    registry.validate(domain); // all 12 must be defined
    std::vector<TrainingExample> out;
    out.reserve(registry.negations.size());
    for (const NegationStatement& n : registry.negations) {
        TrainingExample ex;
        ex.task_kind = TaskKind::NegPrefInterpretation;
        ex.phrasing_id = "neg:" + n.id;
        ex.attribute = n.attribute;
        ex.prompt = n.prompt;
        ex.completion = n.completion;
        out.push_back(std::move(ex));
    }
    return out;
}

} // namespace cft
