#pragma once
// Surface realization of the four component tasks from a per-domain phrasing
// registry: factual statements, factual comparisons (direct and indirect
// styles), decision templates (8 frames per preference) and negative
// preference interpretations (12 fixed statements).

#include "cft/domain.hpp"
#include "cft/split.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cft {

enum class TaskKind {
    FactualStatement,
    FactualComparison,
    DecisionTemplate,
    NegPrefInterpretation,
};
std::string to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);
// CLI shorthand: fs, fc, dt, neg.
std::string task_kind_short(TaskKind k);
TaskKind task_kind_from_short(const std::string& s);

enum class ComparisonStyle { Direct, Indirect };
std::string to_string(ComparisonStyle s);

// One prompt/completion pair. Prompts end exactly where the answer starts;
// the completion is the bare continuation (an item name or formatted value).
struct TrainingExample {
    std::string prompt;
    std::string completion;
    TaskKind task_kind = TaskKind::FactualStatement;
    std::string phrasing_id;
    std::string pair_ref;  // unordered pair key; empty for statements
    std::string item_ref;  // statements only
    std::string attribute; // empty for negation statements
    bool flipped = false;  // surface order differs from canonical pair order
    uint64_t token_count = 0;

    json to_json() const;
    static TrainingExample from_json(const json& doc);
};

struct DecisionFrame {
    Polarity polarity = Polarity::Positive;
    Person person = Person::First;
    Mood mood = Mood::Declarative;
    std::string preference_template; // "You like {phrase}." / "... a {noun} with {phrase}."
    std::string pair_template;       // "Between {item1} and {item2}, you should visit"
};

struct NegationStatement {
    std::string id;
    std::string attribute; // preferred attribute of the positive reading
    Order order = Order::Higher;
    std::string prompt;
    std::string completion;
};

struct PhrasingRegistry {
    std::string domain_name;
    std::string noun; // "city" / "restaurant"
    std::string comparison_frame_direct;
    std::string comparison_frame_indirect;
    std::vector<DecisionFrame> decision_frames; // exactly 8, one per (polarity, person, mood)
    std::vector<NegationStatement> negations;   // exactly 12

    // Enforces the frame counts and that every attribute can be phrased.
    void validate(const Domain& domain) const;

    const DecisionFrame& frame(Polarity pol, Person per, Mood mood) const;

    json to_json() const;
    static PhrasingRegistry from_json(const json& doc);
};

// Phrasing identifiers; evaluation aggregates accuracy per id.
std::string fs_phrasing_id(const std::string& attribute);
std::string fc_phrasing_id(const std::string& attribute, Order order, ComparisonStyle style);
std::string dt_phrasing_id(const Preference& pref);
// Inverse of the two pair-task ids; throws ConfigError on malformed input.
struct ParsedPhrasing {
    TaskKind task_kind;
    std::string attribute;
    Order order = Order::Higher;
    ComparisonStyle style = ComparisonStyle::Direct;
    Polarity polarity = Polarity::Positive;
    Person person = Person::First;
    Mood mood = Mood::Declarative;
    Preference preference() const;
};
ParsedPhrasing parse_phrasing_id(const std::string& id);

// All ids a registry yields for a domain, per task.
std::vector<std::string> fc_phrasing_ids(const Domain& domain);
std::vector<std::string> dt_phrasing_ids(const Domain& domain);

// Single-example renderers; evaluation reuses these for test cases.
TrainingExample render_statement(const Domain& domain, const Item& item,
                                 const AttributeSpec& attr);
TrainingExample render_comparison(const Domain& domain, const PhrasingRegistry& registry,
                                  const ItemPair& pair, const std::string& attribute,
                                  Order order, ComparisonStyle style, bool flipped);
TrainingExample render_decision(const Domain& domain, const PhrasingRegistry& registry,
                                const ItemPair& pair, const Preference& pref, bool flipped);

// Corpus renderers. Comparisons and decisions draw their per-example order
// flips from (seed, pair key, phrasing id) streams.
std::vector<TrainingExample> render_factual_statements(const Domain& domain);
std::vector<TrainingExample> render_factual_comparisons(const PairSet& pairs,
                                                        const Domain& domain,
                                                        const PhrasingRegistry& registry,
                                                        uint64_t seed);
std::vector<TrainingExample> render_decision_templates(
    const PairSet& pairs, const Domain& domain, const PhrasingRegistry& registry,
    uint64_t seed, const std::optional<std::string>& attribute_filter = std::nullopt);
std::vector<TrainingExample> render_negation_statements(const Domain& domain,
                                                        const PhrasingRegistry& registry);

} // namespace cft
