#include "cft/cot.hpp"
#include "cft/error.hpp"
#include "cft/rng.hpp"

namespace cft {

std::string to_string(PromptMode m) { return m == PromptMode::Plain ? "plain" : "cot"; }

PromptMode prompt_mode_from_string(const std::string& s) {
    if (s == "plain") return PromptMode::Plain;
    if (s == "cot") return PromptMode::Cot;
    throw ConfigError("invalid prompt mode '" + s + "' (expected plain|cot)");
}

json Exemplar::to_json() const {
    return json{
        {"question", question},
        {"chain", chain},
        {"answer", answer},
        {"pair_key", pair_key},
    };
}

Exemplar Exemplar::from_json(const json& doc) {
    Exemplar e;
    e.question = doc.at("question").get<std::string>();
    e.chain = doc.value("chain", std::string{});
    e.answer = doc.at("answer").get<std::string>();
    e.pair_key = doc.at("pair_key").get<std::string>();
    return e;
}

namespace {

std::string fact_sentence(const Domain& domain, const Item& item, const AttributeSpec& attr) {
    TrainingExample st = render_statement(domain, item, attr);
    return st.prompt + " " + st.completion + ".";
}

// Negative-polarity exemplars get the interpretation sentence from the
// registry so the chain mirrors the component structure. Registry entries are
// keyed by the liked (positive-reading) order.
const NegationStatement* find_negation(const PhrasingRegistry& registry,
                                       const std::string& attribute, Order liked_order) {
    for (const NegationStatement& n : registry.negations)
        if (n.attribute == attribute && n.order == liked_order) return &n;
    return nullptr;
}

} // namespace

std::vector<Exemplar> build_exemplars(const Domain& domain, const ItemSplit& split,
                                      const PairSet& train_pairs,
                                      const PhrasingRegistry& registry, size_t k,
                                      uint64_t seed) {
    if (train_pairs.origin != Origin::Train)
        throw ConfigError("exemplars must be built from train-origin pairs");
    if (train_pairs.pairs.size() < k)
        throw DataError("need " + std::to_string(k) + " training pairs for exemplars, have " +
                        std::to_string(train_pairs.pairs.size()));

    Rng rng = derive_rng(seed, {hash_bytes("exemplars")});
    std::vector<size_t> picks = sample_indices(train_pairs.pairs.size(), k, rng);

    // Rotate frames and (attribute, order, polarity) so k=8 covers all eight
    // surface frames.
    std::vector<Preference> base;
    for (const AttributeSpec& a : domain.attributes)
        for (Order o : {Order::Higher, Order::Lower})
            base.push_back(Preference{a.name, o, Polarity::Positive, Person::First,
                                      Mood::Declarative});

    std::vector<Exemplar> out;
    for (size_t i = 0; i < picks.size(); ++i) {
        const ItemPair& pair = train_pairs.pairs[picks[i]];
        if (!split.is_train(pair.first.id) || !split.is_train(pair.second.id))
            throw DataError("pair " + pair.key() + " is not inside the training split");
        const DecisionFrame& frame = registry.decision_frames[i % registry.decision_frames.size()];
        Preference pref = base[i % base.size()];
        pref.polarity = frame.polarity;
        pref.person = frame.person;
        pref.mood = frame.mood;

        bool flipped = derive_rng(seed, {hash_bytes("exemplar-flip"), i}).coin();
        TrainingExample rendered = render_decision(domain, registry, pair, pref, flipped);
        const AttributeSpec& attr = domain.attribute(pref.attribute);
        const Item& answer = resolve_recommendation(pair, domain, pref);

        Exemplar ex;
        ex.question = rendered.prompt;
        ex.answer = answer.display_name;
        ex.pair_key = pair.key();

        std::string chain = fact_sentence(domain, pair.first, attr) + " " +
                            fact_sentence(domain, pair.second, attr);
        if (pref.polarity == Polarity::Negative) {
            if (const NegationStatement* neg =
                    find_negation(registry, pref.attribute, pref.effective_order()))
                chain += " " + neg->prompt + " " + neg->completion;
        }
        TrainingExample cmp =
            render_comparison(domain, registry, pair, pref.attribute, pref.effective_order(),
                              ComparisonStyle::Direct, flipped);
        chain += " " + cmp.prompt + " " + cmp.completion + ".";
        ex.chain = chain;

        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<Exemplar> load_exemplars(const std::filesystem::path& path) {
    json doc = read_json_file(path);
    require_schema(doc, 1, "exemplars");
    std::vector<Exemplar> out;
    for (const json& e : doc.at("exemplars")) out.push_back(Exemplar::from_json(e));
    return out;
}

void save_exemplars(const std::filesystem::path& path, const std::vector<Exemplar>& exemplars) {
    json arr = json::array();
    for (const Exemplar& e : exemplars) arr.push_back(e.to_json());
    write_json_file(path, json{{"schema_version", 1}, {"exemplars", arr}});
}

std::string build_prompt_prefix(const std::vector<Exemplar>& exemplars, PromptMode mode,
                                const ItemSplit& split) {
    std::string prefix;
    for (const Exemplar& ex : exemplars) {
        size_t bar = ex.pair_key.find('|');
        if (bar == std::string::npos)
            throw ConfigError("exemplar has malformed pair key '" + ex.pair_key + "'");
        std::string id1 = ex.pair_key.substr(0, bar);
        std::string id2 = ex.pair_key.substr(bar + 1);
        if (!split.is_train(id1) || !split.is_train(id2))
            throw DataError("exemplar pair " + ex.pair_key +
                            " leaks outside the training split");

        prefix += ex.question;
        if (mode == PromptMode::Cot) {
            if (ex.chain.empty())
                throw ConfigError("cot mode requires a chain on every exemplar");
            prefix += "\n" + ex.chain + " So the answer is " + ex.answer + ".";
        } else {
            prefix += " " + ex.answer + ".";
        }
        prefix += "\n\n";
    }
    return prefix;
}

EvalReport evaluate_prompted(Backend& backend, const std::string& prefix,
                             const TestSuite& suite, unsigned concurrency) {
    return run_eval(backend, suite, prefix, concurrency);
}

} // namespace cft
