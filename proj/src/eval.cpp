#include "cft/eval.hpp"
#include "cft/error.hpp"
#include "cft/rng.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace cft {

json TestCase::to_json() const {
    return json{
        {"prompt", prompt},
        {"correct", correct},
        {"wrong", wrong},
        {"task_kind", to_string(task_kind)},
        {"phrasing_id", phrasing_id},
        {"pair_key", pair_key},
    };
}

TestCase TestCase::from_json(const json& doc) {
    TestCase c;
    c.prompt = doc.at("prompt").get<std::string>();
    c.correct = doc.at("correct").get<std::string>();
    c.wrong = doc.at("wrong").get<std::string>();
    c.task_kind = task_kind_from_string(doc.at("task_kind").get<std::string>());
    c.phrasing_id = doc.at("phrasing_id").get<std::string>();
    c.pair_key = doc.at("pair_key").get<std::string>();
    return c;
}

json TestSuite::to_json() const {
    json cases_json = json::array();
    for (const TestCase& c : cases) cases_json.push_back(c.to_json());
    return json{
        {"schema_version", 1},
        {"domain", domain_name},
        {"task_kind", to_string(task_kind)},
        {"n_per_phrasing", n_per_phrasing},
        {"seed", seed},
        {"cases", cases_json},
    };
}

TestSuite TestSuite::from_json(const json& doc) {
    require_schema(doc, 1, "test suite");
    TestSuite s;
    s.domain_name = doc.at("domain").get<std::string>();
    s.task_kind = task_kind_from_string(doc.at("task_kind").get<std::string>());
    s.n_per_phrasing = doc.at("n_per_phrasing").get<size_t>();
    s.seed = doc.at("seed").get<uint64_t>();
    for (const json& c : doc.at("cases")) s.cases.push_back(TestCase::from_json(c));
    return s;
}

TestSuite generate_test_suite(const ItemSplit& split, const Domain& domain,
                              const PhrasingRegistry& registry, TaskKind task_kind,
                              size_t n_per_phrasing, uint64_t seed) {
    if (task_kind != TaskKind::FactualComparison && task_kind != TaskKind::DecisionTemplate)
        throw ConfigError("test suites exist for comparisons and decision templates only");
    if (n_per_phrasing == 0) throw ConfigError("n_per_phrasing must be positive");

    PairSet test_pairs = enumerate_pairs(domain, split.test_ids, Origin::Test);

    std::vector<std::string> phrasings = task_kind == TaskKind::FactualComparison
                                             ? fc_phrasing_ids(domain)
                                             : dt_phrasing_ids(domain);

    TestSuite suite;
    suite.domain_name = domain.name;
    suite.task_kind = task_kind;
    suite.n_per_phrasing = n_per_phrasing;
    suite.seed = seed;

    for (const std::string& phrasing : phrasings) {
        // In AnyAttribute mode only pairs cleared on this phrasing's
        // attribute are usable.
        ParsedPhrasing parsed = parse_phrasing_id(phrasing);
        const AttributeSpec& attr = domain.attribute(parsed.attribute);
        std::vector<const ItemPair*> usable;
        usable.reserve(test_pairs.pairs.size());
        for (const ItemPair& p : test_pairs.pairs) {
            double diff =
                std::abs(p.first.values.at(attr.name) - p.second.values.at(attr.name));
            if (domain.qualification_mode == QualificationMode::AllAttributes ||
                diff >= attr.min_pair_difference)
                usable.push_back(&p);
        }
        if (usable.size() < n_per_phrasing)
            throw DataError("phrasing '" + phrasing + "' has only " +
                            std::to_string(usable.size()) +
                            " qualifying test pairs; achievable n_per_phrasing is " +
                            std::to_string(usable.size()));

        Rng rng = derive_rng(seed, {hash_bytes("suite-sample"), hash_bytes(phrasing)});
        std::vector<size_t> picks = sample_indices(usable.size(), n_per_phrasing, rng);

        for (size_t i = 0; i < picks.size(); ++i) {
            const ItemPair& pair = *usable[picks[i]];
            Rng flip_rng = derive_rng(
                seed, {hash_bytes("suite-flip"), hash_bytes(phrasing), hash_bytes(pair.key()), i});
            bool flipped = flip_rng.coin();

            TrainingExample rendered =
                task_kind == TaskKind::FactualComparison
                    ? render_comparison(domain, registry, pair, parsed.attribute, parsed.order,
                                        parsed.style, flipped)
                    : render_decision(domain, registry, pair, parsed.preference(), flipped);

            TestCase test_case;
            test_case.prompt = rendered.prompt;
            test_case.correct = rendered.completion;
            test_case.wrong = rendered.completion == pair.first.display_name
                                  ? pair.second.display_name
                                  : pair.first.display_name;
            test_case.task_kind = task_kind;
            test_case.phrasing_id = phrasing;
            test_case.pair_key = pair.key();
            suite.cases.push_back(std::move(test_case));
        }
    }
    return suite;
}

CaseResult score_case(Backend& backend, const TestCase& test_case,
                      const std::string& prompt_prefix) {
    CaseResult result;
    try {
        CaseMeta meta{test_case.task_kind, test_case.phrasing_id, test_case.pair_key};
        ScoredCandidates scored = backend.score_candidates(
            prompt_prefix + test_case.prompt, {test_case.correct, test_case.wrong}, &meta);
        if (scored.candidates.size() != 2)
            throw BackendError("backend returned " + std::to_string(scored.candidates.size()) +
                               " candidate scores, expected 2");
        double s_correct = scored.candidates[0].score;
        double s_wrong = scored.candidates[1].score;
        if (!std::isfinite(s_correct) || !std::isfinite(s_wrong))
            throw BackendError("non-finite candidate score");
        // Ties score 0: never credit the model for indifference.
        result.score = s_correct > s_wrong ? 1 : 0;
    } catch (const Error& e) {
        result.errored = true;
        result.error = e.what();
    }
    return result;
}

EvalReport aggregate(const std::vector<std::pair<std::string, CaseResult>>& scored) {
    struct Bucket {
        size_t hits = 0;
        size_t n_scored = 0;
        size_t n_errors = 0;
    };
    std::map<std::string, Bucket> buckets;
    EvalReport report;
    for (const auto& [phrasing, result] : scored) {
        Bucket& b = buckets[phrasing];
        ++report.n_cases;
        if (result.errored) {
            ++b.n_errors;
            ++report.n_errors;
        } else {
            ++b.n_scored;
            b.hits += static_cast<size_t>(result.score);
        }
    }

    std::vector<double> accuracies;
    for (const auto& [phrasing, b] : buckets) {
        PhrasingStats stats;
        stats.n_scored = b.n_scored;
        stats.n_errors = b.n_errors;
        stats.accuracy =
            b.n_scored > 0 ? static_cast<double>(b.hits) / static_cast<double>(b.n_scored) : 0.0;
        report.per_phrasing[phrasing] = stats;
        if (b.n_scored > 0) accuracies.push_back(stats.accuracy);
    }

    if (!accuracies.empty()) {
        double sum = 0.0;
        for (double a : accuracies) sum += a;
        report.mean = sum / static_cast<double>(accuracies.size());
        double var = 0.0;
        for (double a : accuracies) var += (a - report.mean) * (a - report.mean);
        report.dispersion = std::sqrt(var / static_cast<double>(accuracies.size()));
    }
    return report;
}

EvalReport run_eval(Backend& backend, const TestSuite& suite,
                    const std::string& prompt_prefix, unsigned concurrency,
                    std::vector<CaseResult>* per_case) {
    std::vector<CaseResult> results(suite.cases.size());
    if (concurrency <= 1 || suite.cases.size() < 2) {
        for (size_t i = 0; i < suite.cases.size(); ++i)
            results[i] = score_case(backend, suite.cases[i], prompt_prefix);
    } else {
        unsigned workers = std::min<unsigned>(concurrency, std::thread::hardware_concurrency());
        if (workers == 0) workers = 2;
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) {
            threads.emplace_back([&, t]() {
                for (size_t i = t; i < suite.cases.size(); i += workers)
                    results[i] = score_case(backend, suite.cases[i], prompt_prefix);
            });
        }
        for (std::thread& th : threads) th.join();
    }

    std::vector<std::pair<std::string, CaseResult>> scored;
    scored.reserve(results.size());
    for (size_t i = 0; i < results.size(); ++i)
        scored.emplace_back(suite.cases[i].phrasing_id, results[i]);

    EvalReport report = aggregate(scored);
    report.backend_kind = backend.kind_name();
    report.suite_fingerprint = fingerprint(suite.to_json());
    if (per_case) *per_case = std::move(results);
    return report;
}

std::string cases_to_csv(const TestSuite& suite, const std::vector<CaseResult>& results) {
    if (suite.cases.size() != results.size())
        throw ConfigError("case results do not match the suite size");
    std::string out = "phrasing_id,pair_key,correct,wrong,score,errored,error\n";
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += "\"\"";
            else q += c;
        }
        return q + "\"";
    };
    for (size_t i = 0; i < suite.cases.size(); ++i) {
        const TestCase& c = suite.cases[i];
        const CaseResult& r = results[i];
        out += c.phrasing_id + "," + c.pair_key + "," + quote(c.correct) + "," +
               quote(c.wrong) + "," + std::to_string(r.score) + "," +
               (r.errored ? "1" : "0") + "," + quote(r.error) + "\n";
    }
    return out;
}

json EvalReport::to_json() const {
    json per = json::object();
    for (const auto& [phrasing, stats] : per_phrasing) {
        per[phrasing] = json{
            {"accuracy", stats.accuracy},
            {"n_scored", stats.n_scored},
            {"n_errors", stats.n_errors},
        };
    }
    return json{
        {"schema_version", 1},
        {"mean", mean},
        {"dispersion", dispersion},
        {"n_cases", n_cases},
        {"n_errors", n_errors},
        {"backend", backend_kind},
        {"suite_fingerprint", suite_fingerprint},
        {"per_phrasing", per},
    };
}

EvalReport EvalReport::from_json(const json& doc) {
    require_schema(doc, 1, "eval report");
    EvalReport r;
    r.mean = doc.at("mean").get<double>();
    r.dispersion = doc.at("dispersion").get<double>();
    r.n_cases = doc.at("n_cases").get<size_t>();
    r.n_errors = doc.at("n_errors").get<size_t>();
    r.backend_kind = doc.value("backend", std::string{});
    r.suite_fingerprint = doc.value("suite_fingerprint", std::string{});
    for (auto& [phrasing, stats] : doc.at("per_phrasing").items()) {
        PhrasingStats s;
        s.accuracy = stats.at("accuracy").get<double>();
        s.n_scored = stats.at("n_scored").get<size_t>();
        s.n_errors = stats.at("n_errors").get<size_t>();
        r.per_phrasing[phrasing] = s;
    }
    return r;
}

} // namespace cft
