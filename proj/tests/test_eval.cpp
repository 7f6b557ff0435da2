#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cft/error.hpp"
#include "cft/eval.hpp"
#include "test_util.hpp"

#include <set>

using namespace cft;

namespace {

struct Harness {
    Domain domain;
    PhrasingRegistry registry;
    ItemSplit split;

    explicit Harness(size_t n_items = 60, uint64_t seed = 77)
        : domain(test::make_synthetic_domain(n_items, seed)),
          registry(test::make_registry(domain)),
          split(split_items(domain, 0.3, seed)) {}
};

// Scores every candidate via a caller-supplied table; cases not listed score
// the correct answer lower (a deliberately adversarial default).
class StubBackend final : public Backend {
public:
    double correct_score = 0.0;
    double wrong_score = 1.0;
    bool fail_every_third = false;
    mutable int calls = 0;

    ScoredCandidates score_candidates(const std::string& prompt,
                                      const std::vector<std::string>& candidates,
                                      const CaseMeta*) override {
        ++calls;
        if (fail_every_third && calls % 3 == 0) throw BackendError("synthetic outage");
        ScoredCandidates out;
        out.prompt = prompt;
        out.candidates.push_back({candidates[0], correct_score});
        for (size_t i = 1; i < candidates.size(); ++i)
            out.candidates.push_back({candidates[i], wrong_score});
        return out;
    }
    ScoredCandidates generate_greedy(const std::string&, int) override { return {}; }
    FinetuneHandle submit_finetune(const std::vector<std::filesystem::path>&,
                                   const json&) override {
        return {};
    }
    FinetuneStatus poll_finetune(FinetuneHandle&) override {
        return FinetuneStatus{"succeeded", "", ""};
    }
    std::string kind_name() const override { return "stub"; }
};

} // namespace

TEST_CASE("suite sizes are phrasings times n") {
    Harness h;
    TestSuite fc = generate_test_suite(h.split, h.domain, h.registry,
                                       TaskKind::FactualComparison, 5, 9);
    CHECK(fc.cases.size() == 8 * 5);
    TestSuite dt = generate_test_suite(h.split, h.domain, h.registry,
                                       TaskKind::DecisionTemplate, 5, 9);
    CHECK(dt.cases.size() == 32 * 5);
}

TEST_CASE("a one-case-per-phrasing suite uses test items only") {
    Harness h;
    TestSuite suite =
        generate_test_suite(h.split, h.domain, h.registry, TaskKind::DecisionTemplate, 1, 3);
    CHECK(suite.cases.size() == 32);
    for (const TestCase& c : suite.cases) {
        size_t bar = c.pair_key.find('|');
        std::string id1 = c.pair_key.substr(0, bar);
        std::string id2 = c.pair_key.substr(bar + 1);
        CHECK(h.split.is_test(id1));
        CHECK(h.split.is_test(id2));
        CHECK_FALSE(h.split.is_train(id1));
        CHECK(c.correct != c.wrong);
    }
}

TEST_CASE("insufficient qualifying pairs fail with the achievable maximum") {
    Harness h(12, 5); // few test pairs
    try {
        generate_test_suite(h.split, h.domain, h.registry, TaskKind::FactualComparison,
                            100000, 1);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("achievable") != std::string::npos);
    }
}

TEST_CASE("suites are deterministic per seed and sample distinct pairs per phrasing") {
    Harness h;
    TestSuite a = generate_test_suite(h.split, h.domain, h.registry,
                                      TaskKind::FactualComparison, 10, 4);
    TestSuite b = generate_test_suite(h.split, h.domain, h.registry,
                                      TaskKind::FactualComparison, 10, 4);
    CHECK(a.to_json() == b.to_json());
    TestSuite c = generate_test_suite(h.split, h.domain, h.registry,
                                      TaskKind::FactualComparison, 10, 5);
    CHECK(a.to_json() != c.to_json());

    std::map<std::string, std::set<std::string>> pairs_by_phrasing;
    for (const TestCase& tc : a.cases)
        CHECK(pairs_by_phrasing[tc.phrasing_id].insert(tc.pair_key).second);
}

TEST_CASE("the oracle scores every case correct; an adversary scores zero") {
    Harness h;
    TestSuite suite = generate_test_suite(h.split, h.domain, h.registry,
                                          TaskKind::DecisionTemplate, 3, 11);
    BackendConfig cfg;
    cfg.kind = BackendKind::Oracle;
    auto oracle = make_backend(cfg, &h.domain);
    EvalReport report = run_eval(*oracle, suite);
    CHECK(report.mean == 1.0);
    CHECK(report.dispersion == 0.0);
    CHECK(report.n_errors == 0);
    CHECK(report.n_cases == suite.cases.size());

    StubBackend adversary; // wrong candidate always scores higher
    EvalReport bad = run_eval(adversary, suite);
    CHECK(bad.mean == 0.0);
}

TEST_CASE("ties score zero and monotone raises never flip one to zero") {
    TestCase tc;
    tc.prompt = "p";
    tc.correct = "A";
    tc.wrong = "B";
    tc.task_kind = TaskKind::FactualComparison;
    tc.phrasing_id = "fc:alpha:higher:direct";
    tc.pair_key = "a|b";

    StubBackend stub;
    stub.correct_score = 0.5;
    stub.wrong_score = 0.5;
    CHECK(score_case(stub, tc).score == 0); // tie -> 0

    double previous = -1.0;
    for (double s : {0.2, 0.4, 0.5, 0.51, 0.9, 2.0}) {
        stub.correct_score = s;
        int got = score_case(stub, tc).score;
        CHECK(got >= previous); // raising the correct score never flips 1 -> 0
        previous = got;
    }
}

TEST_CASE("errored cases are excluded from accuracy but counted") {
    Harness h;
    TestSuite suite = generate_test_suite(h.split, h.domain, h.registry,
                                          TaskKind::FactualComparison, 6, 2);
    StubBackend stub;
    stub.correct_score = 1.0;
    stub.wrong_score = 0.0;
    stub.fail_every_third = true;
    EvalReport report = run_eval(stub, suite);
    CHECK(report.n_errors > 0);
    CHECK(report.n_cases == suite.cases.size());
    size_t scored = 0;
    for (const auto& [id, stats] : report.per_phrasing) {
        scored += stats.n_scored;
        CHECK(stats.n_scored + stats.n_errors > 0);
    }
    CHECK(scored + report.n_errors == suite.cases.size());
    CHECK(report.mean == 1.0); // the scored ones were all right
}

TEST_CASE("aggregation is the unweighted mean and population sd across phrasings") {
    std::vector<std::pair<std::string, CaseResult>> scored;
    for (int i = 0; i < 10; ++i) scored.push_back({"p1", CaseResult{1, false, ""}});
    for (int i = 0; i < 10; ++i) scored.push_back({"p2", CaseResult{0, false, ""}});
    EvalReport r = aggregate(scored);
    CHECK(r.mean == doctest::Approx(0.5));
    CHECK(r.dispersion == doctest::Approx(0.5));

    std::vector<std::pair<std::string, CaseResult>> perfect;
    for (int i = 0; i < 4; ++i) perfect.push_back({"p" + std::to_string(i), CaseResult{1, false, ""}});
    EvalReport p = aggregate(perfect);
    CHECK(p.mean == 1.0);
    CHECK(p.dispersion == 0.0);
}

TEST_CASE("random scoring lands near chance with binomial-scale dispersion") {
    Harness h;
    TestSuite suite = generate_test_suite(h.split, h.domain, h.registry,
                                          TaskKind::DecisionTemplate, 40, 21);
    BackendConfig cfg;
    cfg.kind = BackendKind::Random;
    cfg.seed = 99;
    auto backend = make_backend(cfg);
    EvalReport report = run_eval(*backend, suite);
    CHECK(report.mean > 0.42);
    CHECK(report.mean < 0.58);
    CHECK(report.dispersion < 0.2);
}

TEST_CASE("concurrent scoring matches sequential scoring exactly") {
    Harness h;
    TestSuite suite = generate_test_suite(h.split, h.domain, h.registry,
                                          TaskKind::FactualComparison, 8, 6);
    BackendConfig cfg;
    cfg.kind = BackendKind::Random;
    cfg.seed = 4;
    auto backend = make_backend(cfg);
    EvalReport seq = run_eval(*backend, suite, {}, 1);
    EvalReport par = run_eval(*backend, suite, {}, 4);
    CHECK(seq.to_json() == par.to_json());
}

TEST_CASE("reports round-trip through json") {
    Harness h;
    TestSuite suite = generate_test_suite(h.split, h.domain, h.registry,
                                          TaskKind::FactualComparison, 2, 8);
    BackendConfig cfg;
    cfg.kind = BackendKind::Oracle;
    auto oracle = make_backend(cfg, &h.domain);
    EvalReport report = run_eval(*oracle, suite);
    EvalReport back = EvalReport::from_json(report.to_json());
    CHECK(back.mean == report.mean);
    CHECK(back.per_phrasing.size() == report.per_phrasing.size());
    CHECK(back.suite_fingerprint == report.suite_fingerprint);

    TestSuite suite_back = TestSuite::from_json(suite.to_json());
    CHECK(suite_back.to_json() == suite.to_json());
}
