#pragma once
// Held-out test suites and pairwise candidate-likelihood scoring with
// per-phrasing aggregation.

#include "cft/backend.hpp"
#include "cft/phrasing.hpp"
#include "cft/split.hpp"

#include <map>
#include <string>
#include <vector>

namespace cft {

struct TestCase {
    std::string prompt;
    std::string correct;
    std::string wrong;
    TaskKind task_kind = TaskKind::FactualComparison;
    std::string phrasing_id;
    std::string pair_key;

    json to_json() const;
    static TestCase from_json(const json& doc);
};

struct TestSuite {
    std::string domain_name;
    TaskKind task_kind = TaskKind::FactualComparison;
    size_t n_per_phrasing = 0;
    uint64_t seed = 0;
    std::vector<TestCase> cases;

    json to_json() const;
    static TestSuite from_json(const json& doc);
};

// Builds n cases per phrasing from qualifying test-item pairs, sampling pairs
// without replacement within each phrasing. Too few pairs for any phrasing is
// fatal and reports the achievable maximum.
TestSuite generate_test_suite(const ItemSplit& split, const Domain& domain,
                              const PhrasingRegistry& registry, TaskKind task_kind,
                              size_t n_per_phrasing, uint64_t seed);

struct CaseResult {
    int score = 0;       // 1 iff correct strictly more likely than wrong
    bool errored = false;
    std::string error;
};

// Prefix is prepended to the case prompt (few-shot mode); empty means plain.
CaseResult score_case(Backend& backend, const TestCase& test_case,
                      const std::string& prompt_prefix = {});

struct PhrasingStats {
    double accuracy = 0.0;
    size_t n_scored = 0;
    size_t n_errors = 0;
};

struct EvalReport {
    std::map<std::string, PhrasingStats> per_phrasing;
    double mean = 0.0;       // unweighted mean of per-phrasing accuracies
    double dispersion = 0.0; // population std-dev across phrasings
    size_t n_cases = 0;
    size_t n_errors = 0;
    std::string backend_kind;
    std::string suite_fingerprint;

    json to_json() const;
    static EvalReport from_json(const json& doc);
};

EvalReport aggregate(const std::vector<std::pair<std::string, CaseResult>>& scored);

// Scores every case (optionally across worker threads; results are keyed by
// case index so the report is independent of completion order). When
// per_case is non-null it receives one result per suite case, in suite order.
EvalReport run_eval(Backend& backend, const TestSuite& suite,
                    const std::string& prompt_prefix = {}, unsigned concurrency = 1,
                    std::vector<CaseResult>* per_case = nullptr);

// One row per case: phrasing, pair, score/error flags.
std::string cases_to_csv(const TestSuite& suite, const std::vector<CaseResult>& results);

} // namespace cft
