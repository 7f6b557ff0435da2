#pragma once
// Phased curriculum assembly: component-task corpora are placed into
// dependency-ordered phases, shuffled within each phase, and token-balanced
// between comparisons and decision templates.
//
// Phase 1 holds tasks with no dependencies (statements, negation
// interpretations); phase 2 holds comparisons and decision templates.

#include "cft/phrasing.hpp"
#include "cft/tokenizer.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace cft {

struct CurriculumConfig {
    bool include_fs = false;
    bool include_fc = false;
    bool include_dt = false;
    bool include_neg = false;
    std::optional<std::string> dt_attribute_filter;
    // Explicit decision-template token budget. Used by the equal-data
    // control; samples with replacement once the pool is exhausted.
    std::optional<uint64_t> dt_upsample_to_tokens;
    uint64_t seed = 0;

    void validate() const;
    std::string label() const; // "fs+fc+dt", for manifests and reports

    json to_json() const;
    static CurriculumConfig from_json(const json& doc);
};

struct TaskCorpora {
    std::vector<TrainingExample> fs;
    std::vector<TrainingExample> fc;
    std::vector<TrainingExample> dt;
    std::vector<TrainingExample> neg;
};

struct Phase {
    std::vector<TaskKind> tasks;
    std::vector<TrainingExample> examples; // shuffled
};

struct Curriculum {
    std::vector<Phase> phases;
    json manifest; // counts, token totals, config, no wall-clock state

    uint64_t total_tokens() const;
};

struct BalanceResult {
    std::vector<TrainingExample> examples;
    bool pool_exhausted = false; // pool ran out below the target
};

// Uniform sample without replacement whose token sum first crosses the
// target; the crossing example is kept, so the overshoot is bounded by one
// example. A zero target yields an empty sample; a pool too small to reach
// the target is returned whole with pool_exhausted set.
BalanceResult balance_tokens(const std::vector<TrainingExample>& pool, uint64_t target_tokens,
                             uint64_t seed);

// Like balance_tokens but reuses the pool (with replacement across passes)
// until the budget is crossed.
std::vector<TrainingExample> upsample_tokens(const std::vector<TrainingExample>& pool,
                                             uint64_t target_tokens, uint64_t seed);

// Places enabled corpora into phases, balances decision templates against
// comparisons (or the explicit budget), shuffles each phase with the run
// seed. Enabled tasks with empty corpora are fatal.
Curriculum assemble(const CurriculumConfig& config, const TaskCorpora& corpora);

// One JSONL file per phase ({"prompt", "completion"} records), a
// concatenated train.jsonl, and manifest.json. Byte-identical across runs
// with equal inputs. Returns the written paths.
std::vector<std::filesystem::path> export_jsonl(const Curriculum& curriculum,
                                                const std::filesystem::path& out_dir);

// Fills token_count on each example: tokens of "prompt completion".
void annotate_token_counts(std::vector<TrainingExample>& examples, const Tokenizer& tokenizer);

uint64_t token_sum(const std::vector<TrainingExample>& examples);

} // namespace cft
