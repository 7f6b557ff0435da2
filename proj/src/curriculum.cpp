#include "cft/curriculum.hpp"
#include "cft/error.hpp"
#include "cft/rng.hpp"

#include <algorithm>
#include <numeric>

namespace cft {

void CurriculumConfig::validate() const {
    if (!include_fs && !include_fc && !include_dt && !include_neg)
        throw ConfigError("curriculum config enables no tasks");
    if (dt_upsample_to_tokens && !include_dt)
        throw ConfigError("dt_upsample_to_tokens requires include_dt");
    if (dt_attribute_filter && !include_dt)
        throw ConfigError("dt_attribute_filter requires include_dt");
}

std::string CurriculumConfig::label() const {
    std::string out;
    auto add = [&](const char* tag) {
        if (!out.empty()) out += "+";
        out += tag;
    };
    if (include_fs) add("fs");
    if (include_fc) add("fc");
    if (include_dt) {
        std::string tag = "dt";
        if (dt_attribute_filter) tag += "(" + *dt_attribute_filter + ")";
        if (dt_upsample_to_tokens) tag += "^";
        add(tag.c_str());
    }
    if (include_neg) add("neg");
    return out.empty() ? "none" : out;
}

json CurriculumConfig::to_json() const {
    json j{
        {"schema_version", 1},
        {"include_fs", include_fs},
        {"include_fc", include_fc},
        {"include_dt", include_dt},
        {"include_neg", include_neg},
        {"seed", seed},
    };
    if (dt_attribute_filter) j["dt_attribute_filter"] = *dt_attribute_filter;
    if (dt_upsample_to_tokens) j["dt_upsample_to_tokens"] = *dt_upsample_to_tokens;
    return j;
}

CurriculumConfig CurriculumConfig::from_json(const json& doc) {
    require_schema(doc, 1, "curriculum config");
    CurriculumConfig c;
    c.include_fs = doc.value("include_fs", false);
    c.include_fc = doc.value("include_fc", false);
    c.include_dt = doc.value("include_dt", false);
    c.include_neg = doc.value("include_neg", false);
    c.seed = doc.value("seed", uint64_t{0});
    if (doc.contains("dt_attribute_filter"))
        c.dt_attribute_filter = doc.at("dt_attribute_filter").get<std::string>();
    if (doc.contains("dt_upsample_to_tokens"))
        c.dt_upsample_to_tokens = doc.at("dt_upsample_to_tokens").get<uint64_t>();
    c.validate();
    return c;
}

uint64_t token_sum(const std::vector<TrainingExample>& examples) {
    uint64_t total = 0;
    for (const TrainingExample& ex : examples) total += ex.token_count;
    return total;
}

void annotate_token_counts(std::vector<TrainingExample>& examples, const Tokenizer& tokenizer) {
    for (TrainingExample& ex : examples)
        ex.token_count = tokenizer.count(ex.prompt + " " + ex.completion);
}

namespace {

void require_counted(const std::vector<TrainingExample>& pool, const char* what) {
    for (const TrainingExample& ex : pool) {
        if (ex.token_count == 0)
            throw ConfigError(std::string(what) +
                              " pool contains examples without token counts");
    }
}

} // namespace

BalanceResult balance_tokens(const std::vector<TrainingExample>& pool, uint64_t target_tokens,
                             uint64_t seed) {
    BalanceResult result;
    if (target_tokens == 0) return result;
    require_counted(pool, "balance");

    std::vector<size_t> order(pool.size());
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng = derive_rng(seed, {hash_bytes("token-balance")});
    shuffle(order, rng);

    uint64_t sum = 0;
    for (size_t idx : order) {
        result.examples.push_back(pool[idx]);
        sum += pool[idx].token_count;
        if (sum >= target_tokens) return result;
    }
    result.pool_exhausted = true;
    return result;
}

std::vector<TrainingExample> upsample_tokens(const std::vector<TrainingExample>& pool,
                                             uint64_t target_tokens, uint64_t seed) {
    if (target_tokens == 0) return {};
    require_counted(pool, "upsample");
    if (token_sum(pool) == 0) throw ConfigError("upsample pool has zero total tokens");

    std::vector<TrainingExample> out;
    uint64_t sum = 0;
    uint64_t pass = 0;
    while (sum < target_tokens) {
        std::vector<size_t> order(pool.size());
        std::iota(order.begin(), order.end(), size_t{0});
        Rng rng = derive_rng(seed, {hash_bytes("token-upsample"), pass});
        shuffle(order, rng);
        for (size_t idx : order) {
            out.push_back(pool[idx]);
            sum += pool[idx].token_count;
            if (sum >= target_tokens) break;
        }
        ++pass;
    }
    return out;
}

uint64_t Curriculum::total_tokens() const {
    uint64_t total = 0;
    for (const Phase& phase : phases) total += token_sum(phase.examples);
    return total;
}

Curriculum assemble(const CurriculumConfig& config, const TaskCorpora& corpora) {
    config.validate();

    auto require_nonempty = [](bool enabled, const std::vector<TrainingExample>& pool,
                               const char* name) {
        if (enabled && pool.empty())
            throw DataError(std::string("curriculum enables ") + name +
                            " but its corpus is empty");
    };
    require_nonempty(config.include_fs, corpora.fs, "factual statements");
    require_nonempty(config.include_fc, corpora.fc, "factual comparisons");
    require_nonempty(config.include_dt, corpora.dt, "decision templates");
    require_nonempty(config.include_neg, corpora.neg, "negation interpretations");

    // Decision templates, filtered and balanced.
    std::vector<TrainingExample> dt_used;
    bool dt_pool_exhausted = false;
    if (config.include_dt) {
        std::vector<TrainingExample> dt_pool;
        if (config.dt_attribute_filter) {
            for (const TrainingExample& ex : corpora.dt)
                if (ex.attribute == *config.dt_attribute_filter) dt_pool.push_back(ex);
            if (dt_pool.empty())
                throw DataError("decision-template fold for attribute '" +
                                *config.dt_attribute_filter + "' is empty");
        } else {
            dt_pool = corpora.dt;
        }

        if (config.dt_upsample_to_tokens) {
            require_counted(dt_pool, "decision-template");
            uint64_t budget = *config.dt_upsample_to_tokens;
            if (budget > token_sum(dt_pool)) {
                dt_used = upsample_tokens(dt_pool, budget, config.seed);
            } else {
                dt_used = balance_tokens(dt_pool, budget, config.seed).examples;
            }
        } else if (config.include_fc) {
            require_counted(corpora.fc, "factual-comparison");
            BalanceResult balanced =
                balance_tokens(dt_pool, token_sum(corpora.fc), config.seed);
            dt_used = std::move(balanced.examples);
            dt_pool_exhausted = balanced.pool_exhausted;
        } else {
            dt_used = std::move(dt_pool);
        }
    }

    Curriculum curriculum;
    Phase phase1, phase2;
    if (config.include_fs) {
        phase1.tasks.push_back(TaskKind::FactualStatement);
        phase1.examples.insert(phase1.examples.end(), corpora.fs.begin(), corpora.fs.end());
    }
    if (config.include_neg) {
        phase1.tasks.push_back(TaskKind::NegPrefInterpretation);
        phase1.examples.insert(phase1.examples.end(), corpora.neg.begin(), corpora.neg.end());
    }
    if (config.include_fc) {
        phase2.tasks.push_back(TaskKind::FactualComparison);
        phase2.examples.insert(phase2.examples.end(), corpora.fc.begin(), corpora.fc.end());
    }
    if (config.include_dt) {
        phase2.tasks.push_back(TaskKind::DecisionTemplate);
        phase2.examples.insert(phase2.examples.end(), dt_used.begin(), dt_used.end());
    }

    if (!phase1.examples.empty()) curriculum.phases.push_back(std::move(phase1));
    if (!phase2.examples.empty()) curriculum.phases.push_back(std::move(phase2));

    for (size_t i = 0; i < curriculum.phases.size(); ++i) {
        Rng rng = derive_rng(config.seed, {hash_bytes("phase-shuffle"), i});
        shuffle(curriculum.phases[i].examples, rng);
    }

    // Manifest: everything needed to reproduce or audit the assembly.
    json per_task = json::object();
    auto record = [&](TaskKind kind, const std::vector<TrainingExample>& pool) {
        per_task[task_kind_short(kind)] =
            json{{"count", pool.size()}, {"tokens", token_sum(pool)}};
    };
    if (config.include_fs) record(TaskKind::FactualStatement, corpora.fs);
    if (config.include_fc) record(TaskKind::FactualComparison, corpora.fc);
    if (config.include_dt) record(TaskKind::DecisionTemplate, dt_used);
    if (config.include_neg) record(TaskKind::NegPrefInterpretation, corpora.neg);

    json per_phase = json::array();
    for (const Phase& phase : curriculum.phases) {
        json tasks = json::array();
        for (TaskKind k : phase.tasks) tasks.push_back(task_kind_short(k));
        per_phase.push_back(json{{"tasks", tasks},
                                 {"count", phase.examples.size()},
                                 {"tokens", token_sum(phase.examples)}});
    }

    curriculum.manifest = json{
        {"schema_version", 1},
        {"config", config.to_json()},
        {"label", config.label()},
        {"per_task", per_task},
        {"phases", per_phase},
        {"total_examples",
         std::accumulate(curriculum.phases.begin(), curriculum.phases.end(), size_t{0},
                         [](size_t acc, const Phase& p) { return acc + p.examples.size(); })},
        {"total_tokens", curriculum.total_tokens()},
        {"dt_pool_exhausted", dt_pool_exhausted},
    };
    return curriculum;
}

std::vector<std::filesystem::path> export_jsonl(const Curriculum& curriculum,
                                                const std::filesystem::path& out_dir) {
    std::vector<std::filesystem::path> written;
    std::vector<json> all;
    for (size_t i = 0; i < curriculum.phases.size(); ++i) {
        std::vector<json> lines;
        lines.reserve(curriculum.phases[i].examples.size());
        for (const TrainingExample& ex : curriculum.phases[i].examples) {
            lines.push_back(json{{"prompt", ex.prompt}, {"completion", ex.completion}});
            all.push_back(lines.back());
        }
        std::filesystem::path path = out_dir / ("phase_" + std::to_string(i + 1) + ".jsonl");
        write_jsonl_file(path, lines);
        written.push_back(path);
    }
    std::filesystem::path train_path = out_dir / "train.jsonl";
    write_jsonl_file(train_path, all);
    written.push_back(train_path);

    json manifest = curriculum.manifest;
    json files = json::array();
    for (const auto& p : written) files.push_back(p.filename().string());
    manifest["files"] = files;
    std::filesystem::path manifest_path = out_dir / "manifest.json";
    write_json_file(manifest_path, manifest);
    written.push_back(manifest_path);
    return written;
}

} // namespace cft
