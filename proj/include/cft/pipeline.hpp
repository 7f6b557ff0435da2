#pragma once
// End-to-end pipeline: ingest -> split -> pairs -> generate -> curriculum ->
// evaluate -> report, with content-hash stage skipping and a run manifest
// that ties every artifact to the config and seed.

#include "cft/backend.hpp"
#include "cft/cot.hpp"
#include "cft/curriculum.hpp"
#include "cft/eval.hpp"
#include "cft/ingest.hpp"
#include "cft/tokenizer.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cft {

struct RunConfig {
    uint64_t seed = 0;
    std::filesystem::path base_dir;       // directory config paths resolve against
    std::filesystem::path ingest_config;
    double train_fraction = 0.3;
    std::filesystem::path registry_path;
    TokenizerSpec tokenizer;
    CurriculumConfig curriculum;
    size_t eval_n_per_phrasing = 200;
    std::vector<TaskKind> eval_tasks = {TaskKind::FactualComparison,
                                        TaskKind::DecisionTemplate};
    BackendConfig backend;
    unsigned concurrency = 1;

    json to_json() const;
    static RunConfig from_json(const json& doc, const std::filesystem::path& base_dir);
};

struct StageStatus {
    std::string name;
    bool skipped = false;
};

struct PipelineResult {
    std::vector<StageStatus> stages;
    json manifest;
    std::map<std::string, EvalReport> reports; // keyed by task shorthand
};

// Executes stages in dependency order under out_dir. A stage whose input
// fingerprint matches the previous run's manifest (and whose outputs exist)
// is skipped. The manifest carries no wall-clock state, so identical reruns
// produce identical manifests.
PipelineResult run_pipeline(const RunConfig& config, const std::filesystem::path& out_dir,
                            std::ostream& log);

struct AblateRow {
    std::string id;
    std::optional<CurriculumConfig> config; // nullopt = pretrained baseline row
    std::string note;
};

// The component-task ablation grid (all FS x FC x DT combinations), the
// per-attribute decision-template folds with and without negation
// interpretations, and the equal-data control matched in total tokens to the
// full configuration. Assembles and exports every non-baseline row.
json run_ablate(const Domain& domain, const TaskCorpora& corpora, uint64_t seed,
                const std::filesystem::path& out_dir, std::ostream& log);

// rows = (label, per-task reports); columns = task kinds; cells mean ± sd.
std::string render_report_table(
    const std::vector<std::pair<std::string, std::map<std::string, EvalReport>>>& rows);

} // namespace cft
