#include "cft/pipeline.hpp"
#include "cft/error.hpp"
#include "cft/rng.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace cft {

json RunConfig::to_json() const {
    json tasks = json::array();
    for (TaskKind k : eval_tasks) tasks.push_back(task_kind_short(k));
    return json{
        {"schema_version", 1},
        {"seed", seed},
        {"ingest", ingest_config.string()},
        {"train_fraction", train_fraction},
        {"registry", registry_path.string()},
        {"tokenizer", tokenizer.to_json()},
        {"curriculum", curriculum.to_json()},
        {"eval", json{{"n_per_phrasing", eval_n_per_phrasing}, {"tasks", tasks}}},
        {"backend", backend.to_json()},
        {"concurrency", concurrency},
    };
}

RunConfig RunConfig::from_json(const json& doc, const std::filesystem::path& base_dir) {
    require_schema(doc, 1, "run config");
    RunConfig c;
    c.base_dir = base_dir;
    c.seed = doc.at("seed").get<uint64_t>();
    c.ingest_config = doc.at("ingest").get<std::string>();
    c.train_fraction = doc.value("train_fraction", 0.3);
    c.registry_path = doc.at("registry").get<std::string>();
    if (doc.contains("tokenizer")) c.tokenizer = TokenizerSpec::from_json(doc.at("tokenizer"));
    json cur = doc.at("curriculum");
    if (!cur.contains("schema_version")) cur["schema_version"] = 1;
    if (!cur.contains("seed")) cur["seed"] = c.seed;
    c.curriculum = CurriculumConfig::from_json(cur);
    if (doc.contains("eval")) {
        const json& e = doc.at("eval");
        c.eval_n_per_phrasing = e.value("n_per_phrasing", size_t{200});
        if (e.contains("tasks")) {
            c.eval_tasks.clear();
            for (const json& t : e.at("tasks"))
                c.eval_tasks.push_back(task_kind_from_short(t.get<std::string>()));
        }
    }
    json backend = doc.at("backend");
    if (!backend.contains("schema_version")) backend["schema_version"] = 1;
    c.backend = BackendConfig::from_json(backend);
    c.concurrency = doc.value("concurrency", 1u);
    return c;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& p) {
    return p.is_absolute() ? p : base / p;
}

// Tracks stage fingerprints against the previous manifest so unchanged
// stages can be skipped.
class StageTracker {
public:
    StageTracker(const std::filesystem::path& out_dir, json config_echo)
        : out_dir_(out_dir) {
        std::filesystem::path manifest_path = out_dir / "manifest.json";
        if (std::filesystem::exists(manifest_path)) {
            try {
                previous_ = read_json_file(manifest_path);
            } catch (const Error&) {
                previous_ = json::object(); // unreadable manifest: rerun everything
            }
        }
        manifest_ = json{{"schema_version", 1},
                         {"config", std::move(config_echo)},
                         {"stages", json::object()}};
    }

    bool up_to_date(const std::string& stage, const std::string& input_fp,
                    const std::vector<std::filesystem::path>& outputs) const {
        if (!previous_.contains("stages")) return false;
        const json& stages = previous_.at("stages");
        if (!stages.contains(stage)) return false;
        if (stages.at(stage).value("input_fingerprint", std::string{}) != input_fp)
            return false;
        for (const auto& out : outputs)
            if (!std::filesystem::exists(out_dir_ / out)) return false;
        return true;
    }

    void record(const std::string& stage, const std::string& input_fp,
                const std::vector<std::filesystem::path>& outputs) {
        json files = json::array();
        for (const auto& out : outputs) files.push_back(out.generic_string());
        manifest_["stages"][stage] =
            json{{"input_fingerprint", input_fp}, {"outputs", files}};
    }

    void attach(const std::string& key, json value) { manifest_[key] = std::move(value); }

    json finish() {
        write_json_file(out_dir_ / "manifest.json", manifest_);
        return manifest_;
    }

private:
    std::filesystem::path out_dir_;
    json previous_;
    json manifest_;
};

std::vector<json> examples_to_jsonl(const std::vector<TrainingExample>& examples) {
    std::vector<json> lines;
    lines.reserve(examples.size());
    for (const TrainingExample& ex : examples) lines.push_back(ex.to_json());
    return lines;
}

std::vector<TrainingExample> examples_from_jsonl(const std::filesystem::path& path) {
    std::vector<TrainingExample> out;
    for (const json& line : read_jsonl_file(path)) out.push_back(TrainingExample::from_json(line));
    return out;
}

} // namespace

PipelineResult run_pipeline(const RunConfig& config, const std::filesystem::path& out_dir,
                            std::ostream& log) {
    std::filesystem::create_directories(out_dir);
    PipelineResult result;

    std::filesystem::path ingest_path = resolve(config.base_dir, config.ingest_config);
    json ingest_cfg = read_json_file(ingest_path);
    // table paths inside the ingest config resolve against its own directory
    std::filesystem::path ingest_base =
        ingest_path.has_parent_path() ? ingest_path.parent_path() : std::filesystem::path(".");
    json registry_doc = read_json_file(resolve(config.base_dir, config.registry_path));
    PhrasingRegistry registry = PhrasingRegistry::from_json(registry_doc);

    StageTracker tracker(out_dir, config.to_json());
    auto stage = [&](const std::string& name, const std::string& input_fp,
                     const std::vector<std::filesystem::path>& outputs, auto&& body) {
        bool skip = tracker.up_to_date(name, input_fp, outputs);
        if (skip) {
            log << "[" << name << "] unchanged, skipping\n";
        } else {
            log << "[" << name << "] running\n";
            try {
                body();
            } catch (const Error& e) {
                log << "[" << name << "] failed: " << e.what() << "\n";
                throw Error("stage '" + name + "' failed: " + e.what());
            }
        }
        tracker.record(name, input_fp, outputs);
        result.stages.push_back(StageStatus{name, skip});
    };

    // ingest
    std::string ingest_fp =
        fingerprint(json{{"cfg", ingest_cfg}, {"seed", config.seed}});
    stage("ingest", ingest_fp, {"domain.json"}, [&]() {
        IngestResult ingested = run_ingest(ingest_cfg, ingest_base, config.seed);
        write_json_file(out_dir / "domain.json", ingested.domain.to_json());
        for (const std::string& w : ingested.stats.warnings) log << "  warn: " << w << "\n";
        log << "  items: " << ingested.domain.items.size()
            << ", skipped rows: " << ingested.stats.skipped << "\n";
    });
    Domain domain = Domain::from_json(read_json_file(out_dir / "domain.json"));
    registry.validate(domain);

    // split
    std::string split_fp = fingerprint(json{{"domain", fingerprint(domain.to_json())},
                                            {"fraction", config.train_fraction},
                                            {"seed", config.seed}});
    stage("split", split_fp, {"split.json"}, [&]() {
        ItemSplit split = split_items(domain, config.train_fraction, config.seed);
        write_json_file(out_dir / "split.json", split.to_json());
        log << "  train items: " << split.train_ids.size()
            << ", test items: " << split.test_ids.size() << "\n";
    });
    ItemSplit split = ItemSplit::from_json(read_json_file(out_dir / "split.json"));

    // pairs
    std::string pairs_fp = fingerprint(json{{"split", split_fp}});
    stage("pairs", pairs_fp, {"pairs_train.json", "pairs_test.json"}, [&]() {
        PairSet train_pairs = enumerate_pairs(domain, split.train_ids, Origin::Train);
        PairSet test_pairs = enumerate_pairs(domain, split.test_ids, Origin::Test);
        write_json_file(out_dir / "pairs_train.json", train_pairs.to_json());
        write_json_file(out_dir / "pairs_test.json", test_pairs.to_json());
        log << "  train pairs: " << train_pairs.pairs.size()
            << ", test pairs: " << test_pairs.pairs.size() << "\n";
    });
    PairSet train_pairs = PairSet::from_json(read_json_file(out_dir / "pairs_train.json"), domain);

    // generate training corpora
    Tokenizer tokenizer = Tokenizer::make(config.tokenizer);
    std::string gen_fp = fingerprint(json{{"pairs", pairs_fp},
                                          {"registry", fingerprint(registry_doc)},
                                          {"tokenizer", config.tokenizer.to_json()},
                                          {"seed", config.seed}});
    std::vector<std::filesystem::path> corpus_files = {"corpora/fs.jsonl", "corpora/fc.jsonl",
                                                       "corpora/dt.jsonl", "corpora/neg.jsonl"};
    stage("generate", gen_fp, corpus_files, [&]() {
        TaskCorpora corpora;
        corpora.fs = render_factual_statements(domain);
        corpora.fc = render_factual_comparisons(train_pairs, domain, registry, config.seed);
        corpora.dt = render_decision_templates(train_pairs, domain, registry, config.seed);
        corpora.neg = render_negation_statements(domain, registry);
        for (auto* pool : {&corpora.fs, &corpora.fc, &corpora.dt, &corpora.neg})
            annotate_token_counts(*pool, tokenizer);
        write_jsonl_file(out_dir / "corpora/fs.jsonl", examples_to_jsonl(corpora.fs));
        write_jsonl_file(out_dir / "corpora/fc.jsonl", examples_to_jsonl(corpora.fc));
        write_jsonl_file(out_dir / "corpora/dt.jsonl", examples_to_jsonl(corpora.dt));
        write_jsonl_file(out_dir / "corpora/neg.jsonl", examples_to_jsonl(corpora.neg));
        log << "  fs: " << corpora.fs.size() << ", fc: " << corpora.fc.size()
            << ", dt: " << corpora.dt.size() << ", neg: " << corpora.neg.size() << "\n";
    });

    // curriculum
    CurriculumConfig cur_cfg = config.curriculum;
    cur_cfg.seed = config.seed;
    std::string cur_fp = fingerprint(json{{"generate", gen_fp}, {"cfg", cur_cfg.to_json()}});
    stage("curriculum", cur_fp, {"curriculum/train.jsonl", "curriculum/manifest.json"}, [&]() {
        TaskCorpora corpora;
        corpora.fs = examples_from_jsonl(out_dir / "corpora/fs.jsonl");
        corpora.fc = examples_from_jsonl(out_dir / "corpora/fc.jsonl");
        corpora.dt = examples_from_jsonl(out_dir / "corpora/dt.jsonl");
        corpora.neg = examples_from_jsonl(out_dir / "corpora/neg.jsonl");
        Curriculum curriculum = assemble(cur_cfg, corpora);
        export_jsonl(curriculum, out_dir / "curriculum");
        log << "  phases: " << curriculum.phases.size()
            << ", total tokens: " << curriculum.total_tokens() << "\n";
    });

    // evaluate
    std::unique_ptr<Backend> backend = make_backend(config.backend, &domain);
    for (TaskKind task : config.eval_tasks) {
        std::string shorthand = task_kind_short(task);
        std::string eval_fp = fingerprint(json{{"split", split_fp},
                                               {"registry", fingerprint(registry_doc)},
                                               {"task", shorthand},
                                               {"n", config.eval_n_per_phrasing},
                                               {"seed", config.seed},
                                               {"backend", config.backend.to_json()}});
        std::filesystem::path suite_file = "suite_" + shorthand + ".json";
        std::filesystem::path report_file = "report_" + shorthand + ".json";
        stage("evaluate_" + shorthand, eval_fp, {suite_file, report_file}, [&]() {
            TestSuite suite = generate_test_suite(split, domain, registry, task,
                                                  config.eval_n_per_phrasing, config.seed);
            write_json_file(out_dir / suite_file, suite.to_json());
            EvalReport report = run_eval(*backend, suite, {}, config.concurrency);
            write_json_file(out_dir / report_file, report.to_json());
            log << "  " << shorthand << ": mean " << report.mean << " +/- "
                << report.dispersion << " over " << report.n_cases << " cases ("
                << report.n_errors << " errors)\n";
        });
        result.reports[shorthand] =
            EvalReport::from_json(read_json_file(out_dir / report_file));
    }

    result.manifest = tracker.finish();
    return result;
}

namespace {

CurriculumConfig grid_config(bool fs, bool fc, bool dt, bool neg, uint64_t seed) {
    CurriculumConfig c;
    c.include_fs = fs;
    c.include_fc = fc;
    c.include_dt = dt;
    c.include_neg = neg;
    c.seed = seed;
    return c;
}

} // namespace

json run_ablate(const Domain& domain, const TaskCorpora& corpora, uint64_t seed,
                const std::filesystem::path& out_dir, std::ostream& log) {
    std::filesystem::create_directories(out_dir);

    std::vector<AblateRow> rows;
    // Component grid: every FS x FC x DT combination; the all-off row is the
    // pretrained baseline and assembles nothing.
    for (int mask = 0; mask < 8; ++mask) {
        bool fs = mask & 4, fc = mask & 2, dt = mask & 1;
        AblateRow row;
        row.id = "grid_" + std::string(fs ? "fs" : "xx") + "_" + (fc ? "fc" : "xx") + "_" +
                 (dt ? "dt" : "xx");
        if (mask == 0) {
            row.note = "pretrained baseline (no fine-tuning data)";
        } else {
            row.config = grid_config(fs, fc, dt, false, seed);
        }
        rows.push_back(std::move(row));
    }
    // Attribute folds, each with and without negation interpretations.
    for (const AttributeSpec& attr : domain.attributes) {
        for (bool neg : {false, true}) {
            AblateRow row;
            row.id = "fold_" + attr.name + (neg ? "_neg" : "");
            CurriculumConfig c = grid_config(true, true, true, neg, seed);
            c.dt_attribute_filter = attr.name;
            row.config = c;
            row.note = "decision templates restricted to " + attr.name;
            rows.push_back(std::move(row));
        }
    }

    json manifest{{"schema_version", 1}, {"seed", seed}, {"rows", json::array()}};
    uint64_t full_phase2_tokens = 0;
    uint64_t full_total_tokens = 0;

    auto assemble_row = [&](AblateRow& row) -> json {
        json entry{{"id", row.id}};
        if (!row.note.empty()) entry["note"] = row.note;
        if (!row.config) {
            entry["baseline"] = true;
            log << "  " << row.id << ": baseline, nothing assembled\n";
            return entry;
        }
        Curriculum curriculum = assemble(*row.config, corpora);
        export_jsonl(curriculum, out_dir / row.id);
        entry["label"] = row.config->label();
        entry["total_tokens"] = curriculum.total_tokens();
        entry["total_examples"] = curriculum.manifest.at("total_examples");
        if (row.id == "grid_fs_fc_dt") {
            full_total_tokens = curriculum.total_tokens();
            for (const Phase& p : curriculum.phases) {
                bool is_phase2 = std::any_of(p.tasks.begin(), p.tasks.end(), [](TaskKind k) {
                    return k == TaskKind::FactualComparison || k == TaskKind::DecisionTemplate;
                });
                if (is_phase2) full_phase2_tokens += token_sum(p.examples);
            }
        }
        log << "  " << row.id << ": " << curriculum.total_tokens() << " tokens\n";
        return entry;
    };

    for (AblateRow& row : rows) manifest["rows"].push_back(assemble_row(row));

    // Equal-data control: decision templates upsampled until the fs+dt
    // configuration carries the same total tokens as fs+fc+dt.
    if (full_phase2_tokens > 0) {
        AblateRow control;
        control.id = "control_fs_dt_equal_tokens";
        CurriculumConfig c = grid_config(true, false, true, false, seed);
        c.dt_upsample_to_tokens = full_phase2_tokens;
        control.config = c;
        control.note = "token-matched to grid_fs_fc_dt (" +
                       std::to_string(full_total_tokens) + " tokens)";
        json entry = assemble_row(control);
        entry["matched_row"] = "grid_fs_fc_dt";
        entry["matched_tokens"] = full_total_tokens;
        manifest["rows"].push_back(std::move(entry));
    }

    write_json_file(out_dir / "ablate_manifest.json", manifest);
    return manifest;
}

std::string render_report_table(
    const std::vector<std::pair<std::string, std::map<std::string, EvalReport>>>& rows) {
    std::vector<std::string> columns;
    for (const auto& [label, reports] : rows)
        for (const auto& [task, report] : reports)
            if (std::find(columns.begin(), columns.end(), task) == columns.end())
                columns.push_back(task);
    std::sort(columns.begin(), columns.end());

    size_t label_width = 6;
    for (const auto& [label, reports] : rows) label_width = std::max(label_width, label.size());

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(label_width + 2)) << "config";
    for (const std::string& c : columns) out << std::setw(16) << c;
    out << "\n";
    out << std::string(label_width + 2 + 16 * columns.size(), '-') << "\n";
    for (const auto& [label, reports] : rows) {
        out << std::setw(static_cast<int>(label_width + 2)) << label;
        for (const std::string& c : columns) {
            auto it = reports.find(c);
            if (it == reports.end()) {
                out << std::setw(16) << "-";
            } else {
                std::ostringstream cell;
                cell << std::fixed << std::setprecision(2) << it->second.mean << " ± "
                     << std::setprecision(2) << it->second.dispersion;
                out << std::setw(16) << cell.str();
            }
        }
        out << "\n";
    }
    return out.str();
}

} // namespace cft
