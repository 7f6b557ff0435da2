// Command-line entry point wiring the pipeline stages together. Anything that
// affects data content lives in config files; flags cover I/O and verbosity.

#include "cft/backend.hpp"
#include "cft/cot.hpp"
#include "cft/curriculum.hpp"
#include "cft/error.hpp"
#include "cft/eval.hpp"
#include "cft/ingest.hpp"
#include "cft/pipeline.hpp"
#include "cft/split.hpp"
#include "cft/tokenizer.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <set>
#include <thread>

namespace {

using namespace cft;

std::filesystem::path parent_dir(const std::filesystem::path& p) {
    auto parent = p.parent_path();
    return parent.empty() ? std::filesystem::path(".") : parent;
}

Domain load_domain(const std::filesystem::path& path) {
    return Domain::from_json(read_json_file(path));
}

std::vector<TrainingExample> load_examples(const std::filesystem::path& path) {
    std::vector<TrainingExample> out;
    for (const json& line : read_jsonl_file(path)) out.push_back(TrainingExample::from_json(line));
    return out;
}

void save_examples(const std::filesystem::path& path,
                   const std::vector<TrainingExample>& examples) {
    std::vector<json> lines;
    lines.reserve(examples.size());
    for (const TrainingExample& ex : examples) lines.push_back(ex.to_json());
    write_jsonl_file(path, lines);
}

std::unique_ptr<Backend> backend_from_file(const std::filesystem::path& cfg_path,
                                           const Domain* domain) {
    BackendConfig cfg = BackendConfig::from_json(read_json_file(cfg_path));
    return make_backend(cfg, domain);
}

int run(int argc, char** argv) {
    CLI::App app{"compositional fine-tuning data and evaluation toolchain"};
    app.require_subcommand(1);

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "build a domain from raw tables");
    std::string ingest_config, ingest_out = "domain.json";
    uint64_t ingest_seed = 0;
    ingest_cmd->add_option("--config", ingest_config, "ingest config file")->required();
    ingest_cmd->add_option("--seed", ingest_seed, "rng seed");
    ingest_cmd->add_option("--out", ingest_out, "output domain file");
    ingest_cmd->callback([&]() {
        json cfg = read_json_file(ingest_config);
        IngestResult result = run_ingest(cfg, parent_dir(ingest_config), ingest_seed);
        for (const std::string& w : result.stats.warnings) std::cerr << "warn: " << w << "\n";
        write_json_file(ingest_out, result.domain.to_json());
        std::cout << "domain '" << result.domain.name << "': " << result.domain.items.size()
                  << " items (" << result.stats.skipped << " rows skipped of "
                  << result.stats.rows_considered << ")\n";
    });

    // split
    auto* split_cmd = app.add_subcommand("split", "train/test item split");
    std::string split_domain, split_out = "split.json";
    double split_fraction = 0.3;
    uint64_t split_seed = 0;
    split_cmd->add_option("--domain", split_domain, "domain file")->required();
    split_cmd->add_option("--fraction", split_fraction, "train fraction");
    split_cmd->add_option("--seed", split_seed, "rng seed");
    split_cmd->add_option("--out", split_out, "output split file");
    split_cmd->callback([&]() {
        Domain domain = load_domain(split_domain);
        ItemSplit split = split_items(domain, split_fraction, split_seed);
        write_json_file(split_out, split.to_json());
        std::cout << split.train_ids.size() << " train / " << split.test_ids.size()
                  << " test items\n";
    });

    // pairs
    auto* pairs_cmd = app.add_subcommand("pairs", "enumerate qualifying pairs");
    std::string pairs_domain, pairs_split, pairs_origin = "train", pairs_out = "pairs.json";
    pairs_cmd->add_option("--domain", pairs_domain, "domain file")->required();
    pairs_cmd->add_option("--split", pairs_split, "split file")->required();
    pairs_cmd->add_option("--origin", pairs_origin, "train|test");
    pairs_cmd->add_option("--out", pairs_out, "output pairs file");
    pairs_cmd->callback([&]() {
        Domain domain = load_domain(pairs_domain);
        ItemSplit split = ItemSplit::from_json(read_json_file(pairs_split));
        Origin origin = origin_from_string(pairs_origin);
        const auto& ids = origin == Origin::Train ? split.train_ids : split.test_ids;
        PairSet pairs = enumerate_pairs(domain, ids, origin);
        write_json_file(pairs_out, pairs.to_json());
        std::cout << pairs.pairs.size() << " qualifying " << pairs_origin << " pairs\n";
    });

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "render component-task corpora");
    std::string gen_domain, gen_split, gen_pairs, gen_registry, gen_out_dir = "corpora";
    std::string gen_tasks = "fs,fc,dt,neg", gen_tokenizer;
    std::string gen_dt_filter;
    uint64_t gen_seed = 0;
    gen_cmd->add_option("--domain", gen_domain, "domain file")->required();
    gen_cmd->add_option("--split", gen_split, "split file (leakage guard)")->required();
    gen_cmd->add_option("--pairs", gen_pairs, "pairs file (train origin)");
    gen_cmd->add_option("--registry", gen_registry, "phrasing registry")->required();
    gen_cmd->add_option("--tasks", gen_tasks, "comma list of fs,fc,dt,neg");
    gen_cmd->add_option("--tokenizer", gen_tokenizer, "tokenizer config file");
    gen_cmd->add_option("--dt-attribute", gen_dt_filter, "restrict decision templates");
    gen_cmd->add_option("--seed", gen_seed, "rng seed");
    gen_cmd->add_option("--out", gen_out_dir, "output directory");
    gen_cmd->callback([&]() {
        Domain domain = load_domain(gen_domain);
        ItemSplit split = ItemSplit::from_json(read_json_file(gen_split));
        PhrasingRegistry registry = PhrasingRegistry::from_json(read_json_file(gen_registry));
        registry.validate(domain);
        TokenizerSpec tok_spec;
        if (!gen_tokenizer.empty())
            tok_spec = TokenizerSpec::from_json(read_json_file(gen_tokenizer));
        Tokenizer tokenizer = Tokenizer::make(tok_spec);

        std::set<std::string> tasks;
        for (auto&& part : CLI::detail::split(gen_tasks, ',')) tasks.insert(part);

        bool needs_pairs = tasks.count("fc") || tasks.count("dt");
        PairSet pairs;
        if (needs_pairs) {
            if (gen_pairs.empty())
                throw ConfigError("--pairs required for comparison/decision tasks");
            pairs = PairSet::from_json(read_json_file(gen_pairs), domain);
            if (pairs.origin != Origin::Train)
                throw DataError("training corpora must come from train-origin pairs");
            for (const ItemPair& p : pairs.pairs) {
                if (!split.is_train(p.first.id) || !split.is_train(p.second.id))
                    throw DataError("pair " + p.key() + " leaks outside the training split");
            }
        }

        std::filesystem::create_directories(gen_out_dir);
        auto emit = [&](const std::string& name, std::vector<TrainingExample> examples) {
            annotate_token_counts(examples, tokenizer);
            save_examples(std::filesystem::path(gen_out_dir) / (name + ".jsonl"), examples);
            std::cout << name << ": " << examples.size() << " examples\n";
        };
        if (tasks.count("fs")) emit("fs", render_factual_statements(domain));
        if (tasks.count("fc"))
            emit("fc", render_factual_comparisons(pairs, domain, registry, gen_seed));
        if (tasks.count("dt")) {
            std::optional<std::string> filter;
            if (!gen_dt_filter.empty()) filter = gen_dt_filter;
            emit("dt", render_decision_templates(pairs, domain, registry, gen_seed, filter));
        }
        if (tasks.count("neg")) emit("neg", render_negation_statements(domain, registry));
    });

    // curriculum
    auto* cur_cmd = app.add_subcommand("curriculum", "assemble and export a curriculum");
    std::string cur_config, cur_fs, cur_fc, cur_dt, cur_neg, cur_out = "curriculum";
    cur_cmd->add_option("--config", cur_config, "curriculum config file")->required();
    cur_cmd->add_option("--fs", cur_fs, "factual statements jsonl");
    cur_cmd->add_option("--fc", cur_fc, "factual comparisons jsonl");
    cur_cmd->add_option("--dt", cur_dt, "decision templates jsonl");
    cur_cmd->add_option("--neg", cur_neg, "negation statements jsonl");
    cur_cmd->add_option("--out", cur_out, "output directory");
    cur_cmd->callback([&]() {
        CurriculumConfig cfg = CurriculumConfig::from_json(read_json_file(cur_config));
        TaskCorpora corpora;
        if (!cur_fs.empty()) corpora.fs = load_examples(cur_fs);
        if (!cur_fc.empty()) corpora.fc = load_examples(cur_fc);
        if (!cur_dt.empty()) corpora.dt = load_examples(cur_dt);
        if (!cur_neg.empty()) corpora.neg = load_examples(cur_neg);
        Curriculum curriculum = assemble(cfg, corpora);
        export_jsonl(curriculum, cur_out);
        std::cout << "curriculum '" << cfg.label() << "': " << curriculum.phases.size()
                  << " phases, " << curriculum.total_tokens() << " tokens\n";
    });

    // finetune
    auto* ft_cmd = app.add_subcommand("finetune", "submit fine-tune files to a backend");
    std::string ft_backend, ft_domain, ft_hyper;
    std::vector<std::string> ft_files;
    bool ft_poll = true;
    ft_cmd->add_option("--backend", ft_backend, "backend config file")->required();
    ft_cmd->add_option("--domain", ft_domain, "domain file (oracle backend)");
    ft_cmd->add_option("--files", ft_files, "jsonl files in phase order")->required();
    ft_cmd->add_option("--hyperparams", ft_hyper, "hyperparameter JSON file");
    ft_cmd->add_flag("--poll,!--no-poll", ft_poll, "poll job to a terminal state");
    ft_cmd->callback([&]() {
        std::optional<Domain> domain;
        if (!ft_domain.empty()) domain = load_domain(ft_domain);
        auto backend = backend_from_file(ft_backend, domain ? &*domain : nullptr);
        json hyper = ft_hyper.empty() ? json::object() : read_json_file(ft_hyper);
        std::vector<std::filesystem::path> files(ft_files.begin(), ft_files.end());
        FinetuneHandle handle = backend->submit_finetune(files, hyper);
        std::cout << "submitted job " << handle.job_ids.back() << "\n";
        if (ft_poll) {
            FinetuneStatus status = backend->poll_finetune(handle);
            while (!status.terminal()) {
                std::this_thread::sleep_for(std::chrono::seconds(5));
                status = backend->poll_finetune(handle);
            }
            std::cout << "job state: " << status.state;
            if (!status.fine_tuned_model.empty())
                std::cout << " model: " << status.fine_tuned_model;
            std::cout << "\n";
        }
    });

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "score a test suite");
    std::string ev_backend, ev_domain, ev_split, ev_registry, ev_suite;
    std::string ev_task = "dt", ev_out = "report.json", ev_suite_out;
    size_t ev_n = 200;
    uint64_t ev_seed = 0;
    unsigned ev_jobs = 1;
    eval_cmd->add_option("--backend", ev_backend, "backend config file")->required();
    eval_cmd->add_option("--domain", ev_domain, "domain file")->required();
    eval_cmd->add_option("--suite", ev_suite, "prebuilt suite file");
    eval_cmd->add_option("--split", ev_split, "split file (to build a suite)");
    eval_cmd->add_option("--registry", ev_registry, "registry (to build a suite)");
    eval_cmd->add_option("--task", ev_task, "fc|dt");
    eval_cmd->add_option("--n", ev_n, "cases per phrasing");
    eval_cmd->add_option("--seed", ev_seed, "rng seed");
    eval_cmd->add_option("--jobs", ev_jobs, "concurrent scoring workers");
    eval_cmd->add_option("--suite-out", ev_suite_out, "write the generated suite here");
    eval_cmd->add_option("--out", ev_out, "report output file");
    std::string ev_cases_csv;
    bool ev_greedy = false;
    eval_cmd->add_option("--cases-csv", ev_cases_csv, "per-case rows as CSV");
    eval_cmd->add_flag("--greedy-diagnostics", ev_greedy,
                       "record each case's greedy top-5 next to the CSV");
    eval_cmd->callback([&]() {
        Domain domain = load_domain(ev_domain);
        TestSuite suite;
        if (!ev_suite.empty()) {
            suite = TestSuite::from_json(read_json_file(ev_suite));
        } else {
            if (ev_split.empty() || ev_registry.empty())
                throw ConfigError("--split and --registry required to build a suite");
            ItemSplit split = ItemSplit::from_json(read_json_file(ev_split));
            PhrasingRegistry registry =
                PhrasingRegistry::from_json(read_json_file(ev_registry));
            registry.validate(domain);
            suite = generate_test_suite(split, domain, registry,
                                        task_kind_from_short(ev_task), ev_n, ev_seed);
            if (!ev_suite_out.empty()) write_json_file(ev_suite_out, suite.to_json());
        }
        auto backend = backend_from_file(ev_backend, &domain);
        std::vector<CaseResult> per_case;
        EvalReport report = run_eval(*backend, suite, {}, ev_jobs,
                                     ev_cases_csv.empty() ? nullptr : &per_case);
        write_json_file(ev_out, report.to_json());
        if (!ev_cases_csv.empty()) {
            write_file(ev_cases_csv, cases_to_csv(suite, per_case));
            if (ev_greedy) {
                // optional qualitative diagnostic, one line per case
                std::string diag = "phrasing_id,pair_key,greedy_top5\n";
                for (const TestCase& c : suite.cases) {
                    ScoredCandidates g = backend->generate_greedy(c.prompt, 5);
                    std::string tokens;
                    for (const CandidateScore& t : g.greedy_top5) {
                        if (!tokens.empty()) tokens += " | ";
                        tokens += t.text;
                    }
                    diag += c.phrasing_id + "," + c.pair_key + ",\"" + tokens + "\"\n";
                }
                write_file(ev_cases_csv + ".greedy.csv", diag);
            }
        }
        std::cout << "mean " << report.mean << " +/- " << report.dispersion << " over "
                  << report.n_cases << " cases (" << report.n_errors << " errors)\n";
    });

    // cot
    auto* cot_cmd = app.add_subcommand("cot", "few-shot prompting baselines");
    std::string cot_mode = "cot", cot_backend, cot_domain, cot_split, cot_pairs, cot_registry;
    std::string cot_suite, cot_exemplars, cot_out = "cot_report.json", cot_prefix_out;
    size_t cot_k = 8;
    uint64_t cot_seed = 0;
    unsigned cot_jobs = 1;
    cot_cmd->add_option("--mode", cot_mode, "plain|cot");
    cot_cmd->add_option("--k", cot_k, "number of exemplars");
    cot_cmd->add_option("--backend", cot_backend, "backend config file")->required();
    cot_cmd->add_option("--domain", cot_domain, "domain file")->required();
    cot_cmd->add_option("--split", cot_split, "split file")->required();
    cot_cmd->add_option("--pairs", cot_pairs, "train pairs file (to build exemplars)");
    cot_cmd->add_option("--registry", cot_registry, "registry file");
    cot_cmd->add_option("--exemplars", cot_exemplars, "literal exemplar file");
    cot_cmd->add_option("--suite", cot_suite, "test suite file")->required();
    cot_cmd->add_option("--seed", cot_seed, "rng seed");
    cot_cmd->add_option("--jobs", cot_jobs, "concurrent scoring workers");
    cot_cmd->add_option("--prefix-out", cot_prefix_out, "write the prompt prefix here");
    cot_cmd->add_option("--out", cot_out, "report output file");
    cot_cmd->callback([&]() {
        Domain domain = load_domain(cot_domain);
        ItemSplit split = ItemSplit::from_json(read_json_file(cot_split));
        TestSuite suite = TestSuite::from_json(read_json_file(cot_suite));
        std::vector<Exemplar> exemplars;
        if (cot_k > 0) {
            if (!cot_exemplars.empty()) {
                exemplars = load_exemplars(cot_exemplars);
            } else {
                if (cot_pairs.empty() || cot_registry.empty())
                    throw ConfigError("--pairs and --registry required to build exemplars");
                PhrasingRegistry registry =
                    PhrasingRegistry::from_json(read_json_file(cot_registry));
                registry.validate(domain);
                PairSet pairs = PairSet::from_json(read_json_file(cot_pairs), domain);
                exemplars = build_exemplars(domain, split, pairs, registry, cot_k, cot_seed);
            }
            if (exemplars.size() != cot_k)
                throw ConfigError("expected " + std::to_string(cot_k) + " exemplars, got " +
                                  std::to_string(exemplars.size()));
        }
        std::string prefix =
            build_prompt_prefix(exemplars, prompt_mode_from_string(cot_mode), split);
        if (!cot_prefix_out.empty()) write_file(cot_prefix_out, prefix);
        auto backend = backend_from_file(cot_backend, &domain);
        EvalReport report = evaluate_prompted(*backend, prefix, suite, cot_jobs);
        write_json_file(cot_out, report.to_json());
        std::cout << cot_mode << " (" << cot_k << "-shot): mean " << report.mean << " +/- "
                  << report.dispersion << " over " << report.n_cases << " cases\n";
    });

    // report
    auto* report_cmd = app.add_subcommand("report", "tabulate evaluation reports");
    std::vector<std::string> report_files;
    std::string report_out;
    report_cmd->add_option("--reports", report_files, "label=task=path triples or report files")
        ->required();
    report_cmd->add_option("--out", report_out, "write the table here (default stdout)");
    report_cmd->callback([&]() {
        std::vector<std::pair<std::string, std::map<std::string, EvalReport>>> rows;
        for (const std::string& entry : report_files) {
            // label=task=path, or a bare path (label/task from the file)
            std::string label, task, path = entry;
            size_t eq1 = entry.find('=');
            if (eq1 != std::string::npos) {
                size_t eq2 = entry.find('=', eq1 + 1);
                if (eq2 == std::string::npos)
                    throw ConfigError("expected label=task=path, got '" + entry + "'");
                label = entry.substr(0, eq1);
                task = entry.substr(eq1 + 1, eq2 - eq1 - 1);
                path = entry.substr(eq2 + 1);
            } else {
                label = std::filesystem::path(entry).stem().string();
                task = "score";
            }
            EvalReport report = EvalReport::from_json(read_json_file(path));
            auto it = std::find_if(rows.begin(), rows.end(),
                                   [&](const auto& r) { return r.first == label; });
            if (it == rows.end()) {
                rows.push_back({label, {}});
                it = rows.end() - 1;
            }
            it->second[task] = report;
        }
        std::string table = render_report_table(rows);
        if (report_out.empty()) std::cout << table;
        else write_file(report_out, table);
    });

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "assemble the ablation grid");
    std::string ab_domain, ab_fs, ab_fc, ab_dt, ab_neg, ab_out = "ablate";
    uint64_t ab_seed = 0;
    ablate_cmd->add_option("--domain", ab_domain, "domain file")->required();
    ablate_cmd->add_option("--fs", ab_fs, "factual statements jsonl")->required();
    ablate_cmd->add_option("--fc", ab_fc, "factual comparisons jsonl")->required();
    ablate_cmd->add_option("--dt", ab_dt, "decision templates jsonl")->required();
    ablate_cmd->add_option("--neg", ab_neg, "negation statements jsonl")->required();
    ablate_cmd->add_option("--seed", ab_seed, "rng seed");
    ablate_cmd->add_option("--out", ab_out, "output directory");
    ablate_cmd->callback([&]() {
        Domain domain = load_domain(ab_domain);
        TaskCorpora corpora;
        corpora.fs = load_examples(ab_fs);
        corpora.fc = load_examples(ab_fc);
        corpora.dt = load_examples(ab_dt);
        corpora.neg = load_examples(ab_neg);
        json manifest = run_ablate(domain, corpora, ab_seed, ab_out, std::cout);
        std::cout << manifest.at("rows").size() << " rows under " << ab_out << "\n";
    });

    // run (full pipeline)
    auto* run_cmd = app.add_subcommand("run", "execute the full pipeline from a run config");
    std::string run_config_path, run_out = "run";
    run_cmd->add_option("--config", run_config_path, "run config file")->required();
    run_cmd->add_option("--out", run_out, "run directory");
    run_cmd->callback([&]() {
        json doc = read_json_file(run_config_path);
        RunConfig cfg = RunConfig::from_json(doc, parent_dir(run_config_path));
        PipelineResult result = run_pipeline(cfg, run_out, std::cout);
        for (const auto& [task, report] : result.reports)
            std::cout << task << ": mean " << report.mean << " +/- " << report.dispersion
                      << "\n";
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const cft::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
}
