#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cft/backend.hpp"
#include "cft/error.hpp"
#include "cft/split.hpp"
#include "test_util.hpp"

#include <cstdlib>

using namespace cft;

namespace {

// Deterministic, instantly advancing clock for limiter and retry tests.
class FakeClock final : public Clock {
public:
    double now() const override { return t_; }
    void sleep_for(double seconds) override { t_ += seconds; }
    double t_ = 0.0;
};

BackendConfig remote_config() {
    BackendConfig cfg;
    cfg.kind = BackendKind::Remote;
    cfg.endpoint = "http://fixture.invalid";
    cfg.model_id = "curie";
    cfg.auth_env = "CFT_TEST_KEY";
    cfg.rate_limit_per_sec = 100.0;
    cfg.retry.max_attempts = 3;
    cfg.retry.backoff_seconds = {0.01, 0.02};
    return cfg;
}

struct EnvGuard {
    EnvGuard() { setenv("CFT_TEST_KEY", "sk-fixture-key", 1); }
};
EnvGuard env_guard;

const std::string kPrompt = "Between London and Lisbon, the city with warmer weather is";

} // namespace

TEST_CASE("oracle scores the resolved answer strictly highest") {
    Domain d = test::make_synthetic_domain(10, 3);
    BackendConfig cfg;
    cfg.kind = BackendKind::Oracle;
    auto backend = make_backend(cfg, &d);

    const Item& a = d.items[0];
    const Item* b = nullptr;
    for (size_t i = 1; i < d.items.size(); ++i) {
        if (pair_qualifies(a, d.items[i], d)) {
            b = &d.items[i];
            break;
        }
    }
    REQUIRE(b != nullptr);
    ItemPair pair = ItemPair::make_canonical(a, *b);
    const Item& want = resolve_comparison(pair, d, "alpha", Order::Higher);
    const Item& other = want.id == pair.first.id ? pair.second : pair.first;

    CaseMeta meta{TaskKind::FactualComparison, "fc:alpha:higher:direct", pair.key()};
    ScoredCandidates scored = backend->score_candidates(
        "prompt", {want.display_name, other.display_name}, &meta);
    CHECK(scored.candidates[0].score > scored.candidates[1].score);
    CHECK(scored.greedy_top5.size() == 5);

    // metadata is required
    CHECK_THROWS_AS(backend->score_candidates("p", {"a", "b"}, nullptr), ConfigError);
    // fewer than two candidates is malformed
    CHECK_THROWS_AS(backend->score_candidates("p", {"solo"}, &meta), ConfigError);
}

TEST_CASE("random backend is deterministic per seed and near chance overall") {
    BackendConfig cfg;
    cfg.kind = BackendKind::Random;
    cfg.seed = 2024;
    auto backend = make_backend(cfg);

    size_t hits = 0;
    const size_t n = 6400;
    for (size_t i = 0; i < n; ++i) {
        std::string prompt = "case " + std::to_string(i);
        ScoredCandidates s = backend->score_candidates(prompt, {"right", "wrong"}, nullptr);
        if (s.candidates[0].score > s.candidates[1].score) ++hits;
        ScoredCandidates again = backend->score_candidates(prompt, {"right", "wrong"}, nullptr);
        if (i % 500 == 0) CHECK(again.candidates[0].score == s.candidates[0].score);
    }
    double accuracy = static_cast<double>(hits) / static_cast<double>(n);
    CHECK(accuracy > 0.47);
    CHECK(accuracy < 0.53);
}

TEST_CASE("remote scoring parses echoed logprobs into candidate sums") {
    auto transport = std::make_unique<ReplayTransport>(
        test::fixture_dir() / "replay_score.json");
    FakeClock clock;
    auto backend = make_backend(remote_config(), nullptr, std::move(transport), &clock);

    ScoredCandidates scored =
        backend->score_candidates(kPrompt, {"Lisbon", "London"}, nullptr);
    REQUIRE(scored.candidates.size() == 2);
    CHECK(scored.candidates[0].score == doctest::Approx(-0.95));
    CHECK(scored.candidates[1].score == doctest::Approx(-1.7));
}

TEST_CASE("length normalization divides by candidate token count") {
    BackendConfig cfg = remote_config();
    cfg.length_normalize = true;
    auto transport = std::make_unique<ReplayTransport>(
        test::fixture_dir() / "replay_score.json");
    FakeClock clock;
    auto backend = make_backend(cfg, nullptr, std::move(transport), &clock);
    ScoredCandidates scored =
        backend->score_candidates(kPrompt, {"Lisbon", "London"}, nullptr);
    CHECK(scored.candidates[0].score == doctest::Approx(-0.475)); // two tokens
    CHECK(scored.candidates[1].score == doctest::Approx(-1.7));   // one token
}

TEST_CASE("transient 5xx and 429 responses are retried to success") {
    auto transport = std::make_unique<ReplayTransport>(
        test::fixture_dir() / "replay_retry.json");
    ReplayTransport* raw = transport.get();
    FakeClock clock;
    auto backend = make_backend(remote_config(), nullptr, std::move(transport), &clock);

    ScoredCandidates scored =
        backend->score_candidates(kPrompt, {"Lisbon", "London"}, nullptr);
    CHECK(scored.candidates[0].score == doctest::Approx(-0.95));
    CHECK(scored.candidates[1].score == doctest::Approx(-1.7));
    CHECK(raw->exchanges_served() == 4); // two retries consumed
    CHECK(clock.t_ > 0.0);               // backoff waited on the clock
}

TEST_CASE("retry exhaustion surfaces a backend error") {
    auto transport = std::make_unique<ReplayTransport>(
        test::fixture_dir() / "replay_unavailable.json");
    FakeClock clock;
    auto backend = make_backend(remote_config(), nullptr, std::move(transport), &clock);
    CHECK_THROWS_AS(backend->score_candidates(kPrompt, {"a", "b"}, nullptr), BackendError);
}

TEST_CASE("greedy generation returns the top-k continuations in score order") {
    auto transport = std::make_unique<ReplayTransport>(
        test::fixture_dir() / "replay_greedy.json");
    FakeClock clock;
    auto backend = make_backend(remote_config(), nullptr, std::move(transport), &clock);
    ScoredCandidates out = backend->generate_greedy(kPrompt, 5);
    REQUIRE(out.greedy_top5.size() == 5);
    CHECK(out.greedy_top5[0].text == " Lisbon");
    CHECK(out.greedy_top5[0].score == doctest::Approx(-0.4));
    for (size_t i = 1; i < out.greedy_top5.size(); ++i)
        CHECK(out.greedy_top5[i - 1].score >= out.greedy_top5[i].score);
}

TEST_CASE("fine-tune upload, job creation, and polling follow the protocol") {
    auto tmp = std::filesystem::temp_directory_path() / "cft_backend_test";
    std::filesystem::create_directories(tmp);
    write_file(tmp / "train.jsonl", "{\"prompt\":\"p\",\"completion\":\"c\"}\n");

    auto transport = std::make_unique<ReplayTransport>(
        test::fixture_dir() / "replay_finetune.json");
    FakeClock clock;
    auto backend = make_backend(remote_config(), nullptr, std::move(transport), &clock);

    FinetuneHandle handle = backend->submit_finetune({tmp / "train.jsonl"}, json::object());
    REQUIRE(handle.job_ids.size() == 1);
    CHECK(handle.job_ids[0] == "ft-001");
    CHECK(handle.file_ids == std::vector<std::string>{"file-abc123"});

    FinetuneStatus s1 = backend->poll_finetune(handle);
    CHECK(s1.state == "running");
    FinetuneStatus s2 = backend->poll_finetune(handle);
    CHECK(s2.state == "succeeded");
    CHECK(s2.fine_tuned_model == "curie:ft-2022-01");
    std::filesystem::remove_all(tmp);
}

TEST_CASE("mock backends succeed fine-tunes immediately") {
    Domain d = test::make_synthetic_domain(6, 1);
    BackendConfig cfg;
    cfg.kind = BackendKind::Oracle;
    auto backend = make_backend(cfg, &d);
    FinetuneHandle handle = backend->submit_finetune({"phase_1.jsonl"}, json::object());
    CHECK(backend->poll_finetune(handle).state == "succeeded");
}

TEST_CASE("replay transport rejects requests that do not match the recording") {
    json fixture{{"schema_version", 1},
                 {"exchanges", json::array({json{
                     {"request", json{{"method", "POST"}, {"path", "/v1/completions"}}},
                     {"response", json{{"status", 200}, {"body", json::object()}}}}})}};
    ReplayTransport transport(fixture);
    HttpRequest wrong;
    wrong.method = "GET";
    wrong.path = "/v1/completions";
    CHECK_THROWS_AS(transport.send(wrong), BackendError);
}

TEST_CASE("missing auth environment variable fails fast") {
    BackendConfig cfg = remote_config();
    cfg.auth_env = "CFT_TEST_KEY_UNSET";
    unsetenv("CFT_TEST_KEY_UNSET");
    CHECK_THROWS_AS(
        make_backend(cfg, nullptr,
                     std::make_unique<ReplayTransport>(test::fixture_dir() / "replay_score.json"),
                     nullptr),
        BackendError);
}

TEST_CASE("the rate limiter never exceeds its budget in any sliding second") {
    FakeClock clock;
    RateLimiter limiter(5.0, clock);
    std::vector<double> starts;
    for (int i = 0; i < 23; ++i) {
        limiter.acquire();
        starts.push_back(clock.now());
        // occasional bursts faster than the limit
        if (i % 3 == 0) clock.sleep_for(0.01);
    }
    for (size_t i = 0; i < starts.size(); ++i) {
        size_t in_window = 0;
        for (size_t j = 0; j <= i; ++j)
            if (starts[j] > starts[i] - 1.0) ++in_window;
        CHECK(in_window <= 5);
    }
    CHECK(starts.back() >= 23.0 / 5.0 - 1.0); // had to spread out
}

TEST_CASE("recording transport writes a replayable log") {
    auto tmp = std::filesystem::temp_directory_path() / "cft_record_test";
    std::filesystem::create_directories(tmp);
    json fixture{{"schema_version", 1},
                 {"exchanges", json::array({json{
                     {"request", json{{"method", "POST"}, {"path", "/v1/completions"}}},
                     {"response", json{{"status", 200}, {"body", json{{"ok", true}}}}}}})}};
    RecordingTransport recorder(std::make_unique<ReplayTransport>(fixture),
                                tmp / "recorded.json");
    HttpRequest req;
    req.method = "POST";
    req.path = "/v1/completions";
    req.body = "{}";
    HttpResponse resp = recorder.send(req);
    CHECK(resp.status == 200);

    // the recording can drive a fresh replay transport
    ReplayTransport replay(tmp / "recorded.json");
    HttpResponse again = replay.send(req);
    CHECK(again.status == 200);
    CHECK(again.body.find("ok") != std::string::npos);
    std::filesystem::remove_all(tmp);
}

TEST_CASE("backend config json validates remote requirements") {
    json doc{{"schema_version", 1}, {"kind", "remote"}};
    CHECK_THROWS_AS(BackendConfig::from_json(doc), ConfigError);
    doc["endpoint"] = "http://localhost:9999";
    BackendConfig cfg = BackendConfig::from_json(doc);
    CHECK(cfg.kind == BackendKind::Remote);
    CHECK(cfg.rate_limit_per_sec == 10.0);
    BackendConfig back = BackendConfig::from_json(cfg.to_json());
    CHECK(back.endpoint == cfg.endpoint);
}
