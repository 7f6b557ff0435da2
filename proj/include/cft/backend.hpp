#pragma once
// Uniform interface to completion-scoring and fine-tuning LM backends.
//
// Three kinds: a remote HTTP backend speaking the mainstream completions
// protocol (candidate scoring via echoed logprobs), a deterministic oracle
// mock that answers by attribute lookup, and a seeded random mock. The
// remote transport is injectable, so protocol handling is testable from
// recorded fixtures without network access.

#include "cft/domain.hpp"
#include "cft/phrasing.hpp"

#include <chrono>
#include <deque>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cft {

// --- clock / rate limiting -------------------------------------------------

class Clock {
public:
    virtual ~Clock() = default;
    virtual double now() const = 0; // seconds, monotonic
    virtual void sleep_for(double seconds) = 0;
};

class SystemClock final : public Clock {
public:
    double now() const override;
    void sleep_for(double seconds) override;
};

// Keeps request starts at or below max_per_second in any sliding one-second
// window.
class RateLimiter {
public:
    RateLimiter(double max_per_second, Clock& clock);
    void acquire();

private:
    double max_per_second_;
    Clock& clock_;
    std::deque<double> recent_;
};

// --- transport ---------------------------------------------------------------

struct HttpRequest {
    std::string method; // "GET" | "POST"
    std::string path;
    std::map<std::string, std::string> headers;
    std::string body;
    std::string content_type = "application/json";
};

struct HttpResponse {
    int status = 0; // 0 = transport-level failure
    std::string body;
    std::string error; // transport failure detail
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse send(const HttpRequest& request) = 0;
};

// cpp-httplib client against a base URL.
class HttpTransport final : public Transport {
public:
    explicit HttpTransport(std::string base_url);
    ~HttpTransport() override;
    HttpResponse send(const HttpRequest& request) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Serves responses from a recorded fixture, verifying each request against
// the recorded method, path, and expected body/header fragments. Strictly
// ordered; a mismatch or exhausted fixture is a BackendError.
class ReplayTransport final : public Transport {
public:
    explicit ReplayTransport(const std::filesystem::path& fixture);
    explicit ReplayTransport(json fixture);
    HttpResponse send(const HttpRequest& request) override;

    size_t exchanges_served() const { return next_; }
    bool exhausted() const;

private:
    json exchanges_;
    size_t next_ = 0;
};

// Wraps another transport and logs every exchange to a replay file.
class RecordingTransport final : public Transport {
public:
    RecordingTransport(std::unique_ptr<Transport> inner, std::filesystem::path out_path);
    HttpResponse send(const HttpRequest& request) override;

private:
    std::unique_ptr<Transport> inner_;
    std::filesystem::path out_path_;
    json exchanges_ = json::array();
};

// --- backend -----------------------------------------------------------------

enum class BackendKind { Remote, Oracle, Random };
std::string to_string(BackendKind k);
BackendKind backend_kind_from_string(const std::string& s);

struct RetryPolicy {
    int max_attempts = 3;
    std::vector<double> backoff_seconds = {0.5, 1.0, 2.0};
};

struct BackendConfig {
    BackendKind kind = BackendKind::Oracle;
    std::string endpoint;              // remote
    std::string model_id = "unknown";  // remote
    std::string auth_env = "CFT_API_KEY";
    double rate_limit_per_sec = 10.0;
    RetryPolicy retry;
    bool length_normalize = false; // per-token mean instead of summed logprob
    uint64_t seed = 0;             // random mock
    std::string domain_path;       // oracle mock (when not passed in memory)

    json to_json() const;
    static BackendConfig from_json(const json& doc);
};

struct CandidateScore {
    std::string text;
    double score = 0.0;
};

struct ScoredCandidates {
    std::string prompt;
    std::vector<CandidateScore> candidates;
    std::vector<CandidateScore> greedy_top5;
};

// What the oracle needs to recompute the answer independently: the phrasing
// id carries attribute/order/polarity, the pair key names the two items.
struct CaseMeta {
    TaskKind task_kind = TaskKind::FactualComparison;
    std::string phrasing_id;
    std::string pair_key;
};

struct FinetuneHandle {
    std::vector<std::string> job_ids;
    std::vector<std::string> file_ids;
    // Files not yet submitted; polling advances the chain as jobs finish.
    std::vector<std::string> pending_files;
};

struct FinetuneStatus {
    std::string state; // pending | running | succeeded | failed
    std::string fine_tuned_model;
    std::string detail;
    bool terminal() const { return state == "succeeded" || state == "failed"; }
};

class Backend {
public:
    virtual ~Backend() = default;

    // Scores each candidate as a continuation of the prompt. meta may be
    // null for backends that do not need it (remote, random); the oracle
    // requires it.
    virtual ScoredCandidates score_candidates(const std::string& prompt,
                                              const std::vector<std::string>& candidates,
                                              const CaseMeta* meta) = 0;

    virtual ScoredCandidates generate_greedy(const std::string& prompt, int top_k) = 0;

    virtual FinetuneHandle submit_finetune(const std::vector<std::filesystem::path>& files,
                                           const json& hyperparams) = 0;
    virtual FinetuneStatus poll_finetune(FinetuneHandle& handle) = 0;

    virtual std::string kind_name() const = 0;
};

// Factory. The oracle needs a domain: either supplied here or loaded from
// config.domain_path. transport/clock overrides are for tests; null selects
// the real implementations.
std::unique_ptr<Backend> make_backend(const BackendConfig& config,
                                      const Domain* domain = nullptr,
                                      std::unique_ptr<Transport> transport = nullptr,
                                      Clock* clock = nullptr);

} // namespace cft
