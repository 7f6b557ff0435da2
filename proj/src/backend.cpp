#include "cft/backend.hpp"
#include "cft/error.hpp"
#include "cft/rng.hpp"

#include "httplib.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

namespace cft {

// --- clock / rate limiting -------------------------------------------------

double SystemClock::now() const {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void SystemClock::sleep_for(double seconds) {
    if (seconds > 0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

RateLimiter::RateLimiter(double max_per_second, Clock& clock)
    : max_per_second_(max_per_second), clock_(clock) {
    if (!(max_per_second > 0)) throw ConfigError("rate limit must be positive");
}

void RateLimiter::acquire() {
    const size_t max_in_window = static_cast<size_t>(max_per_second_);
    for (;;) {
        double now = clock_.now();
        while (!recent_.empty() && recent_.front() <= now - 1.0) recent_.pop_front();
        if (recent_.size() < std::max<size_t>(max_in_window, 1)) {
            recent_.push_back(now);
            return;
        }
        // Wait until the oldest start leaves the window.
        double wait = recent_.front() + 1.0 - now;
        clock_.sleep_for(wait > 0 ? wait : 1e-4);
    }
}

// --- transports --------------------------------------------------------------

struct HttpTransport::Impl {
    explicit Impl(const std::string& base_url) : client(base_url) {
        client.set_connection_timeout(10);
        client.set_read_timeout(120);
    }
    httplib::Client client;
};

HttpTransport::HttpTransport(std::string base_url)
    : impl_(std::make_unique<Impl>(base_url)) {}

HttpTransport::~HttpTransport() = default;

HttpResponse HttpTransport::send(const HttpRequest& request) {
    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);

    httplib::Result result = [&]() {
        if (request.method == "GET") return impl_->client.Get(request.path, headers);
        if (request.method == "POST")
            return impl_->client.Post(request.path, headers, request.body,
                                      request.content_type);
        throw ConfigError("unsupported HTTP method '" + request.method + "'");
    }();

    HttpResponse response;
    if (!result) {
        response.status = 0;
        response.error = httplib::to_string(result.error());
        return response;
    }
    response.status = result->status;
    response.body = result->body;
    return response;
}

ReplayTransport::ReplayTransport(const std::filesystem::path& fixture)
    : ReplayTransport(read_json_file(fixture)) {}

ReplayTransport::ReplayTransport(json fixture) {
    require_schema(fixture, 1, "replay fixture");
    exchanges_ = fixture.at("exchanges");
    if (!exchanges_.is_array()) throw ConfigError("replay fixture: exchanges must be an array");
}

bool ReplayTransport::exhausted() const { return next_ >= exchanges_.size(); }

HttpResponse ReplayTransport::send(const HttpRequest& request) {
    if (exhausted())
        throw BackendError("replay fixture exhausted; unexpected " + request.method + " " +
                           request.path);
    const json& exchange = exchanges_.at(next_++);
    const json& expect = exchange.at("request");

    auto mismatch = [&](const std::string& what) {
        throw BackendError("replay mismatch at exchange " + std::to_string(next_ - 1) + ": " +
                           what + " (got " + request.method + " " + request.path + ")");
    };
    if (expect.at("method").get<std::string>() != request.method) mismatch("method");
    if (expect.at("path").get<std::string>() != request.path) mismatch("path");
    if (expect.contains("body_contains")) {
        for (const json& frag : expect.at("body_contains")) {
            if (request.body.find(frag.get<std::string>()) == std::string::npos)
                mismatch("body missing fragment " + frag.dump());
        }
    }
    if (expect.contains("headers_contain")) {
        for (auto& [name, frag] : expect.at("headers_contain").items()) {
            auto it = request.headers.find(name);
            if (it == request.headers.end() ||
                it->second.find(frag.get<std::string>()) == std::string::npos)
                mismatch("header '" + name + "' missing fragment " + frag.dump());
        }
    }

    const json& resp = exchange.at("response");
    HttpResponse response;
    response.status = resp.at("status").get<int>();
    if (resp.contains("body")) {
        response.body = resp.at("body").is_string() ? resp.at("body").get<std::string>()
                                                    : resp.at("body").dump();
    }
    if (resp.contains("error")) response.error = resp.at("error").get<std::string>();
    return response;
}

RecordingTransport::RecordingTransport(std::unique_ptr<Transport> inner,
                                       std::filesystem::path out_path)
    : inner_(std::move(inner)), out_path_(std::move(out_path)) {}

HttpResponse RecordingTransport::send(const HttpRequest& request) {
    HttpResponse response = inner_->send(request);
    json entry{
        {"request",
         json{{"method", request.method}, {"path", request.path}, {"body", request.body}}},
        {"response", json{{"status", response.status}, {"body", response.body}}},
    };
    if (!response.error.empty()) entry["response"]["error"] = response.error;
    exchanges_.push_back(std::move(entry));
    write_json_file(out_path_, json{{"schema_version", 1}, {"exchanges", exchanges_}});
    return response;
}

// --- config ------------------------------------------------------------------

std::string to_string(BackendKind k) {
    switch (k) {
        case BackendKind::Remote: return "remote";
        case BackendKind::Oracle: return "oracle";
        case BackendKind::Random: return "random";
    }
    return "oracle";
}

BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "remote") return BackendKind::Remote;
    if (s == "oracle") return BackendKind::Oracle;
    if (s == "random") return BackendKind::Random;
    throw ConfigError("invalid backend kind '" + s + "'");
}

json BackendConfig::to_json() const {
    json j{
        {"schema_version", 1},
        {"kind", to_string(kind)},
        {"rate_limit_per_sec", rate_limit_per_sec},
        {"length_normalize", length_normalize},
        {"retry",
         json{{"max_attempts", retry.max_attempts}, {"backoff_seconds", retry.backoff_seconds}}},
    };
    if (kind == BackendKind::Remote) {
        j["endpoint"] = endpoint;
        j["model_id"] = model_id;
        j["auth_env"] = auth_env;
    }
    if (kind == BackendKind::Random) j["seed"] = seed;
    if (kind == BackendKind::Oracle && !domain_path.empty()) j["domain"] = domain_path;
    return j;
}

BackendConfig BackendConfig::from_json(const json& doc) {
    require_schema(doc, 1, "backend config");
    BackendConfig c;
    c.kind = backend_kind_from_string(doc.at("kind").get<std::string>());
    c.endpoint = doc.value("endpoint", std::string{});
    c.model_id = doc.value("model_id", std::string{"unknown"});
    c.auth_env = doc.value("auth_env", std::string{"CFT_API_KEY"});
    c.rate_limit_per_sec = doc.value("rate_limit_per_sec", 10.0);
    c.length_normalize = doc.value("length_normalize", false);
    c.seed = doc.value("seed", uint64_t{0});
    c.domain_path = doc.value("domain", std::string{});
    if (doc.contains("retry")) {
        const json& r = doc.at("retry");
        c.retry.max_attempts = r.value("max_attempts", 3);
        if (r.contains("backoff_seconds"))
            c.retry.backoff_seconds = r.at("backoff_seconds").get<std::vector<double>>();
    }
    if (c.kind == BackendKind::Remote && c.endpoint.empty())
        throw ConfigError("remote backend requires an endpoint");
    return c;
}

// --- mock backends -----------------------------------------------------------

namespace {

ItemPair pair_from_key(const Domain& domain, const std::string& pair_key) {
    size_t bar = pair_key.find('|');
    if (bar == std::string::npos)
        throw ConfigError("malformed pair key '" + pair_key + "'");
    return ItemPair{domain.item(pair_key.substr(0, bar)), domain.item(pair_key.substr(bar + 1))};
}

std::vector<CandidateScore> filler_top5(const std::string& head, double head_score) {
    std::vector<CandidateScore> top5{{head, head_score}};
    const char* fillers[] = {"the", "a", "is", "and"};
    double s = head_score - 1.0;
    for (const char* f : fillers) top5.push_back({f, s--});
    return top5;
}

class OracleBackend final : public Backend {
public:
    explicit OracleBackend(Domain domain) : domain_(std::move(domain)) {}

    ScoredCandidates score_candidates(const std::string& prompt,
                                      const std::vector<std::string>& candidates,
                                      const CaseMeta* meta) override {
        if (candidates.size() < 2)
            throw ConfigError("score_candidates requires at least two candidates");
        if (!meta)
            throw ConfigError("oracle backend requires case metadata to resolve the answer");
        const std::string answer = resolve_answer(*meta);
        ScoredCandidates out;
        out.prompt = prompt;
        for (const std::string& c : candidates)
            out.candidates.push_back({c, c == answer ? 0.0 : -1.0});
        out.greedy_top5 = filler_top5(answer, 0.0);
        return out;
    }

    ScoredCandidates generate_greedy(const std::string& prompt, int top_k) override {
        // mocks have no generative path; a fixed placeholder list
        ScoredCandidates out;
        out.prompt = prompt;
        out.greedy_top5 = filler_top5("n/a", -1.0);
        out.greedy_top5.resize(static_cast<size_t>(std::max(top_k, 1)));
        return out;
    }

    FinetuneHandle submit_finetune(const std::vector<std::filesystem::path>& files,
                                   const json&) override {
        FinetuneHandle handle;
        for (size_t i = 0; i < files.size(); ++i)
            handle.job_ids.push_back("oracle-job-" + std::to_string(i));
        return handle;
    }

    FinetuneStatus poll_finetune(FinetuneHandle&) override {
        return FinetuneStatus{"succeeded", "oracle", ""};
    }

    std::string kind_name() const override { return "oracle"; }

private:
    std::string resolve_answer(const CaseMeta& meta) const {
        ParsedPhrasing parsed = parse_phrasing_id(meta.phrasing_id);
        ItemPair pair = pair_from_key(domain_, meta.pair_key);
        if (parsed.task_kind == TaskKind::FactualComparison)
            return resolve_comparison(pair, domain_, parsed.attribute, parsed.order)
                .display_name;
        if (parsed.task_kind == TaskKind::DecisionTemplate)
            return resolve_recommendation(pair, domain_, parsed.preference()).display_name;
        throw ConfigError("oracle cannot resolve task kind for phrasing '" + meta.phrasing_id +
                          "'");
    }

    Domain domain_;
};

class RandomBackend final : public Backend {
public:
    explicit RandomBackend(uint64_t seed) : seed_(seed) {}

    ScoredCandidates score_candidates(const std::string& prompt,
                                      const std::vector<std::string>& candidates,
                                      const CaseMeta*) override {
        if (candidates.size() < 2)
            throw ConfigError("score_candidates requires at least two candidates");
        ScoredCandidates out;
        out.prompt = prompt;
        for (const std::string& c : candidates) {
            Rng rng = derive_rng(seed_, {hash_bytes("random-score"), hash_bytes(prompt),
                                         hash_bytes(c)});
            out.candidates.push_back({c, rng.unit()});
        }
        out.greedy_top5 = filler_top5(out.candidates.front().text, 0.0);
        return out;
    }

    ScoredCandidates generate_greedy(const std::string& prompt, int top_k) override {
        ScoredCandidates out;
        out.prompt = prompt;
        out.greedy_top5 = filler_top5("n/a", -1.0);
        out.greedy_top5.resize(static_cast<size_t>(std::max(top_k, 1)));
        return out;
    }

    FinetuneHandle submit_finetune(const std::vector<std::filesystem::path>& files,
                                   const json&) override {
        FinetuneHandle handle;
        for (size_t i = 0; i < files.size(); ++i)
            handle.job_ids.push_back("random-job-" + std::to_string(i));
        return handle;
    }

    FinetuneStatus poll_finetune(FinetuneHandle&) override {
        return FinetuneStatus{"succeeded", "random", ""};
    }

    std::string kind_name() const override { return "random"; }

private:
    uint64_t seed_;
};

// --- remote backend ---------------------------------------------------------

class RemoteBackend final : public Backend {
public:
    RemoteBackend(BackendConfig config, std::unique_ptr<Transport> transport, Clock* clock)
        : config_(std::move(config)),
          transport_(std::move(transport)),
          owned_clock_(clock ? nullptr : std::make_unique<SystemClock>()),
          clock_(clock ? *clock : *owned_clock_),
          limiter_(config_.rate_limit_per_sec, clock_) {
        const char* key = std::getenv(config_.auth_env.c_str());
        if (!key || !*key)
            throw BackendError("auth environment variable '" + config_.auth_env +
                               "' is not set");
        auth_header_ = std::string("Bearer ") + key;
        if (!transport_) transport_ = std::make_unique<HttpTransport>(config_.endpoint);
    }

    ScoredCandidates score_candidates(const std::string& prompt,
                                      const std::vector<std::string>& candidates,
                                      const CaseMeta*) override {
        if (candidates.size() < 2)
            throw ConfigError("score_candidates requires at least two candidates");
        ScoredCandidates out;
        out.prompt = prompt;
        for (const std::string& candidate : candidates) {
            // Echoed zero-length completion: the response carries logprobs
            // for the whole prompt+candidate text; the candidate's tokens
            // are the ones starting at or past the prompt boundary.
            json body{
                {"model", config_.model_id},
                {"prompt", prompt + " " + candidate},
                {"max_tokens", 0},
                {"temperature", 0},
                {"logprobs", 0},
                {"echo", true},
            };
            json reply = post_json("/v1/completions", body);
            out.candidates.push_back(
                {candidate, candidate_logprob(reply, prompt.size(), candidate)});
        }
        return out;
    }

    ScoredCandidates generate_greedy(const std::string& prompt, int top_k) override {
        json body{
            {"model", config_.model_id},
            {"prompt", prompt},
            {"max_tokens", 8},
            {"temperature", 0},
            {"logprobs", top_k},
        };
        json reply = post_json("/v1/completions", body);
        ScoredCandidates out;
        out.prompt = prompt;
        try {
            const json& logprobs = reply.at("choices").at(0).at("logprobs");
            const json& top = logprobs.at("top_logprobs").at(0);
            for (auto& [token, lp] : top.items())
                out.greedy_top5.push_back({token, lp.get<double>()});
            std::sort(out.greedy_top5.begin(), out.greedy_top5.end(),
                      [](const CandidateScore& a, const CandidateScore& b) {
                          return a.score > b.score;
                      });
            if (out.greedy_top5.size() > static_cast<size_t>(top_k))
                out.greedy_top5.resize(static_cast<size_t>(top_k));
        } catch (const json::exception& e) {
            throw BackendError(std::string("malformed completion response: ") + e.what());
        }
        return out;
    }

    FinetuneHandle submit_finetune(const std::vector<std::filesystem::path>& files,
                                   const json& hyperparams) override {
        if (files.empty()) throw ConfigError("submit_finetune requires at least one file");
        FinetuneHandle handle;
        for (const auto& file : files) handle.file_ids.push_back(upload_file(file));
        // First job starts from the configured base model; later files are
        // chained by poll_finetune as their predecessors succeed.
        handle.job_ids.push_back(create_job(handle.file_ids.front(), config_.model_id,
                                            hyperparams));
        for (size_t i = 1; i < handle.file_ids.size(); ++i)
            handle.pending_files.push_back(handle.file_ids[i]);
        hyperparams_ = hyperparams;
        return handle;
    }

    FinetuneStatus poll_finetune(FinetuneHandle& handle) override {
        if (handle.job_ids.empty()) throw ConfigError("poll_finetune on an empty handle");
        json reply = get_json("/v1/fine_tunes/" + handle.job_ids.back());
        FinetuneStatus status;
        status.state = reply.value("status", std::string{"pending"});
        status.fine_tuned_model = reply.value("fine_tuned_model", std::string{});
        if (status.state == "succeeded" && !handle.pending_files.empty()) {
            std::string next_file = handle.pending_files.front();
            handle.pending_files.erase(handle.pending_files.begin());
            handle.job_ids.push_back(
                create_job(next_file, status.fine_tuned_model, hyperparams_));
            status.state = "running";
            status.detail = "continuing with next phase file";
        }
        return status;
    }

    std::string kind_name() const override { return "remote"; }

private:
    json post_json(const std::string& path, const json& body) {
        HttpRequest request;
        request.method = "POST";
        request.path = path;
        request.headers["Authorization"] = auth_header_;
        request.body = body.dump();
        return roundtrip(request);
    }

    json get_json(const std::string& path) {
        HttpRequest request;
        request.method = "GET";
        request.path = path;
        request.headers["Authorization"] = auth_header_;
        return roundtrip(request);
    }

    json roundtrip(const HttpRequest& request) {
        // One exchange at a time: the transport and limiter are not
        // concurrency-safe, and the rate limit serializes calls anyway.
        std::lock_guard<std::mutex> lock(mutex_);
        std::string last_error;
        for (int attempt = 0; attempt < std::max(config_.retry.max_attempts, 1); ++attempt) {
            if (attempt > 0) {
                size_t idx = static_cast<size_t>(attempt - 1);
                double backoff = idx < config_.retry.backoff_seconds.size()
                                     ? config_.retry.backoff_seconds[idx]
                                     : config_.retry.backoff_seconds.empty()
                                           ? 1.0
                                           : config_.retry.backoff_seconds.back();
                clock_.sleep_for(backoff);
            }
            limiter_.acquire();
            HttpResponse response = transport_->send(request);
            if (response.status == 0) {
                last_error = "transport failure: " + response.error;
                continue;
            }
            if (response.status == 429 || response.status >= 500) {
                last_error = "HTTP " + std::to_string(response.status);
                continue;
            }
            if (response.status >= 400)
                throw BackendError("HTTP " + std::to_string(response.status) + " from " +
                                   request.path + ": " + response.body);
            try {
                return json::parse(response.body);
            } catch (const json::parse_error& e) {
                throw BackendError(std::string("invalid JSON from backend: ") + e.what());
            }
        }
        throw BackendError("retries exhausted for " + request.method + " " + request.path +
                           ": " + last_error);
    }

    double candidate_logprob(const json& reply, size_t prompt_len,
                             const std::string& candidate) const {
        try {
            const json& logprobs = reply.at("choices").at(0).at("logprobs");
            const json& token_logprobs = logprobs.at("token_logprobs");
            const json& offsets = logprobs.at("text_offset");
            double sum = 0.0;
            size_t n = 0;
            for (size_t i = 0; i < token_logprobs.size() && i < offsets.size(); ++i) {
                if (offsets.at(i).get<size_t>() < prompt_len) continue;
                if (token_logprobs.at(i).is_null())
                    throw BackendError("candidate '" + candidate +
                                       "' has no logprob for its first token");
                sum += token_logprobs.at(i).get<double>();
                ++n;
            }
            if (n == 0)
                throw BackendError("candidate '" + candidate +
                                   "' produced no scored tokens (not tokenizable?)");
            return config_.length_normalize ? sum / static_cast<double>(n) : sum;
        } catch (const json::exception& e) {
            throw BackendError(std::string("malformed logprob response: ") + e.what());
        }
    }

    std::string upload_file(const std::filesystem::path& path) {
        const std::string boundary = "cft-boundary-7MA4YWxkTrZu0gW";
        std::string content = read_file(path);
        std::string body;
        body += "--" + boundary + "\r\n";
        body += "Content-Disposition: form-data; name=\"purpose\"\r\n\r\nfine-tune\r\n";
        body += "--" + boundary + "\r\n";
        body += "Content-Disposition: form-data; name=\"file\"; filename=\"" +
                path.filename().string() + "\"\r\n";
        body += "Content-Type: application/jsonl\r\n\r\n";
        body += content + "\r\n";
        body += "--" + boundary + "--\r\n";

        HttpRequest request;
        request.method = "POST";
        request.path = "/v1/files";
        request.headers["Authorization"] = auth_header_;
        request.body = std::move(body);
        request.content_type = "multipart/form-data; boundary=" + boundary;
        json reply = roundtrip(request);
        try {
            return reply.at("id").get<std::string>();
        } catch (const json::exception&) {
            throw BackendError("file upload response missing id");
        }
    }

    std::string create_job(const std::string& file_id, const std::string& model,
                           const json& hyperparams) {
        json body{{"training_file", file_id}, {"model", model}};
        if (hyperparams.is_object())
            for (auto& [k, v] : hyperparams.items()) body[k] = v;
        json reply = post_json("/v1/fine_tunes", body);
        try {
            return reply.at("id").get<std::string>();
        } catch (const json::exception&) {
            throw BackendError("fine-tune creation response missing id");
        }
    }

    BackendConfig config_;
    std::mutex mutex_;
    std::unique_ptr<Transport> transport_;
    std::unique_ptr<Clock> owned_clock_;
    Clock& clock_;
    RateLimiter limiter_;
    std::string auth_header_;
    json hyperparams_;
};

} // namespace

std::unique_ptr<Backend> make_backend(const BackendConfig& config, const Domain* domain,
                                      std::unique_ptr<Transport> transport, Clock* clock) {
    switch (config.kind) {
        case BackendKind::Oracle: {
            if (domain) return std::make_unique<OracleBackend>(*domain);
            if (config.domain_path.empty())
                throw ConfigError("oracle backend requires a domain (in memory or via path)");
            return std::make_unique<OracleBackend>(
                Domain::from_json(read_json_file(config.domain_path)));
        }
        case BackendKind::Random:
            return std::make_unique<RandomBackend>(config.seed);
        case BackendKind::Remote:
            return std::make_unique<RemoteBackend>(config, std::move(transport), clock);
    }
    throw ConfigError("unreachable backend kind");
}

} // namespace cft
