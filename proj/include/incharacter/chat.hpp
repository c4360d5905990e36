#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace incharacter {

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 1024;
    // Extra cache-key material; the interview engine sets it to the run id so
    // repeated runs sample independently. Interviewer calls leave it empty.
    std::string salt;
};

class ChatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string id() const = 0;
    virtual std::string model() const { return id(); }
    /// Returns assistant text; throws ChatError once retries are exhausted.
    virtual std::string complete(const ChatRequest& request) = 0;
};

struct BackendDescriptor {
    std::string id;
    std::string kind = "http";  // http | sim_rpa | sim_interviewer
    std::string endpoint;       // e.g. https://host/v1/chat/completions
    std::string model;
    double temperature = 0.7;
    int max_tokens = 1024;
    std::string credential_env;  // env var holding the bearer token
    // sim backends:
    std::string persona_id;
    std::uint64_t seed = 0;

    void validate() const;
};

BackendDescriptor parse_backend(const nlohmann::json& doc);

struct RetryPolicy {
    int max_attempts = 3;
    int base_delay_ms = 250;  // doubled per attempt
};

class RateLimiter {
public:
    /// rps <= 0 disables limiting.
    explicit RateLimiter(double rps = 0.0);
    void acquire();

private:
    std::mutex mutex_;
    double min_interval_ms_ = 0.0;
    std::chrono::steady_clock::time_point next_slot_;
};

/// Chat-completions-style HTTP+JSON client. Credentials come from the
/// environment variable named in the descriptor, never from config files.
class HttpChatBackend : public ChatBackend {
public:
    HttpChatBackend(BackendDescriptor descriptor, RetryPolicy retry = {},
                    std::shared_ptr<RateLimiter> limiter = nullptr);
    std::string id() const override { return descriptor_.id; }
    std::string model() const override { return descriptor_.model; }
    std::string complete(const ChatRequest& request) override;

    static nlohmann::json request_body(const std::string& model, const ChatRequest& request);

private:
    BackendDescriptor descriptor_;
    RetryPolicy retry_;
    std::shared_ptr<RateLimiter> limiter_;
};

/// On-disk response cache. Key = hash(model, full message payload,
/// temperature, max length, salt); the stored file keeps the request for
/// collision checks.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);
    std::optional<std::string> lookup(const std::string& model, const ChatRequest& request) const;
    void store(const std::string& model, const ChatRequest& request,
               const std::string& response) const;
    static std::string key(const std::string& model, const ChatRequest& request);
    static nlohmann::json canonical_request(const std::string& model, const ChatRequest& request);

private:
    std::filesystem::path dir_;
};

class CachingBackend : public ChatBackend {
public:
    CachingBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<ResponseCache> cache);
    std::string id() const override { return inner_->id(); }
    std::string model() const override { return inner_->model(); }
    std::string complete(const ChatRequest& request) override;

    long hits() const { return hits_.load(); }
    long misses() const { return misses_.load(); }

private:
    std::shared_ptr<ChatBackend> inner_;
    std::shared_ptr<ResponseCache> cache_;
    std::atomic<long> hits_{0};
    std::atomic<long> misses_{0};
};

/// Test/probe wrapper that records every request it forwards.
class RecordingBackend : public ChatBackend {
public:
    explicit RecordingBackend(std::shared_ptr<ChatBackend> inner);
    std::string id() const override { return inner_->id(); }
    std::string model() const override { return inner_->model(); }
    std::string complete(const ChatRequest& request) override;

    std::vector<ChatRequest> requests() const;
    long call_count() const;

private:
    std::shared_ptr<ChatBackend> inner_;
    mutable std::mutex mutex_;
    std::vector<ChatRequest> requests_;
};

/// Runs fn(0..n-1) on up to `parallelism` threads; rethrows the first error.
void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn);

}  // namespace incharacter
