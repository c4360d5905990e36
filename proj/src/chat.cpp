#include "incharacter/chat.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "incharacter/io.hpp"

namespace incharacter {

using nlohmann::json;

void BackendDescriptor::validate() const {
    if (id.empty()) {
        throw ChatError("backend descriptor needs an id");
    }
    if (temperature < 0.0) {
        throw ChatError("backend '" + id + "': temperature must be >= 0");
    }
    if (kind == "http") {
        if (endpoint.find("http://") != 0 && endpoint.find("https://") != 0) {
            throw ChatError("backend '" + id + "': endpoint must be an http(s) URL");
        }
        if (model.empty()) {
            throw ChatError("backend '" + id + "': model is required");
        }
    } else if (kind != "sim_rpa" && kind != "sim_interviewer") {
        throw ChatError("backend '" + id + "': unknown kind '" + kind + "'");
    }
}

BackendDescriptor parse_backend(const json& doc) {
    BackendDescriptor d;
    d.id = doc.at("id").get<std::string>();
    d.kind = doc.value("kind", "http");
    d.endpoint = doc.value("endpoint", "");
    d.model = doc.value("model", "");
    d.temperature = doc.value("temperature", 0.7);
    d.max_tokens = doc.value("max_tokens", 1024);
    d.credential_env = doc.value("credential_env", "");
    d.persona_id = doc.value("persona", "");
    d.seed = doc.value("seed", 0ull);
    d.validate();
    return d;
}

RateLimiter::RateLimiter(double rps) {
    if (rps > 0.0) {
        min_interval_ms_ = 1000.0 / rps;
    }
    next_slot_ = std::chrono::steady_clock::now();
}

void RateLimiter::acquire() {
    if (min_interval_ms_ <= 0.0) {
        return;
    }
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto now = std::chrono::steady_clock::now();
        if (next_slot_ < now) {
            next_slot_ = now;
        }
        slot = next_slot_;
        next_slot_ += std::chrono::milliseconds(static_cast<long>(min_interval_ms_));
    }
    std::this_thread::sleep_until(slot);
}

HttpChatBackend::HttpChatBackend(BackendDescriptor descriptor, RetryPolicy retry,
                                 std::shared_ptr<RateLimiter> limiter)
    : descriptor_(std::move(descriptor)), retry_(retry), limiter_(std::move(limiter)) {
    descriptor_.validate();
}

json HttpChatBackend::request_body(const std::string& model, const ChatRequest& request) {
    json body;
    body["model"] = model;
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    json messages = json::array();
    for (const auto& message : request.messages) {
        messages.push_back({{"role", message.role}, {"content", message.content}});
    }
    body["messages"] = std::move(messages);
    return body;
}

namespace {

struct ParsedEndpoint {
    std::string host;  // scheme://host[:port]
    std::string path;
};

ParsedEndpoint split_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    const auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {endpoint, "/"};
    }
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

bool retryable_status(int status) {
    return status == 429 || status >= 500;
}

}  // namespace

std::string HttpChatBackend::complete(const ChatRequest& request) {
    const auto [host, path] = split_endpoint(descriptor_.endpoint);
    const json body = request_body(descriptor_.model, request);
    httplib::Headers headers;
    if (!descriptor_.credential_env.empty()) {
        const char* token = std::getenv(descriptor_.credential_env.c_str());
        if (token == nullptr || *token == '\0') {
            throw ChatError("backend '" + descriptor_.id + "': environment variable " +
                            descriptor_.credential_env + " is not set");
        }
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    std::string last_error;
    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
        if (attempt > 1) {
            const int delay = retry_.base_delay_ms << (attempt - 2);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        if (limiter_) {
            limiter_->acquire();
        }
        httplib::Client client(host);
        client.set_read_timeout(120, 0);
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
            if (retryable_status(res->status)) {
                continue;
            }
            throw ChatError("backend '" + descriptor_.id + "': " + last_error);
        }
        try {
            const json reply = json::parse(res->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const std::exception& e) {
            last_error = std::string("malformed completion body: ") + e.what();
            continue;
        }
    }
    throw ChatError("backend '" + descriptor_.id + "': retries exhausted; last error: " +
                    last_error);
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

json ResponseCache::canonical_request(const std::string& model, const ChatRequest& request) {
    json doc;
    doc["model"] = model;
    doc["temperature"] = request.temperature;
    doc["max_tokens"] = request.max_tokens;
    doc["salt"] = request.salt;
    json messages = json::array();
    for (const auto& message : request.messages) {
        messages.push_back({{"role", message.role}, {"content", message.content}});
    }
    doc["messages"] = std::move(messages);
    return doc;
}

std::string ResponseCache::key(const std::string& model, const ChatRequest& request) {
    return hex64(fnv1a64(canonical_request(model, request).dump()));
}

std::optional<std::string> ResponseCache::lookup(const std::string& model,
                                                 const ChatRequest& request) const {
    const auto path = dir_ / (key(model, request) + ".json");
    if (!std::filesystem::exists(path)) {
        return std::nullopt;
    }
    try {
        const json entry = json::parse(read_file(path));
        if (entry.at("request") != canonical_request(model, request)) {
            return std::nullopt;  // hash collision
        }
        return entry.at("response").get<std::string>();
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void ResponseCache::store(const std::string& model, const ChatRequest& request,
                          const std::string& response) const {
    json entry;
    entry["request"] = canonical_request(model, request);
    entry["response"] = response;
    write_file_atomic(dir_ / (key(model, request) + ".json"), entry.dump(2) + "\n");
}

CachingBackend::CachingBackend(std::shared_ptr<ChatBackend> inner,
                               std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::string CachingBackend::complete(const ChatRequest& request) {
    if (auto cached = cache_->lookup(model(), request)) {
        ++hits_;
        return *cached;
    }
    const std::string response = inner_->complete(request);
    cache_->store(model(), request, response);
    ++misses_;
    return response;
}

RecordingBackend::RecordingBackend(std::shared_ptr<ChatBackend> inner)
    : inner_(std::move(inner)) {}

std::string RecordingBackend::complete(const ChatRequest& request) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        requests_.push_back(request);
    }
    return inner_->complete(request);
}

std::vector<ChatRequest> RecordingBackend::requests() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return requests_;
}

long RecordingBackend::call_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return static_cast<long>(requests_.size());
}

void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn) {
    if (n == 0) {
        return;
    }
    const int workers = std::max(1, std::min<int>(parallelism, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) {
                        first_error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& thread : threads) {
        thread.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

}  // namespace incharacter
