#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "rankpipe/http_backend.hpp"

#include <chrono>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "rankpipe/errors.hpp"

namespace rankpipe {

namespace {

class ClientTransport : public HttpTransport {
public:
    explicit ClientTransport(const HttpBackendConfig& config)
        : client_(config.base_url), path_(config.path), api_key_(config.api_key) {
        client_.set_connection_timeout(config.timeout);
        client_.set_read_timeout(config.timeout);
        client_.set_write_timeout(config.timeout);
    }

    HttpResult post_json(const std::string& body) override {
        httplib::Headers headers;
        if (!api_key_.empty()) {
            headers.emplace("Authorization", "Bearer " + api_key_);
        }
        auto response = client_.Post(path_, headers, body, "application/json");
        HttpResult result;
        if (!response) {
            result.error = httplib::to_string(response.error());
            return result;
        }
        result.transport_ok = true;
        result.status = response->status;
        result.body = response->body;
        return result;
    }

private:
    httplib::Client client_;
    std::string path_;
    std::string api_key_;
};

std::chrono::milliseconds jittered(std::chrono::milliseconds delay) {
    thread_local std::mt19937_64 rng(std::random_device{}());
    const auto half = delay.count() / 2;
    std::uniform_int_distribution<long long> dist(half, delay.count());
    return std::chrono::milliseconds(dist(rng));
}

bool looks_like_context_overflow(const std::string& body) {
    return body.find("context_length_exceeded") != std::string::npos ||
           body.find("maximum context length") != std::string::npos;
}

std::size_t request_chars(const std::vector<ChatMessage>& messages) {
    std::size_t total = 0;
    for (const auto& message : messages) total += message.text.size();
    return total;
}

} // namespace

std::string serialize_chat_request(const std::vector<ChatMessage>& messages,
                                   const CompletionParams& params) {
    nlohmann::json body;
    body["model"] = params.model_name;
    body["temperature"] = params.temperature;
    if (params.max_output_tokens) {
        body["max_tokens"] = *params.max_output_tokens;
    }
    nlohmann::json array = nlohmann::json::array();
    for (const auto& message : messages) {
        array.push_back({{"role", to_string(message.role)}, {"content", message.text}});
    }
    body["messages"] = std::move(array);
    return body.dump();
}

HttpBackend::HttpBackend(HttpBackendConfig config, std::unique_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      in_flight_(config_.max_in_flight) {
    if (config_.max_attempts < 1) {
        throw ConfigError("retry budget must be at least 1 attempt, got " +
                          std::to_string(config_.max_attempts));
    }
    if (config_.max_in_flight < 1) {
        throw ConfigError("in-flight limit must be positive, got " +
                          std::to_string(config_.max_in_flight));
    }
    if (!transport_) {
        if (config_.base_url.empty()) {
            throw ConfigError("live backend needs a base URL");
        }
        transport_ = std::make_unique<ClientTransport>(config_);
    }
}

HttpBackend::~HttpBackend() = default;

Exchange HttpBackend::complete(const std::vector<ChatMessage>& messages,
                               const CompletionParams& params) {
    if (messages.empty()) {
        throw InvalidInputError("cannot send an empty conversation");
    }
    const std::string body = serialize_chat_request(messages, params);
    const auto started = std::chrono::steady_clock::now();

    HttpResult result;
    int retries_here = 0;
    std::chrono::milliseconds delay = config_.backoff_base;
    for (int attempt = 1;; ++attempt) {
        {
            SemaphoreGuard admission(in_flight_);
            result = transport_->post_json(body);
        }
        const bool retryable = !result.transport_ok || result.status == 429;
        if (!retryable || attempt == config_.max_attempts) break;
        ++retries_here;
        total_retries_.fetch_add(1);
        std::this_thread::sleep_for(jittered(delay));
        delay = std::min(delay * 2, config_.backoff_cap);
    }

    if (!result.transport_ok) {
        throw BackendUnavailableError("transport failure after " +
                                      std::to_string(retries_here + 1) + " attempts: " +
                                      result.error);
    }
    if (result.status == 429) {
        throw BackendUnavailableError("rate limited after " + std::to_string(retries_here + 1) +
                                      " attempts");
    }
    if (result.status != 200) {
        if (looks_like_context_overflow(result.body)) {
            throw ContextOverflowError("provider rejected the request as too long (HTTP " +
                                           std::to_string(result.status) + ")",
                                       request_chars(messages));
        }
        throw BackendUnavailableError("HTTP " + std::to_string(result.status) + ": " +
                                      result.body.substr(0, 300));
    }

    nlohmann::json payload;
    try {
        payload = nlohmann::json::parse(result.body);
    } catch (const nlohmann::json::exception& e) {
        throw BackendUnavailableError(std::string("unparseable provider response: ") + e.what());
    }

    std::string reply;
    try {
        reply = payload.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw EmptyReplyError("provider response carries no message content");
    }
    if (reply.empty()) {
        throw EmptyReplyError("provider returned an empty message");
    }

    Exchange exchange;
    exchange.request_messages = messages;
    exchange.reply_text = reply;
    exchange.backend_name = config_.backend_name;
    exchange.retries = retries_here;
    exchange.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - started)
                              .count();
    if (payload.contains("usage") && payload["usage"].is_object()) {
        const auto& usage = payload["usage"];
        exchange.input_tokens = usage.value("prompt_tokens", estimate_tokens(messages));
        exchange.output_tokens = usage.value("completion_tokens", estimate_tokens(reply));
    } else {
        exchange.input_tokens = estimate_tokens(messages);
        exchange.output_tokens = estimate_tokens(reply);
    }
    return exchange;
}

} // namespace rankpipe
