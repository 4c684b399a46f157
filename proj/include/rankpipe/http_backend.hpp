#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <string>

#include "rankpipe/backend.hpp"
#include "rankpipe/semaphore.hpp"

namespace rankpipe {

/// Raw transport result for one POST. `transport_ok` is false when the
/// request never produced an HTTP response (connect failure, timeout).
struct HttpResult {
    bool transport_ok = false;
    int status = 0;
    std::string body;
    std::string error;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResult post_json(const std::string& body) = 0;
};

struct HttpBackendConfig {
    std::string base_url;                       // e.g. "https://api.openai.com"
    std::string path = "/v1/chat/completions";
    std::string api_key;
    int max_attempts = 5;
    std::chrono::milliseconds backoff_base{500};
    std::chrono::milliseconds backoff_cap{30000};
    int max_in_flight = 8;
    std::chrono::seconds timeout{120};
    std::string backend_name = "http";
};

/// Serialized JSON chat-completion request body. The temperature field is
/// present on every request, including temperature 0.
std::string serialize_chat_request(const std::vector<ChatMessage>& messages,
                                   const CompletionParams& params);

/// Live chat-completion client over an injectable transport. Retries
/// transport failures and rate-limit responses with capped exponential
/// backoff plus jitter, up to max_attempts; any other failure surfaces
/// immediately. In-flight requests never exceed max_in_flight: admission
/// waits on a semaphore held for the duration of the transport call only.
class HttpBackend : public ChatBackend {
public:
    /// With no explicit transport, connects to config.base_url directly.
    explicit HttpBackend(HttpBackendConfig config,
                         std::unique_ptr<HttpTransport> transport = nullptr);
    ~HttpBackend() override;

    Exchange complete(const std::vector<ChatMessage>& messages,
                      const CompletionParams& params) override;

    std::string name() const override { return config_.backend_name; }

    /// Total retries performed since construction, across all calls.
    long total_retries() const { return total_retries_.load(); }

private:
    HttpBackendConfig config_;
    std::unique_ptr<HttpTransport> transport_;
    Semaphore in_flight_;
    std::atomic<long> total_retries_{0};
};

} // namespace rankpipe
