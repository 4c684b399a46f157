#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rankpipe/chat.hpp"

namespace rankpipe {

struct CompletionParams {
    double temperature = 0.0;
    std::optional<int> max_output_tokens;
    std::string model_name;
};

/// One completed backend call: what was sent, what came back, and what it
/// cost. Token counts are provider-reported when available, estimated
/// otherwise.
struct Exchange {
    std::vector<ChatMessage> request_messages;
    std::string reply_text;
    long input_tokens = 0;
    long output_tokens = 0;
    long latency_ms = 0;
    std::string backend_name;
    int retries = 0;
};

/// Uniform chat-completion interface. Implementations must be callable from
/// multiple threads concurrently.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    /// Sends the conversation and returns the reply with usage accounting.
    /// Throws BackendUnavailableError, EmptyReplyError, or
    /// ContextOverflowError; never fabricates a reply.
    virtual Exchange complete(const std::vector<ChatMessage>& messages,
                              const CompletionParams& params) = 0;

    virtual std::string name() const = 0;
};

/// Deterministic monotone token estimate at 1 token per 4 characters,
/// rounded up. Used only when the provider reports no usage.
long estimate_tokens(std::string_view text);
long estimate_tokens(const std::vector<ChatMessage>& messages);

/// Canonical request digest: SHA-256 over the JSON array
/// [{"role":...,"content":...},...] in message order.
std::string messages_digest(const std::vector<ChatMessage>& messages);

/// Thread-safe JSON-lines sink for exchanges, one object per line, used for
/// cost auditing.
class CallLog {
public:
    explicit CallLog(const std::filesystem::path& file);

    void append(const Exchange& exchange, const std::string& query_id);

    struct Entry {
        Exchange exchange;
        std::string query_id;
    };

    static std::vector<Entry> read(const std::filesystem::path& file);

private:
    std::mutex mutex_;
    std::ofstream out_;
};

/// Per-query adapter that forwards to an inner backend and appends every
/// exchange to a call log under that query's id.
class LoggingBackend : public ChatBackend {
public:
    LoggingBackend(ChatBackend& inner, CallLog* log, std::string query_id)
        : inner_(inner), log_(log), query_id_(std::move(query_id)) {}

    Exchange complete(const std::vector<ChatMessage>& messages,
                      const CompletionParams& params) override {
        Exchange exchange = inner_.complete(messages, params);
        if (log_ != nullptr) {
            log_->append(exchange, query_id_);
        }
        return exchange;
    }

    std::string name() const override { return inner_.name(); }

private:
    ChatBackend& inner_;
    CallLog* log_;
    std::string query_id_;
};

} // namespace rankpipe
