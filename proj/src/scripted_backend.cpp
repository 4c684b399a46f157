#include "rankpipe/scripted_backend.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rankpipe/errors.hpp"

namespace rankpipe {

ScriptedBackend::ScriptedBackend(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) {
        throw ConfigError("script directory does not exist: " + dir_.string());
    }
}

Exchange ScriptedBackend::complete(const std::vector<ChatMessage>& messages,
                                   const CompletionParams&) {
    const std::string digest = messages_digest(messages);
    const std::filesystem::path file = dir_ / (digest + ".json");
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw BackendUnavailableError("no scripted reply for request digest " + digest +
                                      " in " + dir_.string());
    }
    nlohmann::json record;
    try {
        in >> record;
    } catch (const nlohmann::json::exception& e) {
        throw BackendUnavailableError("scripted reply " + file.string() +
                                      " is not valid JSON: " + e.what());
    }
    if (!record.contains("reply") || !record["reply"].is_string()) {
        throw BackendUnavailableError("scripted reply " + file.string() +
                                      " lacks a string \"reply\" field");
    }

    Exchange exchange;
    exchange.request_messages = messages;
    exchange.reply_text = record["reply"].get<std::string>();
    exchange.input_tokens = record.value("input_tokens", estimate_tokens(messages));
    exchange.output_tokens = record.value("output_tokens", estimate_tokens(exchange.reply_text));
    exchange.latency_ms = record.value("latency_ms", 0L);
    exchange.backend_name = name();
    return exchange;
}

void ScriptedBackend::record(const std::filesystem::path& dir,
                             const std::vector<ChatMessage>& request,
                             const std::string& reply,
                             long input_tokens,
                             long output_tokens,
                             long latency_ms) {
    std::filesystem::create_directories(dir);
    nlohmann::json record{{"reply", reply}, {"latency_ms", latency_ms}};
    if (input_tokens >= 0) record["input_tokens"] = input_tokens;
    if (output_tokens >= 0) record["output_tokens"] = output_tokens;

    const std::filesystem::path file = dir / (messages_digest(request) + ".json");
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw DataError("cannot write scripted reply " + file.string());
    }
    out << record.dump(2) << '\n';
}

} // namespace rankpipe
