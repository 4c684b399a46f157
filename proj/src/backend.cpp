#include "rankpipe/backend.hpp"

#include <nlohmann/json.hpp>

#include "rankpipe/digest.hpp"
#include "rankpipe/errors.hpp"

namespace rankpipe {

long estimate_tokens(std::string_view text) {
    return static_cast<long>((text.size() + 3) / 4);
}

long estimate_tokens(const std::vector<ChatMessage>& messages) {
    long total = 0;
    for (const auto& message : messages) {
        total += estimate_tokens(message.text);
    }
    return total;
}

std::string messages_digest(const std::vector<ChatMessage>& messages) {
    nlohmann::json array = nlohmann::json::array();
    for (const auto& message : messages) {
        array.push_back({{"role", to_string(message.role)}, {"content", message.text}});
    }
    return sha256_hex(array.dump());
}

namespace {

nlohmann::json exchange_to_json(const Exchange& exchange, const std::string& query_id) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& message : exchange.request_messages) {
        messages.push_back({{"role", to_string(message.role)}, {"content", message.text}});
    }
    return {
        {"query_id", query_id},
        {"request_messages", std::move(messages)},
        {"reply_text", exchange.reply_text},
        {"input_tokens", exchange.input_tokens},
        {"output_tokens", exchange.output_tokens},
        {"latency_ms", exchange.latency_ms},
        {"backend_name", exchange.backend_name},
        {"retries", exchange.retries},
    };
}

} // namespace

CallLog::CallLog(const std::filesystem::path& file) : out_(file, std::ios::app) {
    if (!out_) {
        throw DataError("cannot open call log " + file.string());
    }
}

void CallLog::append(const Exchange& exchange, const std::string& query_id) {
    std::string line = exchange_to_json(exchange, query_id).dump();
    std::lock_guard lock(mutex_);
    out_ << line << '\n';
    out_.flush();
}

std::vector<CallLog::Entry> CallLog::read(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw DataError("cannot read call log " + file.string());
    }
    std::vector<Entry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("call log " + file.string() + " line " +
                            std::to_string(line_no) + ": " + e.what());
        }
        Entry entry;
        entry.query_id = record.value("query_id", "");
        for (const auto& message : record.value("request_messages", nlohmann::json::array())) {
            entry.exchange.request_messages.push_back(
                {speaker_from_string(message.at("role").get<std::string>()),
                 message.at("content").get<std::string>()});
        }
        entry.exchange.reply_text = record.value("reply_text", "");
        entry.exchange.input_tokens = record.value("input_tokens", 0L);
        entry.exchange.output_tokens = record.value("output_tokens", 0L);
        entry.exchange.latency_ms = record.value("latency_ms", 0L);
        entry.exchange.backend_name = record.value("backend_name", "");
        entry.exchange.retries = record.value("retries", 0);
        entries.push_back(std::move(entry));
    }
    return entries;
}

} // namespace rankpipe
