#include "rankpipe/reranker.hpp"

#include <numeric>

#include <nlohmann/json.hpp>

#include "rankpipe/digest.hpp"
#include "rankpipe/errors.hpp"

namespace rankpipe {

namespace {

// Skeleton of the ranking prompt body. Kept as named pieces so the version
// tag below covers every byte the model sees apart from query and passages.
constexpr std::string_view kIntroA = "I will provide you with ";
constexpr std::string_view kIntroB =
    " passages, each indicated by a numerical identifier in square brackets. "
    "Rank the passages based on their relevance to the search query: ";
constexpr std::string_view kSearchQueryLabel = "Search Query: ";
constexpr std::string_view kTailA = "Rank the ";
constexpr std::string_view kTailB =
    " passages above based on their relevance to the search query. The "
    "passages should be listed in descending order using identifiers. The "
    "most relevant passages should be listed first. The answer format should "
    "be [a] > [b] > ..., e.g., [2] > [1].";

/// Collapses newline runs to single spaces so a passage occupies exactly one
/// labeled line.
std::string single_line(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_break = false;
    for (char c : text) {
        if (c == '\n' || c == '\r') {
            in_break = true;
            continue;
        }
        if (in_break) {
            out += ' ';
            in_break = false;
        }
        out += c;
    }
    return out;
}

} // namespace

namespace reranker_prompt {

std::string version() {
    static const std::string tag = [] {
        std::string all;
        for (std::string_view piece :
             {kSystem, kIntroA, kIntroB, kSearchQueryLabel, kTailA, kTailB,
              kRelevanceStandard, kCot, kFormatRequirement, kFormatReminder}) {
            all += piece;
            all += '\x1f';
        }
        return sha256_hex(all).substr(0, 12);
    }();
    return tag;
}

} // namespace reranker_prompt

std::vector<ChatMessage> build_reranker_prompt(const std::string& query_text,
                                               const std::vector<std::string>& window_texts,
                                               const FeatureSet& features) {
    if (window_texts.empty()) {
        throw InvalidInputError("cannot build a ranking prompt for an empty window");
    }
    const std::string k = std::to_string(window_texts.size());

    std::string body;
    body += kIntroA;
    body += k;
    body += kIntroB;
    body += query_text;
    body += "\n\n";
    for (std::size_t i = 0; i < window_texts.size(); ++i) {
        body += '[';
        body += std::to_string(i + 1);
        body += "] ";
        body += single_line(window_texts[i]);
        body += '\n';
    }
    body += '\n';
    body += kSearchQueryLabel;
    body += query_text;
    body += "\n\n";
    if (features.relevance_standard) {
        body += reranker_prompt::kRelevanceStandard;
        body += "\n\n";
    }
    if (features.cot) {
        body += reranker_prompt::kCot;
        body += "\n\n";
    }
    if (features.format_requirement) {
        body += reranker_prompt::kFormatRequirement;
        body += "\n\n";
    }
    body += kTailA;
    body += k;
    body += kTailB;

    return {
        {Speaker::system, std::string(reranker_prompt::kSystem)},
        {Speaker::user, std::move(body)},
    };
}

void apply_window_permutation(RankState& state, const Window& window, const RankList& ranked) {
    const int len = window.length();
    if (window.start < 1 || window.end > static_cast<int>(state.ordering.size()) ||
        window.start > window.end) {
        throw InternalError("window (" + std::to_string(window.start) + "," +
                            std::to_string(window.end) + ") is outside an ordering of size " +
                            std::to_string(state.ordering.size()));
    }
    if (static_cast<int>(ranked.local_ids.size()) != len) {
        throw InternalError("ranked list has " + std::to_string(ranked.local_ids.size()) +
                            " ids for a window of length " + std::to_string(len));
    }
    std::vector<bool> seen(static_cast<std::size_t>(len) + 1, false);
    for (int id : ranked.local_ids) {
        if (id < 1 || id > len || seen[static_cast<std::size_t>(id)]) {
            throw InternalError("ranked list is not a permutation of 1.." + std::to_string(len));
        }
        seen[static_cast<std::size_t>(id)] = true;
    }

    std::vector<std::string> slice(state.ordering.begin() + (window.start - 1),
                                   state.ordering.begin() + window.end);
    for (int i = 0; i < len; ++i) {
        state.ordering[static_cast<std::size_t>(window.start - 1 + i)] =
            slice[static_cast<std::size_t>(ranked.local_ids[static_cast<std::size_t>(i)] - 1)];
    }
}

JsonlTraceSink::JsonlTraceSink(const std::filesystem::path& file) : out_(file, std::ios::trunc) {
    if (!out_) {
        throw DataError("cannot open trace file " + file.string());
    }
}

void JsonlTraceSink::on_window(const WindowTraceRecord& record) {
    nlohmann::json object{
        {"query_id", record.query_id},
        {"window", {{"start", record.window.start}, {"end", record.window.end}}},
        {"raw_reply", record.raw_reply},
        {"parsed", record.parsed},
        {"repaired", record.repaired},
        {"reasked", record.reasked},
        {"failed_open", record.failed_open},
    };
    std::string line = object.dump();
    std::lock_guard lock(mutex_);
    out_ << line << '\n';
    out_.flush();
}

RankState rerank_pass(RankState state,
                      const std::string& query_text,
                      const PipelineConfig& config,
                      ChatBackend& backend,
                      TraceSink* trace) {
    if (state.ordering.empty()) {
        return state;
    }
    for (const auto& doc_id : state.ordering) {
        if (state.texts.find(doc_id) == state.texts.end()) {
            throw InternalError("rank state has no text for doc '" + doc_id + "'");
        }
    }

    CompletionParams params;
    params.temperature = config.temperature;
    params.model_name = config.model_name;

    const WindowPlan plan =
        plan_windows(static_cast<int>(state.ordering.size()), config.window_w, config.step_s);
    for (const Window& window : plan.windows) {
        std::vector<std::string> window_texts;
        window_texts.reserve(static_cast<std::size_t>(window.length()));
        for (int pos = window.start; pos <= window.end; ++pos) {
            window_texts.push_back(state.texts.at(state.ordering[static_cast<std::size_t>(pos - 1)]));
        }
        const auto messages =
            build_reranker_prompt(query_text, window_texts, config.reranker_prompt_features);

        WindowTraceRecord record;
        record.query_id = state.query_id;
        record.window = window;

        auto try_parse = [&](const std::string& reply, RankList& repaired) {
            try {
                RankList parsed = parse_rank_list(reply, window.length());
                record.parsed = parsed.local_ids;
                repaired = repair_rank_list(parsed, window.length());
                return true;
            } catch (const UnparseableReplyError&) {
                return false;
            }
        };

        Exchange exchange = backend.complete(messages, params);
        record.raw_reply = exchange.reply_text;
        RankList repaired;
        bool parsed_ok = try_parse(exchange.reply_text, repaired);
        if (!parsed_ok) {
            record.reasked = true;
            auto retry_messages = messages;
            retry_messages.push_back({Speaker::assistant, exchange.reply_text});
            retry_messages.push_back({Speaker::user, std::string(reranker_prompt::kFormatReminder)});
            Exchange retry = backend.complete(retry_messages, params);
            record.raw_reply = retry.reply_text;
            parsed_ok = try_parse(retry.reply_text, repaired);
        }
        if (!parsed_ok) {
            record.failed_open = true;
            repaired.local_ids.resize(static_cast<std::size_t>(window.length()));
            std::iota(repaired.local_ids.begin(), repaired.local_ids.end(), 1);
        }
        record.repaired = repaired.local_ids;

        apply_window_permutation(state, window, repaired);
        if (trace != nullptr) {
            trace->on_window(record);
        }
    }
    return state;
}

} // namespace rankpipe
