#include "rankpipe/rank_parse.hpp"

#include <cctype>
#include <limits>

#include "rankpipe/errors.hpp"

namespace rankpipe {

namespace {

struct Bracketed {
    std::size_t begin; // index of '['
    std::size_t end;   // index one past ']'
    int value;
};

/// Glue characters allowed between chain elements.
bool is_separator(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ',' || c == '>';
}

std::vector<Bracketed> find_bracketed_ints(const std::string& reply) {
    std::vector<Bracketed> out;
    std::size_t i = 0;
    while (i < reply.size()) {
        if (reply[i] != '[') {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < reply.size() && std::isdigit(static_cast<unsigned char>(reply[j]))) ++j;
        if (j > i + 1 && j < reply.size() && reply[j] == ']') {
            // Absurdly long runs of digits saturate; repair drops them as
            // out of range.
            long long value = 0;
            for (std::size_t k = i + 1; k < j; ++k) {
                value = value * 10 + (reply[k] - '0');
                if (value > std::numeric_limits<int>::max()) {
                    value = std::numeric_limits<int>::max();
                    break;
                }
            }
            out.push_back({i, j + 1, static_cast<int>(value)});
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

} // namespace

RankList parse_rank_list(const std::string& reply, int window_length) {
    if (window_length < 1) {
        throw InvalidInputError("window length must be positive, got " +
                                std::to_string(window_length));
    }
    const auto occurrences = find_bracketed_ints(reply);
    if (occurrences.empty()) {
        throw UnparseableReplyError("reply contains no bracketed identifiers");
    }

    // Walk backwards from the last occurrence while the glue between
    // neighbors stays pure separator text; that span is the last maximal
    // chain.
    std::size_t first = occurrences.size() - 1;
    while (first > 0) {
        const auto& prev = occurrences[first - 1];
        const auto& curr = occurrences[first];
        bool glue_ok = true;
        for (std::size_t k = prev.end; k < curr.begin; ++k) {
            if (!is_separator(reply[k])) {
                glue_ok = false;
                break;
            }
        }
        if (!glue_ok) break;
        --first;
    }

    RankList list;
    for (std::size_t k = first; k < occurrences.size(); ++k) {
        list.local_ids.push_back(occurrences[k].value);
    }
    return list;
}

RankList repair_rank_list(const RankList& raw, int window_length) {
    if (window_length < 1) {
        throw InvalidInputError("window length must be positive, got " +
                                std::to_string(window_length));
    }
    std::vector<bool> seen(static_cast<std::size_t>(window_length) + 1, false);
    RankList out;
    out.local_ids.reserve(static_cast<std::size_t>(window_length));
    for (int id : raw.local_ids) {
        if (id >= 1 && id <= window_length && !seen[static_cast<std::size_t>(id)]) {
            seen[static_cast<std::size_t>(id)] = true;
            out.local_ids.push_back(id);
        }
    }
    for (int id = 1; id <= window_length; ++id) {
        if (!seen[static_cast<std::size_t>(id)]) {
            out.local_ids.push_back(id);
        }
    }
    return out;
}

} // namespace rankpipe
