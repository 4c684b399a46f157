#include "rankpipe/oracle_backend.hpp"

#include <algorithm>
#include <sstream>

#include "rankpipe/errors.hpp"
#include "rankpipe/reranker.hpp"

namespace rankpipe {

namespace {

struct LabeledPassage {
    int id;
    std::string text;
};

/// Pulls "[i] text" lines back out of a rendered ranking prompt. Passage
/// texts are single-line by construction, so a line-oriented scan suffices.
std::vector<LabeledPassage> extract_labeled_passages(const std::string& body) {
    std::vector<LabeledPassage> out;
    std::istringstream in(body);
    std::string line;
    while (std::getline(in, line)) {
        if (line.size() < 4 || line[0] != '[') continue;
        std::size_t pos = 1;
        while (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos]))) ++pos;
        if (pos == 1 || pos + 1 >= line.size() || line[pos] != ']' || line[pos + 1] != ' ') {
            continue;
        }
        out.push_back({std::stoi(line.substr(1, pos - 1)), line.substr(pos + 2)});
    }
    return out;
}

const std::string* last_user_text(const std::vector<ChatMessage>& messages) {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == Speaker::user) return &it->text;
    }
    return nullptr;
}

} // namespace

OracleBackend::OracleBackend(std::unordered_map<std::string, int> grades_by_text)
    : grades_(std::move(grades_by_text)) {}

Exchange OracleBackend::complete(const std::vector<ChatMessage>& messages,
                                 const CompletionParams&) {
    if (messages.empty()) {
        throw InvalidInputError("oracle backend given an empty conversation");
    }
    const std::string* user_text = last_user_text(messages);
    if (user_text == nullptr) {
        throw InvalidInputError("oracle backend given a conversation with no user message");
    }

    std::string reply;
    if (messages.front().role == Speaker::system &&
        messages.front().text == reranker_prompt::kSystem) {
        auto passages = extract_labeled_passages(*user_text);
        if (passages.empty()) {
            throw InvalidInputError("oracle backend found no labeled passages in ranking prompt");
        }
        std::stable_sort(passages.begin(), passages.end(),
                         [&](const LabeledPassage& a, const LabeledPassage& b) {
                             auto grade = [&](const LabeledPassage& p) {
                                 auto it = grades_.find(p.text);
                                 return it == grades_.end() ? 0 : it->second;
                             };
                             return grade(a) > grade(b);
                         });
        for (std::size_t i = 0; i < passages.size(); ++i) {
            if (i > 0) reply += " > ";
            reply += "[" + std::to_string(passages[i].id) + "]";
        }
    } else if (auto marker = user_text->find("\n\nPassage: "); marker != std::string::npos) {
        reply = user_text->substr(marker + std::string("\n\nPassage: ").size());
    } else {
        reply = *user_text;
    }

    Exchange exchange;
    exchange.request_messages = messages;
    exchange.reply_text = reply;
    exchange.input_tokens = estimate_tokens(messages);
    exchange.output_tokens = estimate_tokens(reply);
    exchange.backend_name = name();
    return exchange;
}

} // namespace rankpipe
