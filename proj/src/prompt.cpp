#include "rankpipe/prompt.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "rankpipe/digest.hpp"

namespace rankpipe {

namespace {

bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

/// Single left-to-right pass; substituted text is never rescanned. Braces
/// that do not form a `{name}` placeholder pass through verbatim.
std::string substitute(const std::string& text,
                       const std::map<std::string, std::string>& bindings) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '{' && i + 1 < text.size() && is_name_start(text[i + 1])) {
            std::size_t k = i + 2;
            while (k < text.size() && is_name_char(text[k])) ++k;
            if (k < text.size() && text[k] == '}') {
                std::string name = text.substr(i + 1, k - i - 1);
                auto it = bindings.find(name);
                if (it == bindings.end()) {
                    throw RenderError(name);
                }
                out += it->second;
                i = k + 1;
                continue;
            }
        }
        out += text[i];
        ++i;
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& content) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in(content);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

} // namespace

PromptTemplate PromptTemplate::from_messages(Role role, std::vector<ChatMessage> messages) {
    if (messages.empty()) {
        throw InvalidInputError("a prompt template needs at least one message");
    }
    PromptTemplate tpl;
    tpl.role = role;
    tpl.messages = std::move(messages);
    tpl.version = sha256_hex(tpl.serialize()).substr(0, 12);
    return tpl;
}

std::string PromptTemplate::serialize() const {
    std::string out;
    for (const auto& message : messages) {
        out += '@';
        out += to_string(message.role);
        out += '\n';
        out += message.text;
        out += '\n';
    }
    return out;
}

void PromptTemplate::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw DataError("cannot write template file " + file.string());
    }
    out << serialize();
}

PromptTemplate PromptTemplate::load(Role role, const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw DataError("cannot read template file " + file.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();

    std::vector<ChatMessage> messages;
    bool open = false;
    ChatMessage current;
    std::string text;
    auto flush = [&]() {
        if (!open) return;
        current.text = text;
        messages.push_back(current);
        text.clear();
    };
    for (const auto& line : split_lines(buffer.str())) {
        if (line == "@system" || line == "@user" || line == "@assistant") {
            flush();
            current = ChatMessage{speaker_from_string(line.substr(1)), {}};
            open = true;
        } else if (open) {
            if (!text.empty()) text += '\n';
            text += line;
        } else if (!line.empty()) {
            throw DataError("template file " + file.string() +
                            " has text before the first @role marker");
        }
    }
    flush();
    if (messages.empty()) {
        throw DataError("template file " + file.string() + " defines no messages");
    }
    return from_messages(role, std::move(messages));
}

std::vector<ChatMessage> render_prompt(const PromptTemplate& tpl,
                                       const std::map<std::string, std::string>& bindings) {
    std::vector<ChatMessage> out;
    out.reserve(tpl.messages.size());
    for (const auto& message : tpl.messages) {
        out.push_back({message.role, substitute(message.text, bindings)});
    }
    return out;
}

PromptTemplate default_rewriter_template() {
    return PromptTemplate::from_messages(
        Role::rewriter,
        {
            {Speaker::system,
             "You are an AI retrieval assistant, skilled at rewriting user queries to "
             "enhance their suitability for retrieval tasks and optimizing compatibility "
             "with retrieval systems like BM25."},
            {Speaker::user,
             "Rewrite the following user query into a clear, specific, and formal request "
             "suitable for retrieving relevant information from a list of passages. Keep "
             "in mind that your rewritten query will be sent to rerank system, which does "
             "relevance search for retrieving documents."},
            {Speaker::assistant, "Kindly provide the query you would like me to rewrite."},
            {Speaker::user, "{query}"},
        });
}

PromptTemplate default_answerer_template() {
    return PromptTemplate::from_messages(
        Role::answerer,
        {
            {Speaker::system,
             "You are an AI retrieval expert, skilled at providing detailed and relevant "
             "answers to user queries."},
            {Speaker::user,
             "Compose a passage to address the following user query effectively."},
            {Speaker::assistant, "Please provide the query for which you would like an answer."},
            {Speaker::user, "{query}"},
        });
}

PromptTemplate default_summarizer_template() {
    return PromptTemplate::from_messages(
        Role::summarizer,
        {
            {Speaker::system,
             "You are an AI assistant who is good at summarizing passages the user "
             "provides you."},
            {Speaker::user,
             "I will provide you a passage. Summarize the passage to make it suit for a "
             "passage retrieval task which means the summarized passages can better "
             "reflect the information and the relevance to a giving query than the "
             "original passage.\n\nPassage: {passage}"},
        });
}

PromptTemplate default_template(Role role) {
    switch (role) {
        case Role::rewriter: return default_rewriter_template();
        case Role::answerer: return default_answerer_template();
        case Role::summarizer: return default_summarizer_template();
        case Role::reranker: break;
    }
    throw InvalidInputError("no default chat template for role '" + to_string(role) +
                            "'; the ranking prompt is built per window");
}

} // namespace rankpipe
