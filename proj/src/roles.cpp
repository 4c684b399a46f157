#include "rankpipe/roles.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <thread>

#include "rankpipe/digest.hpp"
#include "rankpipe/errors.hpp"
#include "rankpipe/semaphore.hpp"

namespace rankpipe {

std::string role_input_digest(Role role,
                              const std::string& template_version,
                              const std::string& input_text) {
    return sha256_hex(to_string(role) + "\n" + template_version + "\n" + input_text);
}

std::string trim_copy(const std::string& s) {
    const char* whitespace = " \t\r\n";
    const auto begin = s.find_first_not_of(whitespace);
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(whitespace);
    return s.substr(begin, end - begin + 1);
}

std::string strip_wrapping_quotes(const std::string& s) {
    if (s.size() >= 2) {
        const char first = s.front();
        const char last = s.back();
        if ((first == '"' && last == '"') || (first == '\'' && last == '\'')) {
            return s.substr(1, s.size() - 2);
        }
    }
    return s;
}

std::string strip_leading_rewrite_label(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos || colon > 32) return s;
    std::string label = trim_copy(s.substr(0, colon));
    std::transform(label.begin(), label.end(), label.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const char* known :
         {"rewritten query", "rewritten", "rewrite", "revised query", "new query", "query"}) {
        if (label == known) {
            auto rest = s.substr(colon + 1);
            const auto start = rest.find_first_not_of(" \t");
            return start == std::string::npos ? std::string{} : rest.substr(start);
        }
    }
    return s;
}

namespace {

std::string call_role(Role role,
                      const std::string& context,
                      const std::map<std::string, std::string>& bindings,
                      ChatBackend& backend,
                      const PromptTemplate& tpl,
                      const CompletionParams& params) {
    const auto messages = render_prompt(tpl, bindings);
    const Exchange exchange = backend.complete(messages, params);
    const std::string reply = trim_copy(exchange.reply_text);
    if (reply.empty()) {
        throw RoleFailureError(to_string(role), context, "backend returned an empty reply");
    }
    return reply;
}

} // namespace

std::string rewrite_query(const Query& query,
                          ChatBackend& backend,
                          const PromptTemplate& tpl,
                          const CompletionParams& params) {
    if (trim_copy(query.text).empty()) {
        throw InvalidInputError("query '" + query.query_id + "' has blank text");
    }
    std::string reply = call_role(Role::rewriter, "query '" + query.query_id + "'",
                                  {{"query", query.text}}, backend, tpl, params);
    reply = trim_copy(strip_leading_rewrite_label(reply));
    reply = trim_copy(strip_wrapping_quotes(reply));
    if (reply.empty()) {
        throw RoleFailureError(to_string(Role::rewriter), "query '" + query.query_id + "'",
                               "reply was empty after post-processing");
    }
    return reply;
}

std::string generate_answer(const std::string& rewritten,
                            ChatBackend& backend,
                            const PromptTemplate& tpl,
                            const CompletionParams& params) {
    if (trim_copy(rewritten).empty()) {
        throw InvalidInputError("cannot generate an answer for a blank query");
    }
    return call_role(Role::answerer, "query text \"" + rewritten.substr(0, 48) + "\"",
                     {{"query", rewritten}}, backend, tpl, params);
}

SummarizedPassage summarize_passage(const Passage& passage,
                                    ChatBackend& backend,
                                    const PromptTemplate& tpl,
                                    const CompletionParams& params) {
    if (trim_copy(passage.text).empty()) {
        throw InvalidInputError("passage '" + passage.doc_id + "' has blank text");
    }
    const std::string summary = call_role(Role::summarizer, "passage '" + passage.doc_id + "'",
                                          {{"passage", passage.text}}, backend, tpl, params);
    SummarizedPassage out;
    out.doc_id = passage.doc_id;
    out.summary = summary;
    out.source_length_chars = passage.text.size();
    out.summary_length_chars = summary.size();
    return out;
}

std::vector<SummarizedPassage> summarize_passages(const std::vector<Passage>& passages,
                                                  ChatBackend& backend,
                                                  const PromptTemplate& tpl,
                                                  int max_in_flight,
                                                  const CompletionParams& params) {
    if (max_in_flight < 1) {
        throw ConfigError("summarizer fan-out must be positive, got " +
                          std::to_string(max_in_flight));
    }
    std::vector<SummarizedPassage> results(passages.size());
    if (passages.empty()) return results;

    Semaphore admission(max_in_flight);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= passages.size()) return;
            {
                std::scoped_lock check(error_mutex);
                if (first_error) return;
            }
            try {
                SemaphoreGuard guard(admission);
                results[i] = summarize_passage(passages[i], backend, tpl, params);
            } catch (...) {
                std::scoped_lock capture(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const std::size_t thread_count =
        std::min(passages.size(), static_cast<std::size_t>(max_in_flight));
    std::vector<std::thread> workers;
    workers.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) {
        workers.emplace_back(worker);
    }
    for (auto& thread : workers) {
        thread.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
    return results;
}

} // namespace rankpipe
