#pragma once

#include <string>
#include <vector>

#include "rankpipe/backend.hpp"
#include "rankpipe/prompt.hpp"
#include "rankpipe/types.hpp"

namespace rankpipe {

/// One role invocation's result as carried through caching and dedup: the
/// digest is stable for identical (role, template version, input text), and
/// the exchange is zeroed for cache hits.
struct RoleOutput {
    Role role = Role::rewriter;
    std::string input_digest;
    std::string output_text;
    Exchange exchange;
};

/// Digest shared by the cache and the in-run dedup map.
std::string role_input_digest(Role role,
                              const std::string& template_version,
                              const std::string& input_text);

// Reply post-processing, kept minimal on purpose: aggressive cleanup risks
// destroying content.
std::string trim_copy(const std::string& s);
std::string strip_wrapping_quotes(const std::string& s);
std::string strip_leading_rewrite_label(const std::string& s);

/// Rewrites the query via the rewriter prompt. The reply is trimmed, one
/// layer of wrapping quotes is removed, and a leading "Rewritten query:"
/// style label is dropped if the model emitted one. Throws RoleFailureError
/// on an empty reply; callers decide whether to fall back to the original
/// query.
std::string rewrite_query(const Query& query,
                          ChatBackend& backend,
                          const PromptTemplate& tpl,
                          const CompletionParams& params = {});

/// Generates the pseudo-answer passage for a (rewritten) query.
std::string generate_answer(const std::string& rewritten,
                            ChatBackend& backend,
                            const PromptTemplate& tpl,
                            const CompletionParams& params = {});

/// Condenses one passage. Summaries depend only on the passage text and
/// template version, never on any query, so they are reusable across
/// queries.
SummarizedPassage summarize_passage(const Passage& passage,
                                    ChatBackend& backend,
                                    const PromptTemplate& tpl,
                                    const CompletionParams& params = {});

/// Summarizes a batch with at most max_in_flight backend calls at any
/// instant. Results are returned in input order.
std::vector<SummarizedPassage> summarize_passages(const std::vector<Passage>& passages,
                                                  ChatBackend& backend,
                                                  const PromptTemplate& tpl,
                                                  int max_in_flight,
                                                  const CompletionParams& params = {});

} // namespace rankpipe
