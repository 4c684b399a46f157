#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "rankpipe/backend.hpp"

namespace rankpipe {

/// Offline test backend holding planted relevance grades keyed by passage
/// text. Ranking prompts are answered by parsing the labeled passages out of
/// the rendered prompt and replying with "[a] > [b] > ..." sorted by grade,
/// descending, ties in original window order, so prompt rendering itself is
/// exercised end to end. Texts without a planted grade count as grade 0.
///
/// Any other prompt is answered by echoing the input embedded in it (the last
/// user message; for summarizer prompts, the text after the "Passage: "
/// marker), which turns the generation roles into identity transforms for
/// whole-pipeline tests. Stateless after construction.
class OracleBackend : public ChatBackend {
public:
    explicit OracleBackend(std::unordered_map<std::string, int> grades_by_text);

    Exchange complete(const std::vector<ChatMessage>& messages,
                      const CompletionParams& params) override;

    std::string name() const override { return "oracle"; }

private:
    std::unordered_map<std::string, int> grades_;
};

} // namespace rankpipe
