#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "rankpipe/backend.hpp"
#include "rankpipe/rank_parse.hpp"
#include "rankpipe/types.hpp"
#include "rankpipe/window.hpp"

namespace rankpipe {

/// A query's current candidate ordering plus the text shown to the reranker
/// for each doc (summary when the summarizer ran, original text otherwise).
/// The ordering stays a permutation of the initial candidates at all times.
struct RankState {
    std::string query_id;
    std::vector<std::string> ordering;
    std::map<std::string, std::string> texts;
};

namespace reranker_prompt {

inline constexpr std::string_view kSystem =
    "You are an intelligent assistant that ranks passages based on their "
    "relevance to a search query.";

// Optional instruction blocks, appended in this order between the passage
// list and the closing format request.
inline constexpr std::string_view kRelevanceStandard =
    "Judge each passage against the following four-level relevance standard. "
    "Perfectly relevant: the passage is dedicated to the query and contains "
    "the exact answer. Highly Relevant: the passage answers the query but may "
    "carry extra or redundant content. Relevant: the passage covers some "
    "aspects of the query without answering it. Irrelevant: the passage has "
    "nothing to do with the query.";

inline constexpr std::string_view kCot =
    "Rank the passages thoughtfully and systematically: examine each passage "
    "step by step against the search query and reason about its relevance "
    "before you settle on the final order. You may state your reasoning "
    "before the final ranking line.";

inline constexpr std::string_view kFormatRequirement =
    "Strictly follow the ranking format. Make sure no passages are omitted "
    "or repeated in the ranking results.";

/// The terse reminder appended as a follow-up user turn when a reply could
/// not be parsed.
inline constexpr std::string_view kFormatReminder =
    "Your previous reply could not be parsed. Reply with the ranking only, "
    "in the format [a] > [b] > [c], including every identifier exactly once.";

/// Version tag covering the base prompt and all blocks; recorded in run
/// headers next to the generation-role template versions.
std::string version();

} // namespace reranker_prompt

/// Builds the listwise ranking prompt for one window. Passages are labeled
/// [1]..[k] in their current order (newlines inside a passage are collapsed
/// to spaces so each passage stays on its label's line), enabled feature
/// blocks are inserted in fixed order, and the prompt always ends with an
/// explicit request for the "[a] > [b] > ..." answer format.
/// Throws InvalidInputError on an empty window.
std::vector<ChatMessage> build_reranker_prompt(const std::string& query_text,
                                               const std::vector<std::string>& window_texts,
                                               const FeatureSet& features);

/// Reorders positions window.start..window.end of the state by the ranked
/// window-local ids; positions outside the window are untouched. Throws
/// InternalError unless ranked is a permutation of 1..window.length().
void apply_window_permutation(RankState& state, const Window& window, const RankList& ranked);

struct WindowTraceRecord {
    std::string query_id;
    Window window;
    std::string raw_reply;
    std::vector<int> parsed;
    std::vector<int> repaired;
    bool reasked = false;
    bool failed_open = false;
};

class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void on_window(const WindowTraceRecord& record) = 0;
};

/// Writes one JSON object per window to a trace file. Thread-safe.
class JsonlTraceSink : public TraceSink {
public:
    explicit JsonlTraceSink(const std::filesystem::path& file);
    void on_window(const WindowTraceRecord& record) override;

private:
    std::mutex mutex_;
    std::ofstream out_;
};

/// Runs one back-to-first sliding-window pass over the state: for each
/// planned window, build prompt -> complete -> parse -> repair -> apply.
/// An unparseable reply triggers exactly one re-ask with a format reminder;
/// if that also fails to parse, the window keeps its current order and the
/// event is traced. Backend errors propagate. Deterministic for
/// deterministic backends.
RankState rerank_pass(RankState state,
                      const std::string& query_text,
                      const PipelineConfig& config,
                      ChatBackend& backend,
                      TraceSink* trace = nullptr);

} // namespace rankpipe
