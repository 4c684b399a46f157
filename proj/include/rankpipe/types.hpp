#pragma once

#include <optional>
#include <string>

#include "rankpipe/errors.hpp"

namespace rankpipe {

enum class Role { rewriter, answerer, summarizer, reranker };

std::string to_string(Role role);
Role role_from_string(const std::string& name);

/// A query and the derived forms it accumulates while moving through the
/// pipeline: the rewritten text, the generated pseudo-answer, and their
/// repetition-composed combination.
struct Query {
    std::string query_id;
    std::string text;
    std::optional<std::string> rewritten;
    std::optional<std::string> pseudo_answer;
    std::optional<std::string> composed;
};

/// A first-stage candidate passage.
struct Passage {
    std::string doc_id;
    std::string text;
    int first_stage_rank = 1;
    double first_stage_score = 0.0;
};

/// A condensed passage produced by the summarizer role.
struct SummarizedPassage {
    std::string doc_id;
    std::string summary;
    std::size_t source_length_chars = 0;
    std::size_t summary_length_chars = 0;
};

/// Which instruction blocks the reranker prompt carries. Block order in the
/// rendered prompt is fixed: relevance standard, then chain-of-thought, then
/// format requirement.
struct FeatureSet {
    bool relevance_standard = false;
    bool cot = false;
    bool format_requirement = false;

    bool any() const { return relevance_standard || cot || format_requirement; }

    static FeatureSet all() { return {true, true, true}; }

    /// Parses a comma-separated list of "standard", "cot", "format".
    /// Empty string means no features. Unknown names throw ConfigError.
    static FeatureSet parse(const std::string& csv);

    /// Canonical comma-separated form; empty string when no features are set.
    std::string to_string() const;

    bool operator==(const FeatureSet&) const = default;
};

struct PipelineConfig {
    bool use_rewriter = false;
    bool use_answerer = false;
    bool use_summarizer = false;
    int repeat_m = 3;
    int window_w = 20;
    int step_s = 10;
    FeatureSet reranker_prompt_features;
    double temperature = 0.0;
    int top_k = 100;
    std::string model_name;

    // Per-role failure fallbacks: keep the original query / skip the answer /
    // keep the original passage text instead of aborting the whole query.
    bool fallback_rewriter = true;
    bool fallback_answerer = true;
    bool fallback_summarizer = true;

    // Answer caching is on by default but separable from the cache itself.
    bool cache_answers = true;

    /// Throws ConfigError when m, w, s, or top_k are out of range.
    void validate() const;
};

} // namespace rankpipe
