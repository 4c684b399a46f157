#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rankpipe/backend.hpp"

namespace rankpipe {

/// Graded relevance judgments. Pairs absent from the map are grade 0.
struct Qrels {
    // query_id -> doc_id -> grade
    std::map<std::string, std::map<std::string, int>> judgments;

    int grade(const std::string& query_id, const std::string& doc_id) const;
    bool has_query(const std::string& query_id) const;

    /// Whitespace-delimited "query_id 0 doc_id grade" lines.
    static Qrels load(const std::filesystem::path& file);
};

struct RunEntry {
    std::string doc_id;
    double score = 0.0;
    int rank = 1;
};

/// Ranked retrieval output for a set of queries, in TREC run format on disk:
/// "query_id Q0 doc_id rank score tag". Lines starting with '#' are header
/// comments; the writer uses them to record the configuration that produced
/// the run.
struct RunFile {
    std::vector<std::string> query_order;
    std::map<std::string, std::vector<RunEntry>> entries;

    const std::vector<RunEntry>& for_query(const std::string& query_id) const;
    std::vector<std::string> ranking(const std::string& query_id) const;

    void add(const std::string& query_id, RunEntry entry);

    /// Validates per-query invariants: ranks 1..k without gaps, scores
    /// non-increasing, doc ids unique. Throws DataError on violation.
    static RunFile load(const std::filesystem::path& file);

    /// Deterministic writer; scores printed with six decimals.
    void save(const std::filesystem::path& file,
              const std::string& tag,
              const std::vector<std::string>& header_lines = {}) const;
};

/// nDCG@k with exponential gain (2^grade - 1) and log2(rank + 1) discount,
/// the convention of the standard TREC and BEIR evaluators. Returns 0 when
/// the query has no relevant documents. Unjudged docs count as grade 0.
double ndcg_at_k(const std::vector<std::string>& ranking,
                 const Qrels& qrels,
                 const std::string& query_id,
                 int k);

struct EvalReport {
    std::vector<int> cutoffs;
    // query_id -> cutoff -> ndcg, ordered by query_id
    std::map<std::string, std::map<int, double>> per_query;
    std::map<int, double> mean;
};

/// Mean nDCG over every query present in the qrels; queries the run misses
/// score 0. Throws EmptyIntersectionError when the run shares no query with
/// the qrels.
EvalReport evaluate_run(const RunFile& run, const Qrels& qrels, const std::vector<int>& cutoffs);

struct CompareReport {
    int cutoff = 10;
    // query_id -> (ndcg_a, ndcg_b, delta b - a)
    struct Row {
        double ndcg_a = 0.0;
        double ndcg_b = 0.0;
        double delta = 0.0;
    };
    std::map<std::string, Row> per_query;
    double mean_delta = 0.0;
};

/// Per-query nDCG deltas (b - a) over the queries shared by both runs and
/// the qrels. Throws EmptyIntersectionError when that set is empty.
CompareReport compare_runs(const RunFile& a, const RunFile& b, const Qrels& qrels, int cutoff);

/// Token, wall-time, and USD accounting over a call log. Totals are sums;
/// the per-query block divides them by the query count, matching
/// average-cost-per-query reporting. USD follows the linear pricing formula
/// tokens / 1000 * price.
struct CostReport {
    long total_input_tokens = 0;
    long total_output_tokens = 0;
    long total_wall_ms = 0;
    double total_usd = 0.0;

    double per_query_input_tokens = 0.0;
    double per_query_output_tokens = 0.0;
    double per_query_wall_ms = 0.0;
    double per_query_usd = 0.0;

    double price_per_1k_input = 0.0;
    double price_per_1k_output = 0.0;
    int query_count = 1;
};

/// Throws ConfigError on negative prices or query_count < 1.
CostReport cost_report(const std::vector<Exchange>& call_log,
                       double price_per_1k_input,
                       double price_per_1k_output,
                       int query_count);

// Report emitters: aligned plain text and JSON.
std::string format_text(const EvalReport& report);
std::string format_text(const CompareReport& report);
std::string format_text(const CostReport& report);
std::string format_json(const EvalReport& report);
std::string format_json(const CompareReport& report);
std::string format_json(const CostReport& report);

} // namespace rankpipe
