#pragma once

#include <string>
#include <vector>

#include "rankpipe/backend.hpp"
#include "rankpipe/cache.hpp"
#include "rankpipe/corpus.hpp"
#include "rankpipe/eval.hpp"
#include "rankpipe/prompt.hpp"
#include "rankpipe/reranker.hpp"
#include "rankpipe/types.hpp"

namespace rankpipe {

/// Everything one reranking batch needs besides its data: the pipeline
/// configuration, the role templates, and operational knobs.
struct RerankJob {
    PipelineConfig config;
    PromptTemplate rewriter_template = default_rewriter_template();
    PromptTemplate answerer_template = default_answerer_template();
    PromptTemplate summarizer_template = default_summarizer_template();

    int jobs = 1;              // concurrent queries
    int summary_fanout = 8;    // concurrent summarizer calls within a query
    bool fail_soft = false;    // a backend failure freezes that query's current
                               // order instead of aborting the whole run
    std::string run_tag = "rankpipe";
};

/// Deterministic header lines recording the configuration and template
/// versions a run was produced with; written as '#' comments at the top of
/// the output run file.
std::vector<std::string> run_header_lines(const RerankJob& job);

/// Runs the full multi-role workflow over every query of the input run:
/// optional rewrite, optional pseudo-answer plus m-fold composition, optional
/// per-passage summarization, then one back-to-first sliding-window rerank
/// pass. Disabled roles pass their inputs through unchanged. The output run
/// preserves the input's query order and assigns rank r the score
/// (n - r + 1) / n.
///
/// With a cache, role outputs are looked up before calling the backend and
/// stored after; identical inputs are also deduplicated in-process, so one
/// run never issues the same role call twice. Cache storage failures degrade
/// to uncached operation with a warning on stderr.
///
/// Validates up front that every query of the run exists in `queries` and
/// every doc id resolves in the corpus; offenders are listed in the thrown
/// DataError.
RunFile run_rerank(const RerankJob& job,
                   const RunFile& run_in,
                   const Corpus& corpus,
                   const std::vector<Query>& queries,
                   ChatBackend& backend,
                   ResponseCache* cache = nullptr,
                   TraceSink* trace = nullptr,
                   CallLog* call_log = nullptr);

} // namespace rankpipe
