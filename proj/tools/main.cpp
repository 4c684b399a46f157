// Command-line front end: rerank / eval / compare / cost.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 backend error.

#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rankpipe/backend.hpp"
#include "rankpipe/cache.hpp"
#include "rankpipe/corpus.hpp"
#include "rankpipe/errors.hpp"
#include "rankpipe/eval.hpp"
#include "rankpipe/http_backend.hpp"
#include "rankpipe/oracle_backend.hpp"
#include "rankpipe/pipeline.hpp"
#include "rankpipe/scripted_backend.hpp"

namespace {

using namespace rankpipe;

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value != nullptr && *value != '\0' ? value : fallback;
}

struct RerankOptions {
    std::string run_path;
    std::string corpus_path;
    std::string queries_path;
    std::string out_path;
    std::string backend_kind = "http";
    std::string scripts_dir;
    std::string oracle_qrels_path;
    std::string roles = "none";
    std::string features = "none";
    std::string model;
    std::string cache_dir;
    std::string trace_path;
    std::string call_log_path;
    std::string endpoint;
    std::string tag = "rankpipe";
    int repeat_m = 3;
    int window = 20;
    int step = 10;
    int top_k = 100;
    int jobs = 1;
    double temperature = 0.0;
    bool fail_soft = false;
};

void apply_roles(PipelineConfig& config, const std::string& csv) {
    config.use_rewriter = false;
    config.use_answerer = false;
    config.use_summarizer = false;
    if (csv.empty() || csv == "none") return;
    std::size_t begin = 0;
    while (begin <= csv.size()) {
        const auto comma = csv.find(',', begin);
        const auto end = comma == std::string::npos ? csv.size() : comma;
        std::string name = csv.substr(begin, end - begin);
        const auto first = name.find_first_not_of(" \t");
        const auto last = name.find_last_not_of(" \t");
        name = first == std::string::npos ? "" : name.substr(first, last - first + 1);
        if (name == "rewriter") {
            config.use_rewriter = true;
        } else if (name == "answerer") {
            config.use_answerer = true;
        } else if (name == "summarizer") {
            config.use_summarizer = true;
        } else if (!name.empty()) {
            throw ConfigError("unknown role '" + name +
                              "'; expected rewriter, answerer, summarizer");
        }
        if (comma == std::string::npos) break;
        begin = comma + 1;
    }
}

std::unique_ptr<ChatBackend> make_backend(const RerankOptions& options, const Corpus& corpus) {
    if (options.backend_kind == "scripted") {
        if (options.scripts_dir.empty()) {
            throw ConfigError("--backend scripted needs --scripts DIR");
        }
        return std::make_unique<ScriptedBackend>(options.scripts_dir);
    }
    if (options.backend_kind == "oracle") {
        if (options.oracle_qrels_path.empty()) {
            throw ConfigError("--backend oracle needs --oracle-qrels FILE");
        }
        const Qrels qrels = Qrels::load(options.oracle_qrels_path);
        std::unordered_map<std::string, int> grades_by_text;
        for (const auto& [query_id, judged] : qrels.judgments) {
            for (const auto& [doc_id, grade] : judged) {
                if (!corpus.contains(doc_id)) continue;
                auto [it, inserted] = grades_by_text.try_emplace(corpus.text_for(doc_id), grade);
                if (!inserted) it->second = std::max(it->second, grade);
            }
        }
        return std::make_unique<OracleBackend>(std::move(grades_by_text));
    }
    if (options.backend_kind == "http") {
        HttpBackendConfig config;
        config.base_url = !options.endpoint.empty()
                              ? options.endpoint
                              : env_or("RANKPIPE_ENDPOINT", "https://api.openai.com");
        config.api_key = env_or("RANKPIPE_API_KEY", env_or("OPENAI_API_KEY", ""));
        if (config.api_key.empty()) {
            throw ConfigError(
                "no API key: set RANKPIPE_API_KEY (or OPENAI_API_KEY) for --backend http");
        }
        return std::make_unique<HttpBackend>(std::move(config));
    }
    throw ConfigError("unknown backend '" + options.backend_kind +
                      "'; expected scripted, oracle, http");
}

int cmd_rerank(const RerankOptions& options) {
    RerankJob job;
    job.config.repeat_m = options.repeat_m;
    job.config.window_w = options.window;
    job.config.step_s = options.step;
    job.config.top_k = options.top_k;
    job.config.temperature = options.temperature;
    job.config.model_name = options.model;
    apply_roles(job.config, options.roles);
    job.config.reranker_prompt_features =
        FeatureSet::parse(options.features == "none" ? "" : options.features);
    job.config.validate();
    job.jobs = options.jobs;
    job.fail_soft = options.fail_soft;
    job.run_tag = options.tag;

    const RunFile run_in = RunFile::load(options.run_path);
    const Corpus corpus = Corpus::load_jsonl(options.corpus_path);
    const std::vector<Query> queries = load_queries_tsv(options.queries_path);

    auto backend = make_backend(options, corpus);

    std::optional<ResponseCache> cache;
    if (!options.cache_dir.empty()) cache.emplace(options.cache_dir);
    std::optional<JsonlTraceSink> trace;
    if (!options.trace_path.empty()) trace.emplace(options.trace_path);
    std::optional<CallLog> call_log;
    if (!options.call_log_path.empty()) call_log.emplace(options.call_log_path);

    const RunFile run_out = run_rerank(job, run_in, corpus, queries, *backend,
                                       cache ? &*cache : nullptr, trace ? &*trace : nullptr,
                                       call_log ? &*call_log : nullptr);
    run_out.save(options.out_path, job.run_tag, run_header_lines(job));
    std::cout << "reranked " << run_out.query_order.size() << " queries -> " << options.out_path
              << '\n';
    return 0;
}

struct EvalOptions {
    std::string run_path;
    std::string qrels_path;
    std::vector<int> cutoffs{1, 5, 10};
    bool json = false;
};

int cmd_eval(const EvalOptions& options) {
    const RunFile run = RunFile::load(options.run_path);
    const Qrels qrels = Qrels::load(options.qrels_path);
    const EvalReport report = evaluate_run(run, qrels, options.cutoffs);
    std::cout << (options.json ? format_json(report) : format_text(report));
    return 0;
}

struct CompareOptions {
    std::string run_a_path;
    std::string run_b_path;
    std::string qrels_path;
    int cutoff = 10;
    bool json = false;
};

int cmd_compare(const CompareOptions& options) {
    const RunFile run_a = RunFile::load(options.run_a_path);
    const RunFile run_b = RunFile::load(options.run_b_path);
    const Qrels qrels = Qrels::load(options.qrels_path);
    const CompareReport report = compare_runs(run_a, run_b, qrels, options.cutoff);
    std::cout << (options.json ? format_json(report) : format_text(report));
    return 0;
}

struct CostOptions {
    std::string log_path;
    double price_in = 0.03;
    double price_out = 0.06;
    int queries = 0; // 0 means infer from the log
    bool json = false;
};

int cmd_cost(const CostOptions& options) {
    const auto entries = CallLog::read(options.log_path);
    std::vector<Exchange> exchanges;
    std::set<std::string> query_ids;
    for (const auto& entry : entries) {
        exchanges.push_back(entry.exchange);
        if (!entry.query_id.empty()) query_ids.insert(entry.query_id);
    }
    int query_count = options.queries;
    if (query_count == 0) {
        query_count = std::max<int>(1, static_cast<int>(query_ids.size()));
    }
    const CostReport report =
        cost_report(exchanges, options.price_in, options.price_out, query_count);
    std::cout << (options.json ? format_json(report) : format_text(report));
    return 0;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Multi-role LLM reranking: rewrite, answer, summarize, sliding-window rerank"};
    app.require_subcommand(1);

    RerankOptions rerank_options;
    CLI::App* rerank = app.add_subcommand("rerank", "Rerank a first-stage run");
    rerank->add_option("--run", rerank_options.run_path, "input run file (TREC format)")
        ->required();
    rerank->add_option("--corpus", rerank_options.corpus_path, "passages (JSON lines)")
        ->required();
    rerank->add_option("--queries", rerank_options.queries_path, "queries (TSV)")->required();
    rerank->add_option("--out", rerank_options.out_path, "output run file")->required();
    rerank->add_option("--backend", rerank_options.backend_kind, "scripted | oracle | http");
    rerank->add_option("--scripts", rerank_options.scripts_dir,
                       "scripted replies directory (scripted backend)");
    rerank->add_option("--oracle-qrels", rerank_options.oracle_qrels_path,
                       "qrels the oracle backend ranks by (offline demos)");
    rerank->add_option("--model", rerank_options.model, "model name sent to the provider");
    rerank->add_option("--roles", rerank_options.roles,
                       "comma list of rewriter,answerer,summarizer; default none");
    rerank->add_option("--m", rerank_options.repeat_m, "query repetition count");
    rerank->add_option("--window", rerank_options.window, "sliding window length");
    rerank->add_option("--step", rerank_options.step, "sliding window step");
    rerank->add_option("--features", rerank_options.features,
                       "comma list of standard,cot,format; default none");
    rerank->add_option("--top-k", rerank_options.top_k, "candidates reranked per query");
    rerank->add_option("--temperature", rerank_options.temperature, "sampling temperature");
    rerank->add_option("--cache-dir", rerank_options.cache_dir, "role-output cache directory");
    rerank->add_option("--trace", rerank_options.trace_path, "per-window trace file (JSON lines)");
    rerank->add_option("--call-log", rerank_options.call_log_path,
                       "backend call log (JSON lines), input to the cost command");
    rerank->add_option("--jobs", rerank_options.jobs, "concurrent queries");
    rerank->add_option("--endpoint", rerank_options.endpoint,
                       "API base URL (or RANKPIPE_ENDPOINT)");
    rerank->add_option("--tag", rerank_options.tag, "run tag written to the output file");
    rerank->add_flag("--fail-soft", rerank_options.fail_soft,
                     "keep a query's input order on backend failure instead of aborting");

    EvalOptions eval_options;
    CLI::App* eval = app.add_subcommand("eval", "Score a run against qrels (nDCG@k)");
    eval->add_option("--run", eval_options.run_path, "run file")->required();
    eval->add_option("--qrels", eval_options.qrels_path, "qrels file")->required();
    eval->add_option("--cutoffs", eval_options.cutoffs, "rank cutoffs")->delimiter(',');
    eval->add_flag("--json", eval_options.json, "emit JSON instead of text");

    CompareOptions compare_options;
    CLI::App* compare = app.add_subcommand("compare", "Per-query nDCG delta of two runs");
    compare->add_option("--run-a", compare_options.run_a_path, "baseline run")->required();
    compare->add_option("--run-b", compare_options.run_b_path, "candidate run")->required();
    compare->add_option("--qrels", compare_options.qrels_path, "qrels file")->required();
    compare->add_option("--cutoff", compare_options.cutoff, "rank cutoff");
    compare->add_flag("--json", compare_options.json, "emit JSON instead of text");

    CostOptions cost_options;
    CLI::App* cost = app.add_subcommand("cost", "Token and USD accounting over a call log");
    cost->add_option("--log", cost_options.log_path, "call log file (JSON lines)")->required();
    cost->add_option("--price-in", cost_options.price_in, "USD per 1K input tokens");
    cost->add_option("--price-out", cost_options.price_out, "USD per 1K output tokens");
    cost->add_option("--queries", cost_options.queries,
                     "query count for per-query averages; default: distinct ids in the log");
    cost->add_flag("--json", cost_options.json, "emit JSON instead of text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (app.got_subcommand(rerank)) return cmd_rerank(rerank_options);
    if (app.got_subcommand(eval)) return cmd_eval(eval_options);
    if (app.got_subcommand(compare)) return cmd_compare(compare_options);
    if (app.got_subcommand(cost)) return cmd_cost(cost_options);
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const BackendError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
