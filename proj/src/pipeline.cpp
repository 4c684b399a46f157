#include "rankpipe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <functional>
#include <future>
#include <iostream>
#include <set>
#include <thread>
#include <unordered_map>

#include "rankpipe/compose.hpp"
#include "rankpipe/errors.hpp"
#include "rankpipe/roles.hpp"

namespace rankpipe {

namespace {

std::string list_offenders(const std::vector<std::string>& items) {
    const std::size_t shown = std::min<std::size_t>(items.size(), 10);
    std::string out;
    for (std::size_t i = 0; i < shown; ++i) {
        if (i > 0) out += ", ";
        out += items[i];
    }
    if (items.size() > shown) {
        out += ", and " + std::to_string(items.size() - shown) + " more";
    }
    return out;
}

/// Shared per-run role dispatcher: content-addressed cache lookup, in-process
/// single-flight dedup, then the backend. A storage failure disables the
/// cache for the rest of the run with one stderr warning.
class RoleRunner {
public:
    explicit RoleRunner(ResponseCache* cache) : cache_(cache) {}

    std::string run(Role role,
                    const std::string& template_version,
                    const std::string& input_text,
                    bool use_cache,
                    const std::function<std::string()>& invoke) {
        const std::string key = role_input_digest(role, template_version, input_text);

        std::promise<std::string> promise;
        std::shared_future<std::string> future;
        bool owner = false;
        {
            std::scoped_lock lock(map_mutex_);
            auto it = memo_.find(key);
            if (it != memo_.end()) {
                future = it->second;
            } else {
                future = promise.get_future().share();
                memo_.emplace(key, future);
                owner = true;
            }
        }
        if (!owner) {
            return future.get();
        }

        try {
            const bool cache_on = use_cache && cache_ != nullptr && !cache_disabled_.load();
            if (cache_on) {
                if (auto hit = cache_->get(key)) {
                    promise.set_value(*hit);
                    return *hit;
                }
            }
            std::string value = invoke();
            if (cache_on) {
                try {
                    cache_->put(key, value);
                } catch (const CacheError& e) {
                    cache_disabled_.store(true);
                    std::call_once(warned_, [&] {
                        std::cerr << "warning: response cache unavailable (" << e.what()
                                  << "); continuing uncached\n";
                    });
                }
            }
            promise.set_value(value);
            return value;
        } catch (...) {
            promise.set_exception(std::current_exception());
            throw;
        }
    }

private:
    ResponseCache* cache_;
    std::atomic<bool> cache_disabled_{false};
    std::once_flag warned_;
    std::mutex map_mutex_;
    std::unordered_map<std::string, std::shared_future<std::string>> memo_;
};

struct QueryInput {
    const Query* query = nullptr;
    std::vector<std::string> head; // reranked candidates, input order
    std::vector<std::string> tail; // beyond top_k, emitted unchanged
};

} // namespace

std::vector<std::string> run_header_lines(const RerankJob& job) {
    const PipelineConfig& config = job.config;

    std::string roles;
    auto add_role = [&roles](bool on, const char* name) {
        if (!on) return;
        if (!roles.empty()) roles += ',';
        roles += name;
    };
    add_role(config.use_rewriter, "rewriter");
    add_role(config.use_answerer, "answerer");
    add_role(config.use_summarizer, "summarizer");
    if (roles.empty()) roles = "none";

    std::string features = config.reranker_prompt_features.to_string();
    if (features.empty()) features = "none";

    char temperature[32];
    std::snprintf(temperature, sizeof(temperature), "%g", config.temperature);

    std::string line = "config: roles=" + roles + " m=" + std::to_string(config.repeat_m) +
                       " window=" + std::to_string(config.window_w) +
                       " step=" + std::to_string(config.step_s) + " features=" + features +
                       " top_k=" + std::to_string(config.top_k) + " temperature=" + temperature;
    if (!config.model_name.empty()) {
        line += " model=" + config.model_name;
    }

    return {
        line,
        "templates: rewriter=" + job.rewriter_template.version +
            " answerer=" + job.answerer_template.version +
            " summarizer=" + job.summarizer_template.version +
            " reranker=" + reranker_prompt::version(),
    };
}

RunFile run_rerank(const RerankJob& job,
                   const RunFile& run_in,
                   const Corpus& corpus,
                   const std::vector<Query>& queries,
                   ChatBackend& backend,
                   ResponseCache* cache,
                   TraceSink* trace,
                   CallLog* call_log) {
    const PipelineConfig& config = job.config;
    config.validate();
    if (job.jobs < 1) {
        throw ConfigError("query concurrency must be positive, got " + std::to_string(job.jobs));
    }
    if (job.summary_fanout < 1) {
        throw ConfigError("summarizer fan-out must be positive, got " +
                          std::to_string(job.summary_fanout));
    }

    std::unordered_map<std::string, const Query*> queries_by_id;
    for (const auto& query : queries) {
        queries_by_id.try_emplace(query.query_id, &query);
    }

    std::vector<std::string> missing_queries;
    std::set<std::string> missing_docs;
    std::vector<QueryInput> inputs;
    inputs.reserve(run_in.query_order.size());
    for (const auto& query_id : run_in.query_order) {
        QueryInput input;
        if (auto it = queries_by_id.find(query_id); it != queries_by_id.end()) {
            input.query = it->second;
        } else {
            missing_queries.push_back(query_id);
        }
        const auto& entries = run_in.for_query(query_id);
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& doc_id = entries[i].doc_id;
            if (!corpus.contains(doc_id)) {
                missing_docs.insert(doc_id);
            }
            if (i < static_cast<std::size_t>(config.top_k)) {
                input.head.push_back(doc_id);
            } else {
                input.tail.push_back(doc_id);
            }
        }
        inputs.push_back(std::move(input));
    }
    if (!missing_queries.empty()) {
        throw DataError("run references queries missing from the queries file: " +
                        list_offenders(missing_queries));
    }
    if (!missing_docs.empty()) {
        throw DataError("run references docs missing from the corpus: " +
                        list_offenders({missing_docs.begin(), missing_docs.end()}));
    }

    CompletionParams params;
    params.temperature = config.temperature;
    params.model_name = config.model_name;

    RoleRunner runner(cache);

    auto process_query = [&](const QueryInput& input) -> std::vector<std::string> {
        const Query& query = *input.query;
        LoggingBackend logged(backend, call_log, query.query_id);

        std::string rewritten = query.text;
        if (config.use_rewriter) {
            try {
                rewritten = runner.run(
                    Role::rewriter, job.rewriter_template.version, query.text, true, [&] {
                        return rewrite_query(query, logged, job.rewriter_template, params);
                    });
            } catch (const Error& e) {
                if (!config.fallback_rewriter) throw;
                std::cerr << "warning: rewriter fell back to the original text for query '"
                          << query.query_id << "': " << e.what() << '\n';
                rewritten = query.text;
            }
        }

        std::string query_for_ranking = rewritten;
        if (config.use_answerer) {
            try {
                const std::string answer = runner.run(
                    Role::answerer, job.answerer_template.version, rewritten,
                    config.cache_answers, [&] {
                        return generate_answer(rewritten, logged, job.answerer_template, params);
                    });
                query_for_ranking = compose_new_query(rewritten, answer, config.repeat_m);
            } catch (const Error& e) {
                if (!config.fallback_answerer) throw;
                std::cerr << "warning: answerer skipped for query '" << query.query_id
                          << "': " << e.what() << '\n';
                query_for_ranking = repeat_query(rewritten, config.repeat_m);
            }
        }

        RankState state;
        state.query_id = query.query_id;
        state.ordering = input.head;
        for (const auto& doc_id : input.head) {
            state.texts.emplace(doc_id, corpus.text_for(doc_id));
        }

        if (config.use_summarizer && !input.head.empty()) {
            std::vector<std::string> summaries(input.head.size());
            std::atomic<std::size_t> next{0};
            std::exception_ptr first_error;
            std::mutex error_mutex;
            auto worker = [&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= input.head.size()) return;
                    {
                        std::scoped_lock check(error_mutex);
                        if (first_error) return;
                    }
                    const std::string& doc_id = input.head[i];
                    const std::string& original = state.texts.at(doc_id);
                    try {
                        summaries[i] = runner.run(
                            Role::summarizer, job.summarizer_template.version, original, true,
                            [&] {
                                Passage passage;
                                passage.doc_id = doc_id;
                                passage.text = original;
                                return summarize_passage(passage, logged,
                                                         job.summarizer_template, params)
                                    .summary;
                            });
                    } catch (const Error& e) {
                        if (!config.fallback_summarizer) {
                            std::scoped_lock capture(error_mutex);
                            if (!first_error) first_error = std::current_exception();
                            return;
                        }
                        std::cerr << "warning: summarizer kept the original text for doc '"
                                  << doc_id << "': " << e.what() << '\n';
                        summaries[i] = original;
                    }
                }
            };
            const std::size_t worker_count =
                std::min(input.head.size(), static_cast<std::size_t>(job.summary_fanout));
            std::vector<std::thread> pool;
            pool.reserve(worker_count);
            for (std::size_t t = 0; t < worker_count; ++t) pool.emplace_back(worker);
            for (auto& thread : pool) thread.join();
            if (first_error) std::rethrow_exception(first_error);
            for (std::size_t i = 0; i < input.head.size(); ++i) {
                state.texts[input.head[i]] = summaries[i];
            }
        }

        state = rerank_pass(std::move(state), query_for_ranking, config, logged, trace);

        std::vector<std::string> ordering = state.ordering;
        ordering.insert(ordering.end(), input.tail.begin(), input.tail.end());
        return ordering;
    };

    std::vector<std::vector<std::string>> orderings(inputs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto query_worker = [&] {
        while (!stop.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= inputs.size()) return;
            try {
                orderings[i] = process_query(inputs[i]);
            } catch (const Error& e) {
                const bool soft = job.fail_soft && (dynamic_cast<const BackendError*>(&e) ||
                                                    dynamic_cast<const RoleFailureError*>(&e));
                if (soft) {
                    std::cerr << "warning: query '" << run_in.query_order[i]
                              << "' kept its input order: " << e.what() << '\n';
                    auto ordering = inputs[i].head;
                    ordering.insert(ordering.end(), inputs[i].tail.begin(),
                                    inputs[i].tail.end());
                    orderings[i] = std::move(ordering);
                    continue;
                }
                std::scoped_lock capture(error_mutex);
                if (!first_error) first_error = std::current_exception();
                stop.store(true);
                return;
            } catch (...) {
                std::scoped_lock capture(error_mutex);
                if (!first_error) first_error = std::current_exception();
                stop.store(true);
                return;
            }
        }
    };

    const std::size_t pool_size =
        std::max<std::size_t>(1, std::min(inputs.size(), static_cast<std::size_t>(job.jobs)));
    std::vector<std::thread> pool;
    pool.reserve(pool_size);
    for (std::size_t t = 0; t < pool_size; ++t) pool.emplace_back(query_worker);
    for (auto& thread : pool) thread.join();
    if (first_error) std::rethrow_exception(first_error);

    RunFile out;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto& query_id = run_in.query_order[i];
        const auto& ordering = orderings[i];
        const int n = static_cast<int>(ordering.size());
        for (int r = 1; r <= n; ++r) {
            RunEntry entry;
            entry.doc_id = ordering[static_cast<std::size_t>(r - 1)];
            entry.rank = r;
            entry.score = static_cast<double>(n - r + 1) / n;
            out.add(query_id, std::move(entry));
        }
    }
    return out;
}

} // namespace rankpipe
